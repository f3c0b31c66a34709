"""Quantum error correction with cavity-mediated cat-state ancillas.

Subpackages cover GF(2) linear algebra, hypergraph-product code
construction, cavity scheduling, noisy syndrome-extraction circuits, Pauli
frame sampling, BP+OSD decoding, threshold experiments, and an exact dense
verifier of the collective-spin encoding on the Steane code.
"""

from .codes import (CssCode, build_code, code_parameters, compute_distance,
                    hypergraph_product, layout)
from .circuits import (Circuit, DetectorConfig, Instruction, NoiseModel,
                       build_memory_experiment, make_noise_model)
from .decoder import Decoder, DecoderConfig
from .harness import (DataPoint, FitResult, cooperativity, fit_threshold,
                      per_round, pseudo_threshold, run_point)
from .scheduling import (CavityMap, Schedule, assign_cavities,
                         diagonal_schedule, validate_schedule)
from .sim import DetectorErrorModel, build_dem, sample_frames

__all__ = [
    "CssCode", "build_code", "code_parameters", "compute_distance",
    "hypergraph_product", "layout", "Circuit", "DetectorConfig",
    "Instruction", "NoiseModel", "build_memory_experiment",
    "make_noise_model", "Decoder", "DecoderConfig", "DataPoint", "FitResult",
    "cooperativity", "fit_threshold", "per_round", "pseudo_threshold",
    "run_point", "CavityMap", "Schedule", "assign_cavities",
    "diagonal_schedule", "validate_schedule", "DetectorErrorModel",
    "build_dem", "sample_frames",
]

__version__ = "0.1.0"
