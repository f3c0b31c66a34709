"""Noisy syndrome-extraction circuits for cat-ancilla stabilizer measurement.

One measurement round of a weight-w check uses 2w ancilla qubits: w primary
ancillas holding the cat state and w "redundified" copies.  The fragment is

  1. reset all 2w ancillas, imperfect with X_ERROR(p_in);
  2. cat preparation: H on the root + a CNOT fan-out, then ONE_HOT_X(p_cavity)
     modeling the cavity (at most one ancilla flips, marginal p/w each);
  3. transversal coupling to the data, CNOT for X-checks and CZ for Z-checks,
     a DEPOL2(p2) after every gate;
  4. copy each primary ancilla onto its redundified partner (CNOT + DEPOL2);
  5. primary decode: inverse fan + H + a second ONE_HOT_X(p_cavity);
     redundified decode: a local CNOT fan + H on the redundified root, with no
     cavity channel;
  6. measure all 2w ancillas in Z, each preceded by MEAS_FLIP(p_meas).

In the noiseless circuit the root pair satisfies a1 XOR r1 = syndrome bit and
every other ancilla measures 0, so the parity of all 2w outcomes equals the
syndrome deterministically.  Detector wiring builds on that parity: per check
per round a comparison of the current parity against the previous round
(first-round X-check comparisons are not deterministic and are pruned), plus
the raw parity for Z-checks (deterministically 0 under |0...0> data), plus
final data-vs-last-round detectors for every Z-check.  The internal cat-fan
CNOTs carry no DEPOL2: cavity noise is already accounted for by the one-hot
channel, and doubling it up would change the error budget.
"""

from __future__ import annotations

from dataclasses import dataclass

from .codes import CssCode, logical_operators
from .scheduling import Schedule

NOISE_KINDS = ("DEPOL1", "DEPOL2", "X_ERROR", "MEAS_FLIP", "ONE_HOT_X")
GATE_KINDS = ("RESET_Z", "RESET_X", "H", "CNOT", "CZ",
              "PAULI_X", "PAULI_Y", "PAULI_Z", "MEASURE_Z")
META_KINDS = ("DETECTOR", "OBSERVABLE_INCLUDE", "TICK")


@dataclass(frozen=True)
class Instruction:
    """One circuit line: a gate, a noise channel, or an annotation.

    targets are qubit indices (pairs for CNOT/CZ); refs are negative offsets
    into the measurement record for DETECTOR/OBSERVABLE_INCLUDE.
    """

    kind: str
    targets: tuple = ()
    p: float = None
    refs: tuple = ()
    obs_id: int = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS + GATE_KINDS + META_KINDS:
            raise ValueError(f"unknown instruction kind {self.kind!r}")
        if self.kind in ("CNOT", "CZ") and len(self.targets) % 2:
            raise ValueError("two-qubit gates need an even target count")
        if self.kind in NOISE_KINDS and not (self.p is not None and 0 <= self.p <= 1):
            raise ValueError("noise channels need a probability in [0,1]")
        if any(r >= 0 for r in self.refs):
            raise ValueError("measurement refs must be negative offsets")

    def to_text(self) -> str:
        head = self.kind
        if self.kind in NOISE_KINDS:
            head += f"({self.p:.12g})"
        elif self.kind == "OBSERVABLE_INCLUDE":
            head += f"({self.obs_id})"
        parts = [head]
        parts += [str(t) for t in self.targets]
        parts += [f"rec[{r}]" for r in self.refs]
        return " ".join(parts)

    @classmethod
    def from_text(cls, line: str) -> "Instruction":
        tokens = line.split()
        head = tokens[0]
        p = obs_id = None
        if "(" in head:
            head, arg = head[:-1].split("(")
            if head == "OBSERVABLE_INCLUDE":
                obs_id = int(arg)
            else:
                p = float(arg)
        targets, refs = [], []
        for tok in tokens[1:]:
            if tok.startswith("rec["):
                refs.append(int(tok[4:-1]))
            else:
                targets.append(int(tok))
        return cls(kind=head, targets=tuple(targets), p=p,
                   refs=tuple(refs), obs_id=obs_id)


@dataclass(frozen=True)
class Circuit:
    instructions: tuple

    def __post_init__(self):
        meas = 0
        for inst in self.instructions:
            if inst.kind == "MEASURE_Z":
                meas += len(inst.targets)
            for r in inst.refs:
                if -r > meas:
                    raise ValueError("detector references a future measurement")

    @property
    def qubit_count(self) -> int:
        return 1 + max((max(i.targets) for i in self.instructions if i.targets),
                       default=-1)

    @property
    def measurement_count(self) -> int:
        return sum(len(i.targets) for i in self.instructions
                   if i.kind == "MEASURE_Z")

    @property
    def detector_count(self) -> int:
        return sum(1 for i in self.instructions if i.kind == "DETECTOR")

    @property
    def observable_count(self) -> int:
        ids = {i.obs_id for i in self.instructions
               if i.kind == "OBSERVABLE_INCLUDE"}
        return 1 + max(ids) if ids else 0

    def to_text(self) -> str:
        return "\n".join(i.to_text() for i in self.instructions) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        insts = tuple(Instruction.from_text(line)
                      for line in text.splitlines() if line.strip())
        return cls(instructions=insts)


@dataclass(frozen=True)
class NoiseModel:
    p1: float
    p2: float
    p_in: float
    p_meas: float
    p_wait: float
    p_cavity: float

    def __post_init__(self):
        for name in ("p1", "p2", "p_in", "p_meas", "p_wait", "p_cavity"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} outside [0,1]")


def make_noise_model(kind: str, p: float, m: float) -> NoiseModel:
    """Two hardware noise models sharing the cavity strength p_cavity = m*p.

    agnostic: every circuit-level rate equals p.  custom: two-qubit gates at
    p, one-qubit gates at p/10, reset and measurement at 2p.  Waiting errors
    are off in both.
    """
    if not 0 <= p <= 1 or m < 0 or m * p > 1:
        raise ValueError("require p in [0,1], m >= 0, m*p <= 1")
    if kind == "agnostic":
        return NoiseModel(p1=p, p2=p, p_in=p, p_meas=p, p_wait=0.0,
                          p_cavity=m * p)
    if kind == "custom":
        return NoiseModel(p1=p / 10, p2=p, p_in=2 * p, p_meas=2 * p,
                          p_wait=0.0, p_cavity=m * p)
    raise ValueError("noise model kind must be 'agnostic' or 'custom'")


def one_hot_stage_probabilities(n: int, p: float):
    """Conditional stage probabilities of the at-most-one-flip chain.

    Stage k fires with probability p/(n - k*p) given no earlier stage fired,
    which makes every marginal exactly p/n and the total exactly p.
    """
    probs = [p / (n - k * p) for k in range(n)]
    if any(not 0 <= q <= 1 for q in probs):
        raise ValueError("staged probabilities leave [0,1]")
    return probs


def one_hot_x_channel(qubits, p: float):
    """The cavity error channel: at most one of the qubits suffers an X."""
    qubits = tuple(qubits)
    if not qubits:
        raise ValueError("channel needs at least one qubit")
    if len(qubits) == 1:
        return [Instruction("X_ERROR", qubits, p=p)]
    one_hot_stage_probabilities(len(qubits), p)
    return [Instruction("ONE_HOT_X", qubits, p=p)]


def ancilla_indices(code: CssCode, check_type: str, check_index: int):
    """(primary, redundified) ancilla qubits of one check.

    Data qubits occupy 0..n-1; each X-check then each Z-check owns a block of
    2w ancillas, primary half first.
    """
    base = code.n
    for t, stabs in (("X", code.g_x.row_supports), ("Z", code.g_z.row_supports)):
        for idx, sup in enumerate(stabs):
            w = len(sup)
            if t == check_type and idx == check_index:
                return (tuple(range(base, base + w)),
                        tuple(range(base + w, base + 2 * w)))
            base += 2 * w
    raise IndexError("no such check")


def build_da_round(code: CssCode, check_type: str, check_index: int,
                   noise: NoiseModel):
    """Instruction fragment measuring one check once (steps 1-6 above)."""
    support = (code.g_x if check_type == "X" else code.g_z).row_supports[check_index]
    anc, red = ancilla_indices(code, check_type, check_index)
    w = len(support)
    out = []

    out.append(Instruction("RESET_Z", anc + red))
    if noise.p_in:
        out.append(Instruction("X_ERROR", anc + red, p=noise.p_in))

    out.append(Instruction("H", (anc[0],)))
    if w > 1:
        out.append(Instruction("CNOT", tuple(t for a in anc[1:] for t in (anc[0], a))))
    out += one_hot_x_channel(anc, noise.p_cavity)

    coupler = "CNOT" if check_type == "X" else "CZ"
    for a, d in zip(anc, support):
        out.append(Instruction(coupler, (a, d)))
        if noise.p2:
            out.append(Instruction("DEPOL2", (a, d), p=noise.p2))

    for a, r in zip(anc, red):
        out.append(Instruction("CNOT", (a, r)))
        if noise.p2:
            out.append(Instruction("DEPOL2", (a, r), p=noise.p2))

    if w > 1:
        out.append(Instruction("CNOT", tuple(t for a in anc[1:] for t in (anc[0], a))))
    out.append(Instruction("H", (anc[0],)))
    out += one_hot_x_channel(anc, noise.p_cavity)

    if w > 1:
        out.append(Instruction("CNOT", tuple(t for r in red[1:] for t in (red[0], r))))
    out.append(Instruction("H", (red[0],)))

    if noise.p_meas:
        out.append(Instruction("MEAS_FLIP", anc + red, p=noise.p_meas))
    out.append(Instruction("MEASURE_Z", anc + red))
    return out


@dataclass(frozen=True)
class DetectorConfig:
    """Which detector families build_memory_experiment declares.

    comparison: current-vs-previous round parity per check (always kept where
    deterministic).  parity: the raw round parity, deterministic for Z-checks
    only.  per_qubit: individual non-root ancilla outcomes, off by default.

    With per_qubit on, the parity/comparison families are rewritten in an
    equivalent sparse basis: every non-root outcome gets its own singleton
    detector and the parity content collapses to the root pair a1 XOR r1.
    The combined detector span is unchanged, but check degrees in the decoding
    graph drop sharply, which is what makes BP effective on these circuits.

    x_detectors selects how much of the X-check readout is declared: "full"
    keeps everything, "singles" drops the X-check root comparisons (which
    track Z-type data errors, irrelevant to a Z-basis memory) while keeping
    the per-ancilla singletons that locate ancilla faults, "none" drops all
    X-check detectors.
    """

    comparison: bool = True
    parity: bool = True
    per_qubit: bool = False
    x_detectors: str = "full"

    def __post_init__(self):
        if self.x_detectors not in ("full", "singles", "none"):
            raise ValueError("x_detectors must be full, singles, or none")


def build_memory_experiment(code: CssCode, rounds: int, noise: NoiseModel,
                            schedule: Schedule,
                            detectors: DetectorConfig = DetectorConfig()) -> Circuit:
    """A rounds-deep Z-basis memory experiment over the given schedule."""
    if rounds < 1:
        raise ValueError("need at least one round")
    logical_z = logical_operators(code).logical_z

    out = []
    data = tuple(range(code.n))
    out.append(Instruction("RESET_Z", data))
    if noise.p_in:
        out.append(Instruction("X_ERROR", data, p=noise.p_in))

    meas_total = 0
    # Absolute record positions of each check's current and previous rounds.
    prev_slice, cur_slice = {}, {}

    def detector(abs_indices):
        return Instruction("DETECTOR",
                           refs=tuple(sorted(i - meas_total for i in abs_indices)))

    for rnd in range(rounds):
        prev_slice, cur_slice = cur_slice, {}
        for step in schedule.timesteps:
            out.append(Instruction("TICK"))
            for check in step:
                t, idx = check
                w = len((code.g_x if t == "X" else code.g_z).row_supports[idx])
                out += build_da_round(code, t, idx, noise)
                cur_slice[check] = list(range(meas_total, meas_total + 2 * w))
                meas_total += 2 * w
                cur = cur_slice[check]
                if detectors.per_qubit:
                    # Per-qubit mode: same detector span, minimal-degree basis.
                    # Non-root outcomes are deterministic singletons, so the
                    # parity/comparison content reduces to the root pair
                    # a1 XOR r1 (the extracted syndrome bit).
                    pair = [cur[0], cur[w]]
                    prev = prev_slice.get(check, [])
                    if t == "Z":
                        if detectors.parity:
                            out.append(detector(pair))
                        elif detectors.comparison:
                            out.append(detector(pair + ([prev[0], prev[w]]
                                                        if prev else [])))
                    elif (detectors.comparison and rnd > 0
                          and detectors.x_detectors == "full"):
                        out.append(detector(pair + [prev[0], prev[w]]))
                    if t == "Z" or detectors.x_detectors != "none":
                        for i in range(1, w):
                            out.append(detector([cur[i]]))
                            out.append(detector([cur[w + i]]))
                else:
                    if detectors.parity and t == "Z":
                        out.append(detector(cur))
                    if detectors.comparison and (
                            t == "Z" or (rnd > 0
                                         and detectors.x_detectors == "full")):
                        prev = prev_slice.get(check, [])
                        out.append(detector(cur + prev))

    out.append(Instruction("TICK"))
    out.append(Instruction("MEASURE_Z", data))
    data_pos = {q: meas_total + k for k, q in enumerate(data)}
    meas_total += len(data)
    for idx, sup in enumerate(code.g_z.row_supports):
        last = cur_slice[("Z", idx)]
        if detectors.per_qubit:
            w = len(last) // 2
            last = [last[0], last[w]]
        out.append(detector([data_pos[q] for q in sup] + last))
    for k in range(logical_z.rows):
        refs = tuple(sorted(data_pos[q] - meas_total
                            for q in logical_z.row_supports[k]))
        out.append(Instruction("OBSERVABLE_INCLUDE", refs=refs, obs_id=k))

    return Circuit(instructions=tuple(out))
