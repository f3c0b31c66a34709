"""Monte-Carlo experiment driver and threshold analysis.

`run_point` ties the pipeline together: build the scheduled memory circuit
for a code at one physical error rate, sample Pauli frames, decode every
shot, and report the per-round logical failure rate.  `fit_threshold` fits
the scaling ansatz P_L(p) = A (p/p_th)^(a d^b) jointly across code distances
in log space; `cooperativity` converts a threshold into the required
atom-cavity cooperativity; `pseudo_threshold` finds where a single code's
logical rate crosses the physical rate.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .circuits import DetectorConfig, build_memory_experiment, make_noise_model
from .codes import CssCode, layout
from .decoder import Decoder, DecoderConfig
from .scheduling import diagonal_schedule
from .sim import build_dem, sample_frames


@dataclass(frozen=True)
class DataPoint:
    """One Monte-Carlo point of a memory experiment."""

    code: str
    d: int
    p: float
    m: float
    model: str
    shots: int
    failures: int
    per_round_rate: float
    stderr: float
    rounds: int = 0

    def __post_init__(self):
        if not 0 <= self.failures <= self.shots:
            raise ValueError("failures must lie in [0, shots]")
        if not 0.0 <= self.per_round_rate <= 1.0:
            raise ValueError("per_round_rate must lie in [0, 1]")


@dataclass(frozen=True)
class FitResult:
    """Parameters of P_L(p) = A (p/p_th)^(a d^b) with standard errors."""

    amplitude: float
    a: float
    b: float
    p_th: float
    errors: dict = field(default_factory=dict)
    residual: float = 0.0

    def __post_init__(self):
        if min(self.amplitude, self.a, self.b, self.p_th) <= 0:
            raise ValueError("all fit parameters must be positive")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def per_round(p_total: float, d: int) -> float:
    """Convert a d-round failure probability to a per-round rate:
    1 - (1 - P)^(1/d)."""
    if not 0.0 <= p_total <= 1.0:
        raise ValueError("probability out of range")
    if d < 1:
        raise ValueError("need at least one round")
    return 1.0 - (1.0 - p_total) ** (1.0 / d)


def total_from_per_round(rate: float, d: int) -> float:
    """Inverse of per_round."""
    return 1.0 - (1.0 - rate) ** d


def _decode_observables(dem, detector_rows, decoder_config) -> np.ndarray:
    """Predicted observable bits for every shot, for any observable count.

    The decoder tracks at most 64 observables, but the chosen correction
    depends only on the syndrome and the priors.  For wider codes the model
    is decoded once per 64-observable slice (identical mechanism graphs give
    identical corrections) and the predictions are concatenated.
    """
    from .sim import DetectorErrorModel

    nobs = dem.observable_count
    if nobs <= 64:
        return Decoder(dem, decoder_config).decode_batch(detector_rows)
    outs = []
    for lo in range(0, nobs, 64):
        hi = min(lo + 64, nobs)
        mechs = tuple((p, dets, tuple(o - lo for o in obss
                                      if lo <= o < hi))
                      for p, dets, obss in dem.mechanisms)
        view = DetectorErrorModel(mechanisms=mechs,
                                  detector_count=dem.detector_count,
                                  observable_count=hi - lo)
        outs.append(Decoder(view, decoder_config).decode_batch(detector_rows))
    return np.concatenate(outs, axis=1)


def run_point(code: CssCode, d: int, p: float, m: float, model: str,
              shots: int, seed: int, rounds: Optional[int] = None,
              label: str = "", detectors: DetectorConfig = DetectorConfig(
                  per_qubit=True, parity=False, x_detectors="singles"),
              decoder_config: DecoderConfig = DecoderConfig()) -> DataPoint:
    """Sample and decode one memory experiment.

    A shot fails when any logical-Z observable is mispredicted.  The total
    failure fraction is converted to a per-round rate over `rounds` (default
    d) syndrome-extraction cycles; the standard error is the binomial error
    propagated through that conversion.
    """
    rounds = d if rounds is None else rounds
    noise = make_noise_model(model, p, m)
    schedule = diagonal_schedule(code, layout(code))
    circuit = build_memory_experiment(code, rounds, noise, schedule, detectors)
    batch = sample_frames(circuit, shots, seed)
    truth = batch.observable_array()
    if p == 0.0:
        failures = int((truth != 0).any(axis=1).sum())
    else:
        pred = _decode_observables(build_dem(circuit), batch.detector_array(),
                                   decoder_config)
        failures = int((pred != truth).any(axis=1).sum())
    frac = failures / shots
    rate = per_round(frac, rounds)
    err_total = math.sqrt(max(frac * (1.0 - frac), 1.0 / shots) / shots)
    # Delta method through P -> 1 - (1 - P)^(1/d).
    err = err_total * (1.0 - frac) ** (1.0 / rounds - 1.0) / rounds
    return DataPoint(code=label or f"n{code.n}", d=d, p=p, m=m, model=model,
                     shots=shots, failures=failures, per_round_rate=rate,
                     stderr=err, rounds=rounds)


def _fit_arrays(points: Sequence[DataPoint]):
    if any(pt.failures == 0 or pt.per_round_rate <= 0.0 for pt in points):
        raise ValueError(
            "zero-failure points have undefined log rates; raise the shot "
            "count or drop them")
    by_d = {}
    for pt in points:
        by_d.setdefault(pt.d, []).append(pt)
    if len(by_d) < 2:
        raise ValueError("need points from at least two code distances")
    if any(len(v) < 3 for v in by_d.values()):
        raise ValueError("need at least three points per code")
    ds = np.array([pt.d for pt in points], dtype=float)
    logp = np.log(np.array([pt.p for pt in points]))
    logy = np.log(np.array([pt.per_round_rate for pt in points]))
    # Inverse-variance weights in log space: sigma_log = stderr / rate.
    sig = np.array([pt.stderr / pt.per_round_rate for pt in points])
    sig = np.where(sig > 0, sig, np.median(sig[sig > 0]) if (sig > 0).any()
                   else 1.0)
    return ds, logp, logy, 1.0 / sig ** 2


def fit_threshold(points: Sequence[DataPoint],
                  fix_a_b: Optional[tuple] = None) -> FitResult:
    """Weighted least-squares fit of log P_L = log A + a d^b (log p - log p_th).

    Derivative-free simplex minimization over log-transformed parameters
    (everything stays positive by construction) with several starting points.
    With fix_a_b given, only A and p_th are free.
    """
    ds, logp, logy, wts = _fit_arrays(points)

    def model(theta):
        if fix_a_b is None:
            log_amp, log_a, log_b, log_pth = theta
            a, b = math.exp(log_a), math.exp(log_b)
        else:
            log_amp, log_pth = theta
            a, b = fix_a_b
        return log_amp + a * ds ** b * (logp - log_pth)

    def loss(theta):
        r = model(theta) - logy
        return float(np.sum(wts * r * r))

    starts = []
    for pth0 in (4e-3, 8e-3, 1.6e-2):
        if fix_a_b is None:
            for a0 in (0.5, 1.0):
                starts.append([math.log(0.1), math.log(a0), 0.0,
                               math.log(pth0)])
        else:
            starts.append([math.log(0.1), math.log(pth0)])
    best = None
    for x0 in starts:
        res = minimize(loss, x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12,
                                "maxiter": 20000})
        if best is None or res.fun < best.fun:
            best = res
    theta = best.x
    if fix_a_b is None:
        amp, a, b, pth = (math.exp(theta[0]), math.exp(theta[1]),
                          math.exp(theta[2]), math.exp(theta[3]))
    else:
        amp, pth = math.exp(theta[0]), math.exp(theta[1])
        a, b = fix_a_b

    # Gauss-Newton covariance at the optimum for standard errors.
    npar = len(theta)
    jac = np.zeros((len(logy), npar))
    step = 1e-6
    for j in range(npar):
        hi = theta.copy()
        lo = theta.copy()
        hi[j] += step
        lo[j] -= step
        jac[:, j] = (model(hi) - model(lo)) / (2 * step)
    resid = model(theta) - logy
    dof = max(len(logy) - npar, 1)
    s2 = float(np.sum(wts * resid * resid)) / dof
    try:
        cov = np.linalg.inv(jac.T @ (wts[:, None] * jac)) * s2
        log_errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        log_errs = np.full(npar, float("nan"))
    if fix_a_b is None:
        errors = {"amplitude": amp * log_errs[0], "a": a * log_errs[1],
                  "b": b * log_errs[2], "p_th": pth * log_errs[3]}
    else:
        errors = {"amplitude": amp * log_errs[0], "p_th": pth * log_errs[1]}
    return FitResult(amplitude=amp, a=a, b=b, p_th=pth, errors=errors,
                     residual=float(best.fun))


def curve_crossing(points_a: Sequence[DataPoint],
                   points_b: Sequence[DataPoint]) -> float:
    """Physical rate where two codes' per-round curves intersect, by
    log-log linear interpolation of the difference."""
    pa = sorted(points_a, key=lambda t: t.p)
    pb = sorted(points_b, key=lambda t: t.p)
    common = sorted({t.p for t in pa} & {t.p for t in pb})
    if len(common) < 2:
        raise ValueError("need at least two shared physical rates")
    ya = {t.p: t.per_round_rate for t in pa}
    yb = {t.p: t.per_round_rate for t in pb}
    if any(ya[p] <= 0 or yb[p] <= 0 for p in common):
        raise ValueError("zero rates cannot be interpolated in log space")
    xs = np.log(np.array(common))
    diff = np.log([ya[p] for p in common]) - np.log([yb[p] for p in common])
    for i in range(len(common) - 1):
        if diff[i] == 0.0:
            return common[i]
        if diff[i] * diff[i + 1] < 0:
            frac = diff[i] / (diff[i] - diff[i + 1])
            return float(np.exp(xs[i] + frac * (xs[i + 1] - xs[i])))
    if diff[-1] == 0.0:
        return common[-1]
    raise ValueError("curves do not cross inside the sampled range")


def cooperativity(n: int, m: float, p_th: float) -> float:
    """Cooperativity required to reach threshold: C = (N pi / (m p_th
    sqrt(2 (1 + 2^-N))))^2."""
    if n < 1 or m <= 0 or p_th <= 0:
        raise ValueError("all arguments must be positive")
    return (n * math.pi / (m * p_th * math.sqrt(2.0 * (1.0 + 2.0 ** -n)))) ** 2


def pseudo_threshold(points: Sequence[DataPoint]) -> float:
    """Physical rate where one code's per-round logical rate equals the
    physical rate, by log-log interpolation; the data must bracket the
    crossing."""
    pts = sorted(points, key=lambda t: t.p)
    if len(pts) < 2:
        raise ValueError("need at least two points")
    if any(t.per_round_rate <= 0 for t in pts):
        raise ValueError("zero rates cannot be interpolated in log space")
    xs = np.log([t.p for t in pts])
    diff = np.log([t.per_round_rate for t in pts]) - xs
    for i in range(len(pts) - 1):
        if diff[i] == 0.0:
            return pts[i].p
        if diff[i] * diff[i + 1] < 0:
            frac = diff[i] / (diff[i] - diff[i + 1])
            return float(math.exp(xs[i] + frac * (xs[i + 1] - xs[i])))
    if diff[-1] == 0.0:
        return pts[-1].p
    raise ValueError("data never crosses the physical rate")


_CSV_FIELDS = ["code", "d", "p", "m", "model", "shots", "failures",
               "per_round_rate", "stderr", "rounds"]


def points_to_csv(points: Sequence[DataPoint]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=_CSV_FIELDS)
    writer.writeheader()
    for pt in points:
        writer.writerow(asdict(pt))
    return buf.getvalue()


def points_from_csv(text: str) -> list:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(DataPoint(
            code=row["code"], d=int(row["d"]), p=float(row["p"]),
            m=float(row["m"]), model=row["model"], shots=int(row["shots"]),
            failures=int(row["failures"]),
            per_round_rate=float(row["per_round_rate"]),
            stderr=float(row["stderr"]), rounds=int(row["rounds"])))
    return out
