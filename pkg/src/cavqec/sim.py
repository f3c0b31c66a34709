"""Pauli-frame sampling and detector-error-model extraction.

Noise is Pauli, gates are Clifford, and detectors are measurement parities
that are deterministic in the noiseless circuit, so a shot is fully described
by the frame of X/Z flips it accumulates relative to the noiseless reference.
Frames propagate through gates by conjugation (X flows down a CNOT, Z flows
up, CZ turns an X on either leg into a Z on the other, H swaps X and Z) and
global phases are discarded.

Shots are packed eight per byte along the last axis, so one numpy XOR per
gate target advances the whole batch.  The same engine builds the detector
error model: every elementary fault of every channel gets a private bit
column, is injected at its space-time location, and its column of the final
detector matrix is its signature.  Faults with identical signatures merge
with p = pa*(1-pb) + pb*(1-pa).

Randomness is counter-based: shot chunk c of a run with seed s uses
Philox(key=(s, c)), so batches are bit-reproducible and chunks can be drawn
in any order or in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Instruction

CHUNK_SHOTS = 8192

_PAULI2 = [(a, b) for a in "IXYZ" for b in "IXYZ"][1:]
# Rows: which of (x_a, z_a, x_b, z_b) each of the 15 two-qubit Paulis flips.
_PAT2 = np.array([[pa in "XY", pa in "YZ", pb in "XY", pb in "YZ"]
                  for pa, pb in _PAULI2], dtype=np.uint8).T


def propagate_pauli(pauli: dict, inst: Instruction) -> dict:
    """Conjugate a Pauli (qubit -> "X"/"Y"/"Z", phase ignored) through a gate."""
    x = {q for q, p in pauli.items() if p in "XY"}
    z = {q for q, p in pauli.items() if p in "YZ"}
    if inst.kind == "H":
        for q in inst.targets:
            inx, inz = q in x, q in z
            if inx != inz:
                x.symmetric_difference_update({q})
                z.symmetric_difference_update({q})
    elif inst.kind == "CNOT":
        for c, t in zip(inst.targets[0::2], inst.targets[1::2]):
            if c in x:
                x.symmetric_difference_update({t})
            if t in z:
                z.symmetric_difference_update({c})
    elif inst.kind == "CZ":
        for a, b in zip(inst.targets[0::2], inst.targets[1::2]):
            if a in x:
                z.symmetric_difference_update({b})
            if b in x:
                z.symmetric_difference_update({a})
    elif inst.kind.startswith("PAULI") or inst.kind == "TICK":
        pass
    else:
        raise ValueError(f"{inst.kind} is not a Clifford gate")
    out = {}
    for q in x | z:
        out[q] = "XZY"[(q in x) + 2 * (q in z) - 1]
    return out


def _bern(rng, shots: int, p: float) -> np.ndarray:
    return np.packbits(rng.random(shots) < p, bitorder="little")


def _propagate(circuit: Circuit, width: int, apply_noise):
    """Walk the circuit once over a packed batch of `width` bytes per row.

    apply_noise(pos, inst, x, z, pend) injects flips for noise instructions;
    everything else is handled here.  Returns (detector rows, observable rows).
    """
    nq = circuit.qubit_count
    x = np.zeros((nq, width), dtype=np.uint8)
    z = np.zeros((nq, width), dtype=np.uint8)
    pend = np.zeros((nq, width), dtype=np.uint8)
    rec, det = [], []
    obs = [np.zeros(width, dtype=np.uint8)
           for _ in range(circuit.observable_count)]
    for pos, inst in enumerate(circuit.instructions):
        k = inst.kind
        if k == "CNOT":
            for c, t in zip(inst.targets[0::2], inst.targets[1::2]):
                x[t] ^= x[c]
                z[c] ^= z[t]
        elif k == "CZ":
            for a, b in zip(inst.targets[0::2], inst.targets[1::2]):
                z[a] ^= x[b]
                z[b] ^= x[a]
        elif k == "H":
            for q in inst.targets:
                tmp = x[q].copy()
                x[q] = z[q]
                z[q] = tmp
        elif k in ("RESET_Z", "RESET_X"):
            idx = list(inst.targets)
            x[idx] = 0
            z[idx] = 0
        elif k == "MEASURE_Z":
            for q in inst.targets:
                rec.append(x[q] ^ pend[q])
                pend[q] = 0
        elif k == "DETECTOR":
            row = np.zeros(width, dtype=np.uint8)
            for r in inst.refs:
                row ^= rec[len(rec) + r]
            det.append(row)
        elif k == "OBSERVABLE_INCLUDE":
            for r in inst.refs:
                obs[inst.obs_id] ^= rec[len(rec) + r]
        elif k == "TICK" or k.startswith("PAULI"):
            pass
        else:
            apply_noise(pos, inst, x, z, pend)
    return det, obs


def _sample_noise(rng, shots: int):
    def apply(pos, inst, x, z, pend):
        k, p = inst.kind, inst.p
        if p == 0:
            return
        if k == "X_ERROR":
            for q in inst.targets:
                x[q] ^= _bern(rng, shots, p)
        elif k == "MEAS_FLIP":
            for q in inst.targets:
                pend[q] ^= _bern(rng, shots, p)
        elif k == "DEPOL1":
            for q in inst.targets:
                coins = rng.random((3, shots)) < p / 3
                x[q] ^= np.packbits(coins[0] ^ coins[1], bitorder="little")
                z[q] ^= np.packbits(coins[1] ^ coins[2], bitorder="little")
        elif k == "DEPOL2":
            for a, b in zip(inst.targets[0::2], inst.targets[1::2]):
                coins = (rng.random((15, shots)) < p / 15).astype(np.uint8)
                xa, za, xb, zb = (_PAT2 @ coins) & 1
                x[a] ^= np.packbits(xa, bitorder="little")
                z[a] ^= np.packbits(za, bitorder="little")
                x[b] ^= np.packbits(xb, bitorder="little")
                z[b] ^= np.packbits(zb, bitorder="little")
        elif k == "ONE_HOT_X":
            u = rng.random(shots)
            n = len(inst.targets)
            for i, q in enumerate(inst.targets):
                hit = (u >= i * p / n) & (u < (i + 1) * p / n)
                x[q] ^= np.packbits(hit, bitorder="little")
        else:
            raise ValueError(f"unknown noise kind {k}")
    return apply


@dataclass(frozen=True)
class SampleBatch:
    """Packed detector/observable outcomes: bit s of byte s//8 is shot s."""

    shots: int
    seed: int
    detectors: np.ndarray
    observables: np.ndarray

    def detector_array(self) -> np.ndarray:
        return np.unpackbits(self.detectors, axis=1, count=self.shots,
                             bitorder="little").T

    def observable_array(self) -> np.ndarray:
        return np.unpackbits(self.observables, axis=1, count=self.shots,
                             bitorder="little").T

    def to_b8(self, which: str = "detectors") -> bytes:
        arr = self.detector_array() if which == "detectors" else self.observable_array()
        return np.packbits(arr, axis=1, bitorder="little").tobytes()

    def to_csv(self, which: str = "detectors") -> str:
        arr = self.detector_array() if which == "detectors" else self.observable_array()
        return "\n".join(",".join(str(b) for b in row) for row in arr) + "\n"


def read_b8(data: bytes, bits: int) -> np.ndarray:
    """Decode row-major packed shots back to a (shots, bits) 0/1 array."""
    row_bytes = (bits + 7) // 8
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, row_bytes)
    return np.unpackbits(raw, axis=1, count=bits, bitorder="little")


def sample_frames(circuit: Circuit, shots: int, seed: int) -> SampleBatch:
    det_chunks, obs_chunks = [], []
    for chunk, start in enumerate(range(0, shots, CHUNK_SHOTS)):
        n = min(CHUNK_SHOTS, shots - start)
        width = (n + 7) // 8
        rng = np.random.Generator(np.random.Philox(key=[seed, chunk]))
        det, obs = _propagate(circuit, width, _sample_noise(rng, n))
        det_chunks.append(np.array(det, dtype=np.uint8).reshape(len(det), width))
        obs_chunks.append(np.array(obs, dtype=np.uint8).reshape(len(obs), width))
    return SampleBatch(shots=shots, seed=seed,
                       detectors=np.concatenate(det_chunks, axis=1),
                       observables=np.concatenate(obs_chunks, axis=1))


def _fault_groups(circuit: Circuit):
    """Elementary faults as (semantics, members) groups.

    Members are (position, probability, x-flips, z-flips, pending-flips).
    Depolarizing channels decompose into independent per-Pauli coins (the
    sampler draws them the same way, so sampler, DEM, and oracle agree
    exactly); a one-hot channel is a single exclusive group.
    """
    groups = []
    for pos, inst in enumerate(circuit.instructions):
        k, p, tg = inst.kind, inst.p, inst.targets
        if k not in ("X_ERROR", "MEAS_FLIP", "DEPOL1", "DEPOL2", "ONE_HOT_X"):
            continue
        if p == 0:
            continue
        if k == "X_ERROR":
            for q in tg:
                groups.append(("independent", [(pos, p, (q,), (), ())]))
        elif k == "MEAS_FLIP":
            for q in tg:
                groups.append(("independent", [(pos, p, (), (), (q,))]))
        elif k == "DEPOL1":
            for q in tg:
                groups.append(("independent", [
                    (pos, p / 3, (q,), (), ()),
                    (pos, p / 3, (q,), (q,), ()),
                    (pos, p / 3, (), (q,), ())]))
        elif k == "DEPOL2":
            for a, b in zip(tg[0::2], tg[1::2]):
                members = []
                for pa, pb in _PAULI2:
                    xs = tuple(q for q, pp in ((a, pa), (b, pb)) if pp in "XY")
                    zs = tuple(q for q, pp in ((a, pa), (b, pb)) if pp in "YZ")
                    members.append((pos, p / 15, xs, zs, ()))
                groups.append(("independent", members))
        elif k == "ONE_HOT_X":
            groups.append(("exclusive",
                           [(pos, p / len(tg), (q,), (), ()) for q in tg]))
    return groups


def _elementary_faults(circuit: Circuit):
    return [f for _, members in _fault_groups(circuit) for f in members]


def _fault_signatures(circuit: Circuit, faults):
    """Per-fault (detectors, observables) via one batched propagation."""
    width = (len(faults) + 7) // 8
    by_pos = {}
    for col, (pos, _, xs, zs, ps) in enumerate(faults):
        by_pos.setdefault(pos, []).append((col, xs, zs, ps))

    def apply(pos, inst, x, z, pend):
        for col, xs, zs, ps in by_pos.get(pos, ()):
            byte, bit = col >> 3, np.uint8(1 << (col & 7))
            for q in xs:
                x[q, byte] ^= bit
            for q in zs:
                z[q, byte] ^= bit
            for q in ps:
                pend[q, byte] ^= bit

    det, obs = _propagate(circuit, width, apply)
    n = len(faults)
    dets_of = [[] for _ in range(n)]
    obss_of = [[] for _ in range(n)]
    for d, row in enumerate(det):
        for col in np.flatnonzero(np.unpackbits(row, count=n, bitorder="little")):
            dets_of[col].append(d)
    for o, row in enumerate(obs):
        for col in np.flatnonzero(np.unpackbits(row, count=n, bitorder="little")):
            obss_of[col].append(o)
    return len(det), len(obs), dets_of, obss_of


@dataclass(frozen=True)
class DetectorErrorModel:
    """Independent error mechanisms with the detectors/observables they flip."""

    mechanisms: tuple
    detector_count: int
    observable_count: int

    def to_text(self) -> str:
        lines = []
        for p, dets, obss in self.mechanisms:
            parts = [f"error({p:.12g})"]
            parts += [f"D{d}" for d in dets]
            parts += [f"L{o}" for o in obss]
            lines.append(" ".join(parts))
        lines.append(f"# detectors: {self.detector_count}")
        lines.append(f"# observables: {self.observable_count}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DetectorErrorModel":
        mechanisms = []
        d_count = o_count = 0
        for line in text.splitlines():
            line = line.strip()
            if line.startswith("# detectors:"):
                d_count = int(line.split(":")[1])
            elif line.startswith("# observables:"):
                o_count = int(line.split(":")[1])
            elif line.startswith("error("):
                tokens = line.split()
                p = float(tokens[0][6:-1])
                dets = tuple(int(t[1:]) for t in tokens[1:] if t[0] == "D")
                obss = tuple(int(t[1:]) for t in tokens[1:] if t[0] == "L")
                mechanisms.append((p, dets, obss))
        return cls(mechanisms=tuple(mechanisms), detector_count=d_count,
                   observable_count=o_count)


def build_dem(circuit: Circuit) -> DetectorErrorModel:
    faults = _elementary_faults(circuit)
    d_count, o_count, dets_of, obss_of = _fault_signatures(circuit, faults)
    merged = {}
    for (pos, p, *_), dets, obss in zip(faults, dets_of, obss_of):
        key = (tuple(dets), tuple(obss))
        if key == ((), ()):
            continue
        q = merged.get(key, 0.0)
        merged[key] = q * (1 - p) + p * (1 - q)
    mechanisms = tuple((p, key[0], key[1])
                       for key, p in sorted(merged.items()) if p > 0)
    return DetectorErrorModel(mechanisms=mechanisms, detector_count=d_count,
                              observable_count=o_count)


def enumerate_oracle(circuit: Circuit) -> dict:
    """Exact distribution over (detector bits, observable bits) tuples.

    Dynamic programming fault by fault, honoring the exclusive semantics of
    one-hot groups; capped at 20 elementary mechanisms.
    """
    groups = _fault_groups(circuit)
    faults = [f for _, members in groups for f in members]
    if len(faults) > 20:
        raise ValueError("oracle is limited to 20 elementary mechanisms")
    d_count, o_count, dets_of, obss_of = _fault_signatures(circuit, faults)
    signatures = iter(zip(dets_of, obss_of))

    def flipped(key, dets, obss):
        dbits, obits = list(key[0]), list(key[1])
        for d in dets:
            dbits[d] ^= 1
        for o in obss:
            obits[o] ^= 1
        return (tuple(dbits), tuple(obits))

    zero = (tuple([0] * d_count), tuple([0] * o_count))
    dist = {zero: 1.0}
    for semantics, members in groups:
        sigs = [next(signatures) for _ in members]
        if semantics == "independent":
            for (pos, p, *_), (dets, obss) in zip(members, sigs):
                new = {}
                for key, q in dist.items():
                    new[key] = new.get(key, 0.0) + q * (1 - p)
                    hit = flipped(key, dets, obss)
                    new[hit] = new.get(hit, 0.0) + q * p
                dist = new
        else:
            total = sum(p for _, p, *_ in members)
            new = {}
            for key, q in dist.items():
                new[key] = new.get(key, 0.0) + q * (1 - total)
                for (pos, p, *_), (dets, obss) in zip(members, sigs):
                    hit = flipped(key, dets, obss)
                    new[hit] = new.get(hit, 0.0) + q * p
            dist = new
    return dist
