"""Belief-propagation decoding with ordered-statistics post-processing.

The Tanner graph comes from a detector error model: checks are detectors,
variables are error mechanisms.  BP is normalized min-sum in the LLR domain
with a flooding schedule (every check message of an iteration is computed
from the previous iteration's state).  When BP fails to reproduce the
syndrome, OSD ranks columns by posterior flip probability, greedily collects
a full-rank independent set in that order, and inverts on it, which always
yields a syndrome-consistent correction.  OSD-w additionally sweeps weight-1
and weight-2 flips of the most likely non-pivot columns and keeps the
lightest valid solution.

Hot paths (message passing, packed GF(2) elimination) are numba-compiled;
columns are packed 64 detectors per word.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .gf2 import BitMatrix, BitVector
from .sim import DetectorErrorModel

CLIP = 50.0


@dataclass(frozen=True)
class DecoderConfig:
    max_iterations: int = 30
    min_sum_scale: float = 0.625
    osd_order: int = 0
    osd_sweep_depth: int = 10
    cs_order: int = 0

    def __post_init__(self):
        if not 0 < self.min_sum_scale <= 1:
            raise ValueError("min_sum_scale must be in (0,1]")
        if self.max_iterations < 1:
            raise ValueError("need at least one iteration")


@dataclass(frozen=True)
class DecodeResult:
    correction: BitVector
    converged: bool
    predicted_observables: BitVector
    soft_outputs: np.ndarray


@njit(cache=True)
def _bp_run(llr0, cptr, cvars, syndrome, iters, scale):
    nvar = llr0.size
    nchk = cptr.size - 1
    ne = cvars.size
    msg = np.zeros(ne)
    new = np.zeros(ne)
    total = llr0.copy()
    hard = np.zeros(nvar, np.uint8)
    converged = False
    for _ in range(iters):
        for c in range(nchk):
            lo, hi = cptr[c], cptr[c + 1]
            sgn = -1.0 if syndrome[c] else 1.0
            min1 = 1e300
            min2 = 1e300
            arg = -1
            for e in range(lo, hi):
                t = total[cvars[e]] - msg[e]
                if t > CLIP:
                    t = CLIP
                elif t < -CLIP:
                    t = -CLIP
                if t < 0:
                    sgn = -sgn
                a = abs(t)
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg = e
                elif a < min2:
                    min2 = a
            for e in range(lo, hi):
                t = total[cvars[e]] - msg[e]
                se = sgn if t >= 0 else -sgn
                new[e] = se * scale * (min2 if e == arg else min1)
        msg, new = new, msg
        for v in range(nvar):
            total[v] = llr0[v]
        for e in range(ne):
            total[cvars[e]] += msg[e]
        ok = True
        for v in range(nvar):
            hard[v] = 1 if total[v] <= 0 else 0
        for c in range(nchk):
            par = 0
            for e in range(cptr[c], cptr[c + 1]):
                par ^= hard[cvars[e]]
            if par != syndrome[c]:
                ok = False
                break
        if ok:
            converged = True
            break
    return total, hard, converged


@njit(parallel=True, cache=True)
def _bp_batch(llr0, cptr, cvars, syndromes, iters, scale, obs_mask):
    shots = syndromes.shape[0]
    conv = np.zeros(shots, np.uint8)
    pred = np.zeros(shots, np.uint64)
    for i in prange(shots):
        _, hard, ok = _bp_run(llr0, cptr, cvars, syndromes[i], iters, scale)
        if ok:
            conv[i] = 1
            acc = np.uint64(0)
            for v in range(hard.size):
                if hard[v]:
                    acc ^= obs_mask[v]
            pred[i] = acc
    return conv, pred


@njit(cache=True)
def _osd_eliminate(colbits, order, nwords, target_rank):
    """Greedy full-rank column selection in ranked order.

    Returns (pivot column ids, reduced columns, leading bit rows, coefficient
    masks over earlier pivots, pivot count, columns processed).  Reduced
    column k is a GF(2) combination of original pivot columns given by
    coefficient mask k.  ``target_rank`` (if >= 0) stops the scan once that
    many pivots are found; every remaining column is then known dependent.
    """
    ncols = order.size
    maxpiv = min(ncols, nwords * 64)
    if 0 <= target_rank < maxpiv:
        maxpiv = target_rank
    cwords = nwords
    pwords = (maxpiv + 63) // 64
    red = np.zeros((maxpiv, cwords), np.uint64)
    coef = np.zeros((maxpiv, pwords), np.uint64)
    lead = np.zeros(maxpiv, np.int64)
    cols = np.zeros(maxpiv, np.int64)
    npiv = 0
    cur = np.zeros(cwords, np.uint64)
    cco = np.zeros(pwords, np.uint64)
    processed = ncols
    for oi in range(ncols):
        c = order[oi]
        for w in range(cwords):
            cur[w] = colbits[c, w]
        for w in range(pwords):
            cco[w] = 0
        cco[npiv >> 6] = np.uint64(1) << np.uint64(npiv & 63)
        for k in range(npiv):
            lw, lb = lead[k] >> 6, lead[k] & 63
            if (cur[lw] >> np.uint64(lb)) & np.uint64(1):
                for w in range(cwords):
                    cur[w] ^= red[k, w]
                for w in range(pwords):
                    cco[w] ^= coef[k, w]
        l = -1
        for w in range(cwords):
            if cur[w]:
                b = 0
                word = cur[w]
                while not (word >> np.uint64(b)) & np.uint64(1):
                    b += 1
                l = 64 * w + b
                break
        if l < 0:
            continue
        for w in range(cwords):
            red[npiv, w] = cur[w]
        # The coefficient slot for this pivot was seeded before reduction, so
        # rewrite it to refer to position npiv among accepted pivots.
        for w in range(pwords):
            coef[npiv, w] = cco[w]
        lead[npiv] = l
        cols[npiv] = c
        npiv += 1
        if npiv == maxpiv:
            processed = oi + 1
            break
    return cols, red, lead, coef, npiv, processed


@njit(cache=True)
def _osd_eliminate_fast(colbits, colobs, order, nwords, target_rank):
    """Greedy full-rank column selection tracking only observable parity.

    Equivalent pivot choice to _osd_eliminate, but instead of coefficient
    masks each reduced column carries the XOR of the observable words of the
    original columns it combines, which is all the batch decoder needs.
    Columns of a memory-experiment model only touch detectors of nearby
    rounds, so reduced columns stay banded; per-pivot word windows
    [lead word, hiw] keep the reduction inside that band.
    """
    ncols = order.size
    maxpiv = min(ncols, nwords * 64)
    if 0 <= target_rank < maxpiv:
        maxpiv = target_rank
    red = np.zeros((maxpiv, nwords), np.uint64)
    redobs = np.zeros(maxpiv, np.uint64)
    lead = np.zeros(maxpiv, np.int64)
    hiw = np.zeros(maxpiv, np.int64)
    npiv = 0
    cur = np.zeros(nwords, np.uint64)
    for oi in range(ncols):
        c = order[oi]
        chi = 0
        clo = nwords
        for w in range(nwords):
            cur[w] = colbits[c, w]
            if cur[w]:
                chi = w
                if clo == nwords:
                    clo = w
        cobs = colobs[c]
        for k in range(npiv):
            lw = lead[k] >> 6
            if lw < clo or lw > chi:
                continue
            if (cur[lw] >> np.uint64(lead[k] & 63)) & np.uint64(1):
                h = hiw[k]
                for w in range(lw, h + 1):
                    cur[w] ^= red[k, w]
                if h > chi:
                    chi = h
                cobs ^= redobs[k]
        l = -1
        for w in range(nwords):
            if cur[w]:
                b = 0
                word = cur[w]
                while not (word >> np.uint64(b)) & np.uint64(1):
                    b += 1
                l = 64 * w + b
                break
        if l < 0:
            continue
        h = l >> 6
        for w in range(nwords):
            red[npiv, w] = cur[w]
            if cur[w]:
                h = w
        redobs[npiv] = cobs
        lead[npiv] = l
        hiw[npiv] = h
        npiv += 1
        if npiv == maxpiv:
            break
    return red, lead, hiw, redobs, npiv


@njit(cache=True)
def _osd_solve_fast(red, lead, hiw, redobs, npiv, target):
    """Forward-solve; returns (feasible, predicted observable word)."""
    y = target.copy()
    obs = np.uint64(0)
    for k in range(npiv):
        lw = lead[k] >> 6
        if (y[lw] >> np.uint64(lead[k] & 63)) & np.uint64(1):
            for w in range(lw, hiw[k] + 1):
                y[w] ^= red[k, w]
            obs ^= redobs[k]
    feasible = True
    for w in range(y.size):
        if y[w]:
            feasible = False
            break
    return feasible, obs


@njit(cache=True)
def _scan_insert(cur, cobs, red, lead, hiw, redobs, pivot_at, npiv, nwords):
    """Reduce cur against the pivot basis by ascending-bit scan and insert.

    pivot_at maps a detector bit to the pivot whose leading bit it is.  A
    pivot row is zero below its leading bit, so applying it never disturbs
    already-scanned positions.  Returns the new pivot count (unchanged when
    cur reduces to zero)."""
    one = np.uint64(1)
    leadbit = -1
    for w in range(nwords):
        word = cur[w]
        while word:
            lsb = word & (~word + one)
            b = 0
            while not (lsb >> np.uint64(b)) & one:
                b += 1
            k = pivot_at[64 * w + b]
            if k < 0:
                if leadbit < 0:
                    leadbit = 64 * w + b
                word &= word - one
            else:
                h = hiw[k]
                for ww in range(w, h + 1):
                    cur[ww] ^= red[k, ww]
                cobs ^= redobs[k]
                if b == 63:
                    word = np.uint64(0)
                else:
                    word = cur[w] & ~((one << np.uint64(b + 1)) - one)
    if leadbit < 0:
        return npiv
    h = leadbit >> 6
    for w in range(nwords):
        red[npiv, w] = cur[w]
        if cur[w]:
            h = w
    redobs[npiv] = cobs
    lead[npiv] = leadbit
    hiw[npiv] = h
    pivot_at[leadbit] = npiv
    return npiv + 1


@njit(cache=True)
def _scan_solve(target, red, hiw, redobs, pivot_at, nwords):
    """Forward-solve by ascending-bit scan; (feasible, observable word)."""
    one = np.uint64(1)
    obs = np.uint64(0)
    y = target.copy()
    feasible = True
    for w in range(nwords):
        word = y[w]
        while word:
            lsb = word & (~word + one)
            b = 0
            while not (lsb >> np.uint64(b)) & one:
                b += 1
            k = pivot_at[64 * w + b]
            if k < 0:
                feasible = False
                word &= word - one
            else:
                h = hiw[k]
                for ww in range(w, h + 1):
                    y[ww] ^= red[k, ww]
                obs ^= redobs[k]
                if b == 63:
                    word = np.uint64(0)
                else:
                    word = y[w] & ~((one << np.uint64(b + 1)) - one)
    return feasible, obs


@njit(parallel=True, cache=True)
def _bp_osd_batch_hybrid(llr0, cptr, cvars, syndromes, iters, scale, obs_mask,
                         colbits, nwords, target_rank, base_red, base_hiw,
                         base_obs):
    """OSD-0 with a shared prior-order echelon basis.

    Per failed shot only the most-suspect columns (by BP posterior) are
    eliminated from scratch; the basis is then completed from the
    precomputed echelon rows of the prior-ordered matrix.  This equals
    OSD-0 with suspects promoted ahead of the prior ordering: each echelon
    row is a combination of prior-order pivot columns, so the pivot span,
    the solution and its observable parity are identical."""
    shots = syndromes.shape[0]
    conv = np.zeros(shots, np.uint8)
    infeasible = np.zeros(shots, np.uint8)
    pred = np.zeros(shots, np.uint64)
    nbase = base_red.shape[0]
    for i in prange(shots):
        total, hard, ok = _bp_run(llr0, cptr, cvars, syndromes[i], iters,
                                  scale)
        acc = np.uint64(0)
        if ok:
            conv[i] = 1
            for v in range(hard.size):
                if hard[v]:
                    acc ^= obs_mask[v]
        else:
            neg = np.empty(total.size)
            for v in range(total.size):
                t = total[v]
                if t > CLIP:
                    t = CLIP
                elif t < -CLIP:
                    t = -CLIP
                neg[v] = -1.0 / (1.0 + np.exp(t))
            order = np.argsort(neg, kind="mergesort")
            srow = syndromes[i]
            fired = 0
            for d in range(srow.size):
                fired += srow[d]
            m = 4 * fired + 64
            if m > 2048:
                m = 2048
            if m > order.size:
                m = order.size
            red = np.zeros((target_rank, nwords), np.uint64)
            redobs = np.zeros(target_rank, np.uint64)
            lead = np.zeros(target_rank, np.int64)
            hiw = np.zeros(target_rank, np.int64)
            pivot_at = np.full(nwords * 64, -1, np.int64)
            npiv = 0
            cur = np.empty(nwords, np.uint64)
            for j in range(m):
                c = order[j]
                for w in range(nwords):
                    cur[w] = colbits[c, w]
                npiv = _scan_insert(cur, obs_mask[c], red, lead, hiw, redobs,
                                    pivot_at, npiv, nwords)
                if npiv == target_rank:
                    break
            if npiv < target_rank:
                for r in range(nbase):
                    for w in range(nwords):
                        cur[w] = base_red[r, w] if w <= base_hiw[r] \
                            else np.uint64(0)
                    npiv = _scan_insert(cur, base_obs[r], red, lead, hiw,
                                        redobs, pivot_at, npiv, nwords)
                    if npiv == target_rank:
                        break
            target = np.zeros(nwords, np.uint64)
            for d in range(srow.size):
                if srow[d]:
                    target[d >> 6] |= np.uint64(1) << np.uint64(d & 63)
            feasible, acc = _scan_solve(target, red, hiw, redobs, pivot_at,
                                        nwords)
            if not feasible:
                infeasible[i] = 1
                acc = np.uint64(0)
        pred[i] = acc
    return conv, pred, infeasible


@njit(parallel=True, cache=True)
def _bp_osd_batch_fast(llr0, cptr, cvars, syndromes, iters, scale, obs_mask,
                       colbits, nwords, target_rank):
    """Plain OSD-0 batch path: observable-parity elimination, no sweeps."""
    shots = syndromes.shape[0]
    conv = np.zeros(shots, np.uint8)
    infeasible = np.zeros(shots, np.uint8)
    pred = np.zeros(shots, np.uint64)
    for i in prange(shots):
        total, hard, ok = _bp_run(llr0, cptr, cvars, syndromes[i], iters,
                                  scale)
        acc = np.uint64(0)
        if ok:
            conv[i] = 1
            for v in range(hard.size):
                if hard[v]:
                    acc ^= obs_mask[v]
        else:
            neg = np.empty(total.size)
            for v in range(total.size):
                t = total[v]
                if t > CLIP:
                    t = CLIP
                elif t < -CLIP:
                    t = -CLIP
                neg[v] = -1.0 / (1.0 + np.exp(t))
            order = np.argsort(neg, kind="mergesort")
            red, lead, hiw, redobs, npiv = _osd_eliminate_fast(
                colbits, obs_mask, order, nwords, target_rank)
            target = np.zeros(nwords, np.uint64)
            srow = syndromes[i]
            for d in range(srow.size):
                if srow[d]:
                    target[d >> 6] |= np.uint64(1) << np.uint64(d & 63)
            feasible, acc = _osd_solve_fast(red, lead, hiw, redobs, npiv,
                                            target)
            if not feasible:
                infeasible[i] = 1
                acc = np.uint64(0)
        pred[i] = acc
    return conv, pred, infeasible


@njit(cache=True)
def _mask_weight(x, pwords):
    total = 0
    for w in range(pwords):
        word = x[w]
        while word:
            word &= word - np.uint64(1)
            total += 1
    return total


@njit(parallel=True, cache=True)
def _bp_osd_batch(llr0, cptr, cvars, syndromes, iters, scale, obs_mask,
                  colbits, nwords, target_rank, cs):
    """BP per shot; ordered-statistics decoding on the shots BP cannot
    satisfy.  With cs > 0 a combination sweep additionally tries flipping
    the cs most-suspect non-pivot columns singly and in pairs, keeping the
    lowest-Hamming-weight solution.  Returns packed observable predictions
    and a convergence flag per shot."""
    shots = syndromes.shape[0]
    ncols = colbits.shape[0]
    conv = np.zeros(shots, np.uint8)
    infeasible = np.zeros(shots, np.uint8)
    pred = np.zeros(shots, np.uint64)
    pwords = (target_rank + 63) // 64
    for i in prange(shots):
        total, hard, ok = _bp_run(llr0, cptr, cvars, syndromes[i], iters, scale)
        acc = np.uint64(0)
        if ok:
            conv[i] = 1
            for v in range(hard.size):
                if hard[v]:
                    acc ^= obs_mask[v]
        else:
            neg = np.empty(total.size)
            for v in range(total.size):
                t = total[v]
                if t > CLIP:
                    t = CLIP
                elif t < -CLIP:
                    t = -CLIP
                neg[v] = -1.0 / (1.0 + np.exp(t))
            order = np.argsort(neg, kind="mergesort")
            cols, red, lead, coef, npiv, processed = _osd_eliminate(
                colbits, order, nwords, target_rank)
            target = np.zeros(nwords, np.uint64)
            srow = syndromes[i]
            for d in range(srow.size):
                if srow[d]:
                    target[d >> 6] |= np.uint64(1) << np.uint64(d & 63)
            feasible, x = _osd_solve(red, lead, coef, npiv, target, pwords)
            if not feasible:
                infeasible[i] = 1
                pred[i] = acc
                continue
            best_x = x
            best_w = _mask_weight(x, pwords)
            best_f1 = -1
            best_f2 = -1
            if cs > 0:
                # Most-suspect non-pivot columns, in reliability order.
                npl = np.empty(cs, np.int64)
                nnp = 0
                ispiv = np.zeros(ncols, np.uint8)
                for k in range(npiv):
                    ispiv[cols[k]] = 1
                for oi in range(ncols):
                    c = order[oi]
                    if oi >= processed or not ispiv[c]:
                        npl[nnp] = c
                        nnp += 1
                        if nnp == cs:
                            break
                tgt = np.empty(nwords, np.uint64)
                for a in range(nnp):
                    ca = npl[a]
                    for w in range(nwords):
                        tgt[w] = target[w] ^ colbits[ca, w]
                    f1, x1 = _osd_solve(red, lead, coef, npiv, tgt, pwords)
                    if f1:
                        w1 = _mask_weight(x1, pwords) + 1
                        if w1 < best_w:
                            best_w = w1
                            best_x = x1
                            best_f1 = ca
                            best_f2 = -1
                    for b in range(a + 1, nnp):
                        cb = npl[b]
                        tgt2 = np.empty(nwords, np.uint64)
                        for w in range(nwords):
                            tgt2[w] = tgt[w] ^ colbits[cb, w]
                        f2, x2 = _osd_solve(red, lead, coef, npiv, tgt2,
                                            pwords)
                        if f2:
                            w2 = _mask_weight(x2, pwords) + 2
                            if w2 < best_w:
                                best_w = w2
                                best_x = x2
                                best_f1 = ca
                                best_f2 = cb
            for k in range(npiv):
                if (best_x[k >> 6] >> np.uint64(k & 63)) & np.uint64(1):
                    acc ^= obs_mask[cols[k]]
            if best_f1 >= 0:
                acc ^= obs_mask[best_f1]
            if best_f2 >= 0:
                acc ^= obs_mask[best_f2]
        pred[i] = acc
    return conv, pred, infeasible


@njit(cache=True)
def _osd_solve(red, lead, coef, npiv, target, pwords):
    """Forward-solve target through the triangular reduced pivots.

    Returns (feasible, coefficient mask over pivots)."""
    y = target.copy()
    x = np.zeros(pwords, np.uint64)
    for k in range(npiv):
        lw, lb = lead[k] >> 6, lead[k] & 63
        if (y[lw] >> np.uint64(lb)) & np.uint64(1):
            for w in range(y.size):
                y[w] ^= red[k, w]
            for w in range(pwords):
                x[w] ^= coef[k, w]
    feasible = True
    for w in range(y.size):
        if y[w]:
            feasible = False
    return feasible, x


def _pack_rows(dense: np.ndarray) -> np.ndarray:
    """Pack each row of a 0/1 array into uint64 words, LSB first."""
    bits = np.packbits(dense, axis=1, bitorder="little")
    nwords = (dense.shape[1] + 63) // 64
    padded = np.zeros((dense.shape[0], 8 * nwords), np.uint8)
    padded[:, :bits.shape[1]] = bits
    return padded.view(np.uint64)


def _osd_order(soft: np.ndarray) -> np.ndarray:
    """Columns by descending flip probability, ties by ascending index."""
    return np.argsort(-np.asarray(soft), kind="stable")


def _expand(cols, npiv, xmask, ncols, extra=()):
    sup = [int(cols[k]) for k in range(npiv)
           if (int(xmask[k >> 6]) >> (k & 63)) & 1]
    return BitVector(ncols, tuple(sup) + tuple(extra))


class _Eliminated:
    """Cache of one OSD elimination for reuse across sweep candidates."""

    def __init__(self, colbits, soft, nwords, target_rank=-1):
        self.colbits = colbits
        self.nwords = nwords
        self.order = _osd_order(soft)
        (self.cols, self.red, self.lead, self.coef, self.npiv,
         processed) = _osd_eliminate(colbits, self.order, nwords, target_rank)
        maxpiv = min(len(self.order), nwords * 64)
        if 0 <= target_rank < maxpiv:
            maxpiv = target_rank
        self.pwords = (maxpiv + 63) // 64
        pivset = set(int(self.cols[k]) for k in range(self.npiv))
        self.nonpivot = [int(c) for c in self.order[:processed]
                         if int(c) not in pivset]
        self.nonpivot += [int(c) for c in self.order[processed:]]

    def solve(self, target, extra=()):
        feasible, x = _osd_solve(self.red, self.lead, self.coef, self.npiv,
                                 target, self.pwords)
        if not feasible:
            return None
        return _expand(self.cols, self.npiv, x, self.colbits.shape[0], extra)


def _pack_syndrome(s: BitVector, nwords: int) -> np.ndarray:
    dense = np.zeros((1, nwords * 64), np.uint8)
    dense[0, :s.length] = s.to_dense()
    return _pack_rows(dense)[0]


def _check_priors(priors, ncols):
    priors = np.asarray(priors, dtype=np.float64)
    if priors.size != ncols:
        raise ValueError("need one prior per column")
    if np.any(priors <= 0) or np.any(priors > 0.5):
        raise ValueError("priors must lie in (0, 0.5]")
    return priors


def _graph_arrays(H: BitMatrix):
    cptr = np.zeros(H.rows + 1, np.int64)
    for i, row in enumerate(H.row_supports):
        cptr[i + 1] = cptr[i] + len(row)
    cvars = np.array([v for row in H.row_supports for v in row], np.int64)
    return cptr, cvars


def bp_decode(H: BitMatrix, priors, s: BitVector, cfg: DecoderConfig = DecoderConfig()):
    """Min-sum BP; returns (soft flip probabilities, hard BitVector, converged)."""
    priors = _check_priors(priors, H.cols)
    llr0 = np.log((1 - priors) / priors)
    cptr, cvars = _graph_arrays(H)
    syndrome = s.to_dense()
    total, hard, converged = _bp_run(llr0, cptr, cvars, syndrome,
                                     cfg.max_iterations, cfg.min_sum_scale)
    soft = 1.0 / (1.0 + np.exp(np.clip(total, -CLIP, CLIP)))
    return soft, BitVector.from_dense(hard), bool(converged)


def osd0(H: BitMatrix, soft, s: BitVector) -> BitVector:
    nwords = (H.rows + 63) // 64
    elim = _Eliminated(_pack_rows(H.to_dense().T), soft, nwords)
    out = elim.solve(_pack_syndrome(s, nwords))
    if out is None:
        raise ValueError("syndrome outside the column space")
    return out


def osd_w(H: BitMatrix, soft, s: BitVector,
          cfg: DecoderConfig = DecoderConfig()) -> BitVector:
    nwords = (H.rows + 63) // 64
    colbits = _pack_rows(H.to_dense().T)
    elim = _Eliminated(colbits, soft, nwords)
    target = _pack_syndrome(s, nwords)
    best = elim.solve(target)
    if best is None:
        raise ValueError("syndrome outside the column space")
    sweep = elim.nonpivot[:cfg.osd_sweep_depth]
    candidates = [(c,) for c in sweep]
    candidates += [(a, b) for i, a in enumerate(sweep) for b in sweep[i + 1:]]
    for flip in candidates:
        t = target.copy()
        for c in flip:
            t ^= colbits[c]
        cand = elim.solve(t, extra=flip)
        if cand is not None and cand.weight < best.weight:
            best = cand
    return best


def _dem_arrays(dem: DetectorErrorModel):
    m = len(dem.mechanisms)
    priors = np.array([p for p, _, _ in dem.mechanisms])
    rows = [[] for _ in range(dem.detector_count)]
    for j, (_, dets, _) in enumerate(dem.mechanisms):
        for d in dets:
            rows[d].append(j)
    H = BitMatrix(dem.detector_count, m, tuple(tuple(r) for r in rows))
    obs_mask = np.zeros(m, np.uint64)
    for j, (_, _, obss) in enumerate(dem.mechanisms):
        for o in obss:
            obs_mask[j] ^= np.uint64(1) << np.uint64(o)
    return H, priors, obs_mask


class Decoder:
    """BP+OSD decoder bound to one detector error model."""

    def __init__(self, dem: DetectorErrorModel, cfg: DecoderConfig = DecoderConfig()):
        if dem.observable_count > 64:
            raise ValueError("at most 64 observables supported")
        self.dem = dem
        self.cfg = cfg
        self.H, self.priors, self.obs_mask = _dem_arrays(dem)
        _check_priors(self.priors, self.H.cols)
        self.llr0 = np.log((1 - self.priors) / self.priors)
        self.cptr, self.cvars = _graph_arrays(self.H)
        self.nwords = (self.H.rows + 63) // 64
        self.colbits = _pack_rows(self.H.to_dense().T)
        prior_order = np.argsort(self.llr0, kind="stable")
        red, _, hiw, redobs, npiv = _osd_eliminate_fast(
            self.colbits, self.obs_mask, prior_order, self.nwords, -1)
        self.rank = int(npiv)
        # Echelon basis of the prior-ordered matrix, shared across shots by
        # the hybrid batch path.
        self._base_red = np.ascontiguousarray(red[:npiv])
        self._base_hiw = hiw[:npiv].copy()
        self._base_obs = redobs[:npiv].copy()

    def _observables_of(self, correction: BitVector) -> BitVector:
        acc = 0
        for v in correction.support:
            acc ^= int(self.obs_mask[v])
        return BitVector(self.dem.observable_count,
                         tuple(o for o in range(self.dem.observable_count)
                               if (acc >> o) & 1))

    def decode(self, detectors: BitVector) -> DecodeResult:
        syndrome = detectors.to_dense()
        total, hard, converged = _bp_run(self.llr0, self.cptr, self.cvars,
                                         syndrome, self.cfg.max_iterations,
                                         self.cfg.min_sum_scale)
        soft = 1.0 / (1.0 + np.exp(np.clip(total, -CLIP, CLIP)))
        if converged:
            correction = BitVector.from_dense(hard)
        elif self.cfg.osd_order > 0:
            correction = osd_w(self.H, soft, detectors, self.cfg)
        else:
            elim = _Eliminated(self.colbits, soft, self.nwords, self.rank)
            correction = elim.solve(_pack_syndrome(detectors, self.nwords))
            if correction is None:
                raise ValueError("syndrome outside the column space")
        return DecodeResult(correction=correction, converged=bool(converged),
                            predicted_observables=self._observables_of(correction),
                            soft_outputs=soft)

    def decode_batch(self, detector_rows: np.ndarray) -> np.ndarray:
        """Predicted observable bits, one row per shot of a (shots, D) array."""
        syndromes = np.ascontiguousarray(detector_rows, dtype=np.uint8)
        if self.cfg.osd_order > 0:
            conv, pred = _bp_batch(self.llr0, self.cptr, self.cvars, syndromes,
                                   self.cfg.max_iterations,
                                   self.cfg.min_sum_scale, self.obs_mask)
            out = np.zeros((syndromes.shape[0], self.dem.observable_count),
                           np.uint8)
            for o in range(self.dem.observable_count):
                out[:, o] = (pred >> np.uint64(o)).astype(np.uint8) & 1
            for i in np.flatnonzero(conv == 0):
                res = self.decode(BitVector.from_dense(syndromes[i]))
                out[i] = res.predicted_observables.to_dense()
            return out
        if self.cfg.cs_order == 0:
            conv, pred, infeasible = _bp_osd_batch_hybrid(
                self.llr0, self.cptr, self.cvars, syndromes,
                self.cfg.max_iterations, self.cfg.min_sum_scale,
                self.obs_mask, self.colbits, self.nwords, self.rank,
                self._base_red, self._base_hiw, self._base_obs)
        else:
            conv, pred, infeasible = _bp_osd_batch(
                self.llr0, self.cptr, self.cvars, syndromes,
                self.cfg.max_iterations, self.cfg.min_sum_scale,
                self.obs_mask, self.colbits, self.nwords, self.rank,
                self.cfg.cs_order)
        if infeasible.any():
            raise ValueError("syndrome outside the column space")
        out = np.zeros((syndromes.shape[0], self.dem.observable_count), np.uint8)
        for o in range(self.dem.observable_count):
            out[:, o] = (pred >> np.uint64(o)).astype(np.uint8) & 1
        return out


def decode_shot(dem: DetectorErrorModel, detectors: BitVector,
                cfg: DecoderConfig = DecoderConfig()) -> DecodeResult:
    return Decoder(dem, cfg).decode(detectors)
