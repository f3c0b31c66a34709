"""Classical circulant codes and their hypergraph products.

A check polynomial h(x) with 0/1 coefficients instantiates, at a given lift L,
the L x L circulant matrix whose row i has ones at columns (e + i) mod L for
every exponent e of h.  Open-boundary variants delete trailing rows.  The
hypergraph product of two parity-check matrices H1 (r1 x n1) and H2 (r2 x n2)
is the CSS code with

    G_X = (I_n1 (x) H2   |  H1^T (x) I_r2)        rows indexed by (i1, c2)
    G_Z = (H1 (x) I_n2   |  I_r1 (x) H2^T)        rows indexed by (c1, j2)

where the left block acts on the n1*n2 sector-1 qubits (bit x bit) and the
right block on the r1*r2 sector-2 qubits (check x check).  Sector-1 columns
come first throughout; qubit (a, b) of a sector maps to flat index a*width+b.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .gf2 import BitMatrix, BitVector, in_rowspace, kernel_basis, rank, solve


@dataclass(frozen=True)
class CheckPolynomial:
    """Polynomial over GF(2) given by the set of exponents with coefficient 1."""

    exponents: frozenset

    def __post_init__(self):
        exps = frozenset(int(e) for e in self.exponents)
        object.__setattr__(self, "exponents", exps)
        if not exps:
            raise ValueError("polynomial must have at least one term")
        if min(exps) < 0:
            raise ValueError("exponents must be nonnegative")

    @classmethod
    def from_coefficients(cls, coeffs) -> "CheckPolynomial":
        """Build from a low-to-high 0/1 coefficient list, e.g. [1,1,1] = 1+x+x^2."""
        return cls(frozenset(i for i, c in enumerate(coeffs) if int(c)))

    @property
    def degree(self) -> int:
        return max(self.exponents)


def circulant_from_polynomial(h: CheckPolynomial, lift: int) -> BitMatrix:
    """The lift x lift circulant parity-check matrix of h at the given lift."""
    if h.degree >= lift:
        raise ValueError("polynomial degree must be smaller than the lift")
    rows = tuple(tuple(sorted((e + i) % lift for e in h.exponents))
                 for i in range(lift))
    return BitMatrix(lift, lift, rows)


def open_boundary(H: BitMatrix, delete_rows: int) -> BitMatrix:
    """Remove the last delete_rows rows, turning a circulant code open-boundary."""
    if delete_rows >= H.rows:
        raise ValueError("cannot delete every row")
    return BitMatrix(H.rows - delete_rows, H.cols, H.row_supports[:H.rows - delete_rows])


@dataclass(frozen=True)
class CssCode:
    """A CSS code with per-qubit sector labels inherited from the product."""

    g_x: BitMatrix
    g_z: BitMatrix
    n: int
    sector_of: tuple
    n1: int
    n2: int
    r1: int
    r2: int
    boundary: str

    def __post_init__(self):
        if self.n != self.n1 * self.n2 + self.r1 * self.r2:
            raise ValueError("qubit count must equal n1*n2 + r1*r2")
        prod = self.g_x.matmul(self.g_z.transpose())
        if any(prod.row_supports):
            raise ValueError("g_x and g_z generators do not commute")

    @property
    def sector1_count(self) -> int:
        return self.n1 * self.n2

    def to_json(self) -> str:
        n, k = code_parameters(self)
        lay = layout(self)
        return json.dumps({
            "n": n,
            "k": k,
            "boundary": self.boundary,
            "n1": self.n1, "n2": self.n2, "r1": self.r1, "r2": self.r2,
            "g_x": [list(r) for r in self.g_x.row_supports],
            "g_z": [list(r) for r in self.g_z.row_supports],
            "sectors": list(self.sector_of),
            "coordinates": [list(lay.coordinate[q]) for q in range(n)],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "CssCode":
        d = json.loads(text)
        n1, n2, r1, r2 = d["n1"], d["n2"], d["r1"], d["r2"]
        n = d["n"]
        return cls(
            g_x=BitMatrix(len(d["g_x"]), n, tuple(tuple(r) for r in d["g_x"])),
            g_z=BitMatrix(len(d["g_z"]), n, tuple(tuple(r) for r in d["g_z"])),
            n=n, sector_of=tuple(d["sectors"]),
            n1=n1, n2=n2, r1=r1, r2=r2, boundary=d["boundary"])


def _kron_supports(A: BitMatrix, B: BitMatrix):
    """Row supports of the Kronecker product A (x) B."""
    out = []
    for ra in A.row_supports:
        for rb in B.row_supports:
            out.append(tuple(a * B.cols + b for a in ra for b in rb))
    return out


def hypergraph_product(H1: BitMatrix, H2: BitMatrix,
                       boundary: str = "periodic") -> CssCode:
    """CSS code from the product of two classical parity-check matrices."""
    r1, n1 = H1.rows, H1.cols
    r2, n2 = H2.rows, H2.cols
    s1 = n1 * n2
    n = s1 + r1 * r2
    I_n1, I_n2 = BitMatrix.identity(n1), BitMatrix.identity(n2)
    I_r1, I_r2 = BitMatrix.identity(r1), BitMatrix.identity(r2)

    gx_left = _kron_supports(I_n1, H2)
    gx_right = _kron_supports(H1.transpose(), I_r2)
    gx = tuple(tuple(sorted(l + tuple(j + s1 for j in r)))
               for l, r in zip(gx_left, gx_right))

    gz_left = _kron_supports(H1, I_n2)
    gz_right = _kron_supports(I_r1, H2.transpose())
    gz = tuple(tuple(sorted(l + tuple(j + s1 for j in r)))
               for l, r in zip(gz_left, gz_right))

    return CssCode(
        g_x=BitMatrix(n1 * r2, n, gx),
        g_z=BitMatrix(r1 * n2, n, gz),
        n=n,
        sector_of=tuple([1] * s1 + [2] * (r1 * r2)),
        n1=n1, n2=n2, r1=r1, r2=r2, boundary=boundary)


def code_parameters(code: CssCode):
    """(n, k) with k = n - rank(G_X) - rank(G_Z)."""
    return code.n, code.n - rank(code.g_x) - rank(code.g_z)


def _min_weight_logical(stab_same: BitMatrix, stab_opp: BitMatrix, w_max: int):
    """Smallest weight of a vector in ker(stab_opp) \\ rowspace(stab_same).

    Exhaustive colexicographic sweep; returns None when no logical of weight
    <= w_max exists.  Column syndromes are packed into Python ints so the
    inner loop is a few XORs per candidate support.
    """
    n = stab_opp.cols
    cols = stab_opp.transpose().row_supports
    syn = [sum(1 << r for r in col) for col in cols]
    for w in range(1, w_max + 1):
        for combo in itertools.combinations(range(n), w):
            s = 0
            for c in combo:
                s ^= syn[c]
            if s:
                continue
            v = BitVector(n, combo)
            if not in_rowspace(stab_same, v):
                return w
    return None


def compute_distance(code: CssCode, w_max: int):
    """Exhaustive minimum distance up to w_max.

    Returns {"exact": d} when a logical of weight d <= w_max exists (both X
    and Z logicals considered), else {"lower_bound": w_max + 1}.
    """
    if w_max < 1:
        raise ValueError("w_max must be at least 1")
    dx = _min_weight_logical(code.g_x, code.g_z, w_max)
    # A Z logical cannot beat an already-found X logical at smaller weight.
    dz = _min_weight_logical(code.g_z, code.g_x, dx if dx is not None else w_max)
    found = [d for d in (dx, dz) if d is not None]
    if found:
        return {"exact": min(found)}
    return {"lower_bound": w_max + 1}


def _inverse_gf2(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    aug = np.concatenate([A.astype(np.uint8) & 1, np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i, col])
        aug[[col, piv]] = aug[[piv, col]]
        for i in range(n):
            if i != col and aug[i, col]:
                aug[i] ^= aug[col]
    return aug[:, n:]


@dataclass(frozen=True)
class LogicalBasis:
    """Paired logical operators: row i of logical_x anticommutes only with
    row i of logical_z."""

    logical_x: BitMatrix
    logical_z: BitMatrix


def _quotient_basis(kernel: BitMatrix, stab: BitMatrix, k: int) -> BitMatrix:
    """k kernel rows independent of the stabilizer rowspace, chosen greedily."""
    picked = []
    current = stab
    base_rank = rank(stab)
    for i in range(kernel.rows):
        cand = current.stack(BitMatrix(1, kernel.cols, (kernel.row_supports[i],)))
        if rank(cand) > base_rank + len(picked):
            picked.append(kernel.row_supports[i])
            current = cand
            if len(picked) == k:
                break
    return BitMatrix(len(picked), kernel.cols, tuple(picked))


def logical_operators(code: CssCode) -> LogicalBasis:
    """Symplectic-paired logical basis from kernel/rowspace computations."""
    n, k = code_parameters(code)
    if k == 0:
        raise ValueError("code has no logical qubits")
    lx = _quotient_basis(kernel_basis(code.g_z), code.g_x, k)
    lz = _quotient_basis(kernel_basis(code.g_x), code.g_z, k)
    # Adjust lz so the anticommutation pairing matrix becomes the identity.
    P = (lx.to_dense().astype(np.int64) @ lz.to_dense().T.astype(np.int64)) & 1
    A = _inverse_gf2(P).T
    lz = BitMatrix.from_dense((A.astype(np.int64) @ lz.to_dense().astype(np.int64)) & 1)
    return LogicalBasis(logical_x=lx, logical_z=lz)


def sector1_representative(code: CssCode, v: BitVector, pauli: str) -> BitVector:
    """Stabilizer-equivalent of v supported only on sector-1 qubits.

    pauli selects which stabilizers may be added: "X" logicals absorb rows of
    g_x, "Z" logicals rows of g_z.  Raises when no such representative exists.
    """
    stab = code.g_x if pauli == "X" else code.g_z
    s1 = code.sector1_count
    sub = BitMatrix(stab.rows, code.n - s1,
                    tuple(tuple(j - s1 for j in row if j >= s1)
                          for row in stab.row_supports))
    target = BitVector(code.n - s1, tuple(j - s1 for j in v.support if j >= s1))
    combo = solve(sub.transpose(), target)
    if combo is None:
        raise ValueError("no sector-1 supported representative")
    out = v
    for i in combo.support:
        out = out ^ stab.row(i)
    return out


@dataclass(frozen=True)
class Layout:
    """Interleaved 2D grid placement of an HGP code.

    Sector-1 qubit (i1, i2) sits at (2*i1, 2*i2); sector-2 qubit (c1, c2) at
    (2*c1 + 1, 2*c2 + 1).  Every stabilizer's support then lies in exactly
    one grid row plus one grid column.
    """

    grid_rows: int
    grid_cols: int
    coordinate: tuple
    x_stab_support: tuple
    z_stab_support: tuple


def layout(code: CssCode) -> Layout:
    coords = []
    for i1 in range(code.n1):
        for i2 in range(code.n2):
            coords.append((2 * i1, 2 * i2))
    for c1 in range(code.r1):
        for c2 in range(code.r2):
            coords.append((2 * c1 + 1, 2 * c2 + 1))
    grid_rows = max(r for r, _ in coords) + 1
    grid_cols = max(c for _, c in coords) + 1

    def stab_rowcol(supports):
        out = []
        for sup in supports:
            rows = {coords[q][0] for q in sup}
            cols = {coords[q][1] for q in sup}
            # A valid check touches one row and one column; everything in the
            # row shares its row index, everything else shares a column.
            best = None
            for r in rows:
                for c in cols:
                    if all(coords[q][0] == r or coords[q][1] == c for q in sup):
                        best = (r, c)
                        break
                if best:
                    break
            if best is None:
                raise ValueError("check support spans more than one row and column")
            out.append(best)
        return tuple(out)

    return Layout(
        grid_rows=grid_rows,
        grid_cols=grid_cols,
        coordinate=tuple(coords),
        x_stab_support=stab_rowcol(code.g_x.row_supports),
        z_stab_support=stab_rowcol(code.g_z.row_supports))


def build_code(poly_coeffs, lift: int, boundary: str = "periodic",
               delete_rows: int = 1) -> CssCode:
    """Convenience: circulant from coefficients, optional open boundary, self-product."""
    h = CheckPolynomial.from_coefficients(poly_coeffs)
    H = circulant_from_polynomial(h, lift)
    if boundary == "open":
        H = open_boundary(H, delete_rows)
    elif boundary != "periodic":
        raise ValueError("boundary must be 'periodic' or 'open'")
    return hypergraph_product(H, H, boundary=boundary)
