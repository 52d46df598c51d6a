"""Order-2 building blocks: SVD with deterministic signs, truncations,
pseudo-inverse, CUR sampling, Kronecker-family products, ball volumes.

Every decomposition engine in this package reduces to the routines here.
``svd`` fixes the usual sign ambiguity (largest-magnitude entry of each
left singular vector made nonnegative) so that goldens are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dense import DenseTensor, as_tensor

__all__ = [
    "SVDResult",
    "RANK_CUTOFF",
    "svd",
    "truncated_svd",
    "svd_to_tolerance",
    "pseudo_inverse",
    "kronecker",
    "khatri_rao",
    "tracy_singh",
    "cp_product",
    "cur",
    "greedy_cur_pivots",
    "ball_volume",
]

# relative cutoff sigma <= RANK_CUTOFF * sigma_1 below which a singular
# value is treated as zero; single global knob, overridable per call
RANK_CUTOFF = 1e-12


def _as_matrix(M) -> np.ndarray:
    arr = as_tensor(M).data
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got order {arr.ndim}")
    return arr


@dataclass
class SVDResult:
    """Thin SVD ``M = U diag(s) V^T`` with orthonormal columns in U and V.

    ``singular_values`` is nonincreasing; ``k = len(singular_values)`` is
    ``min(m, n)`` for a full thin SVD or the truncation rank.
    """

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.singular_values)

    @property
    def nuclear_norm(self) -> float:
        return float(np.sum(self.singular_values))

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T

    def truncate(self, r: int) -> "SVDResult":
        if not 1 <= r <= self.rank:
            raise ValueError(f"rank {r} out of range 1..{self.rank}")
        return SVDResult(self.U[:, :r].copy(),
                         self.singular_values[:r].copy(),
                         self.V[:, :r].copy())

    def tail_energy(self, r: int) -> float:
        """Squared reconstruction error of the rank-``r`` truncation."""
        return float(np.sum(self.singular_values[r:] ** 2))


def svd(M) -> SVDResult:
    """Full thin SVD with the deterministic sign convention.

    The largest-magnitude entry of every left singular vector is forced
    nonnegative (the right vector flips along).  A zero matrix yields
    all-zero singular values with arbitrary orthonormal factors.
    """
    A = _as_matrix(M)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    V = Vt.T.copy()
    U = U.copy()
    for a in range(U.shape[1]):
        pivot = np.argmax(np.abs(U[:, a]))
        if U[pivot, a] < 0:
            U[:, a] = -U[:, a]
            V[:, a] = -V[:, a]
    return SVDResult(U, s, V)


def truncated_svd(M, r: int) -> SVDResult:
    """Leading-``r`` part of the SVD (the best rank-``r`` approximation)."""
    full = svd(M)
    return full.truncate(r)


def svd_to_tolerance(M, rel_tol: float) -> SVDResult:
    """Smallest truncation whose tail satisfies
    ``sum(s[r:]**2) <= rel_tol**2 * sum(s**2)``.

    ``rel_tol = 0`` keeps the full rank.
    """
    if not 0 <= rel_tol < 1:
        raise ValueError(f"rel_tol must be in [0, 1), got {rel_tol}")
    full = svd(M)
    total = float(np.sum(full.singular_values ** 2))
    if total == 0.0 or rel_tol == 0.0:
        return full
    budget = rel_tol ** 2 * total
    tail = np.concatenate([np.cumsum(full.singular_values[::-1] ** 2)[::-1][1:], [0.0]])
    r = int(np.argmax(tail <= budget)) + 1
    return full.truncate(max(r, 1))


def pseudo_inverse(M, rank_cutoff: float = RANK_CUTOFF) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via the dyadic decomposition.

    Singular values below ``rank_cutoff * sigma_1`` are dropped.
    """
    res = svd(M)
    s = res.singular_values
    if len(s) == 0 or s[0] == 0.0:
        return np.zeros((res.V.shape[0], res.U.shape[0]))
    keep = s > rank_cutoff * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (res.V * inv) @ res.U.T


def kronecker(A, B) -> np.ndarray:
    """Blockwise Kronecker product: block ``(i, j)`` is ``a_ij * B``."""
    A, B = _as_matrix(A), _as_matrix(B)
    return np.kron(A, B)


def khatri_rao(A, B) -> np.ndarray:
    """Columnwise Kronecker product of two matrices with equal column counts."""
    A, B = _as_matrix(A), _as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"column counts differ: {A.shape[1]} vs {B.shape[1]}")
    m, r = A.shape
    p = B.shape[0]
    return (A[:, None, :] * B[None, :, :]).reshape(m * p, r)


def _check_blocks(splits: Sequence[int], size: int, what: str) -> list[int]:
    pts = [0] + [int(s) for s in splits] + [size]
    if any(pts[i] >= pts[i + 1] for i in range(len(pts) - 1)):
        raise ValueError(f"{what} split points {list(splits)} do not tile 0..{size}")
    return pts


def tracy_singh(A, B, a_row_splits: Sequence[int] = (), a_col_splits: Sequence[int] = (),
                b_row_splits: Sequence[int] = (), b_col_splits: Sequence[int] = ()) -> np.ndarray:
    """Blockwise Kronecker product of two partitioned matrices.

    Partitions are given as interior split points (empty = one block),
    so both matrices single-block reduces to :func:`kronecker`.  The
    arrangement iterates A's blocks on the outside and B's on the
    inside; the result is a row/column rearrangement of
    ``kronecker(A, B)`` with the same shape.
    """
    A, B = _as_matrix(A), _as_matrix(B)
    ar = _check_blocks(a_row_splits, A.shape[0], "A row")
    ac = _check_blocks(a_col_splits, A.shape[1], "A column")
    br = _check_blocks(b_row_splits, B.shape[0], "B row")
    bc = _check_blocks(b_col_splits, B.shape[1], "B column")
    row_blocks = []
    for i in range(len(ar) - 1):
        for k in range(len(br) - 1):
            col_blocks = []
            for j in range(len(ac) - 1):
                for l in range(len(bc) - 1):
                    Ablk = A[ar[i]:ar[i + 1], ac[j]:ac[j + 1]]
                    Bblk = B[br[k]:br[k + 1], bc[l]:bc[l + 1]]
                    col_blocks.append(np.kron(Ablk, Bblk))
            row_blocks.append(np.hstack(col_blocks))
    return np.vstack(row_blocks)


def cp_product(factors: Sequence, weights=None) -> DenseTensor:
    """Sum of rank-one terms from per-mode factor matrices.

    ``factors[mu]`` has shape ``(n_mu, r)``; term ``a`` is the tensor
    product of the ``a``-th columns, scaled by ``weights[a]`` (1 if
    absent).  For two factors this is ``X @ diag(w) @ Y.T``.
    """
    mats = [_as_matrix(X) for X in factors]
    r = mats[0].shape[1]
    if any(X.shape[1] != r for X in mats):
        raise ValueError("all factors must share the same column count")
    w = np.ones(r) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (r,):
        raise ValueError(f"need {r} weights, got shape {w.shape}")
    dims = tuple(X.shape[0] for X in mats)
    out = np.zeros(dims)
    for a in range(r):
        term = w[a] * mats[0][:, a]
        for X in mats[1:]:
            term = np.multiply.outer(term, X[:, a])
        out += term
    return DenseTensor(out)


def cur(A, rows: Sequence[int], cols: Sequence[int],
        rank_cutoff: float = RANK_CUTOFF) -> tuple[np.ndarray, np.ndarray]:
    """CUR approximation ``C @ inv(Ahat) @ R`` from sampled rows/columns.

    ``rows`` and ``cols`` are 1-based index sets of equal size ``r``.
    Returns the approximation together with the intersection block
    ``Ahat``.  Exact when ``rank(A) = r`` and ``Ahat`` is nonsingular; a
    numerically singular intersection raises.
    """
    A = _as_matrix(A)
    I = [int(i) - 1 for i in rows]
    J = [int(j) - 1 for j in cols]
    if len(I) != len(J):
        raise ValueError("need equally many rows and columns")
    if any(not 0 <= i < A.shape[0] for i in I) or any(not 0 <= j < A.shape[1] for j in J):
        raise ValueError("row/column index out of range (1-based)")
    Ahat = A[np.ix_(I, J)]
    s = np.linalg.svd(Ahat, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= rank_cutoff * s[0]:
        raise ValueError("intersection block is numerically singular")
    C = A[:, J]
    R = A[I, :]
    return C @ np.linalg.solve(Ahat, R), Ahat


def greedy_cur_pivots(A, r: int) -> tuple[list[int], list[int]]:
    """Greedy residual-based pivot proposal for :func:`cur` (1-based).

    Repeatedly picks the largest-magnitude entry of the residual and
    eliminates its cross.  A heuristic for near-maximal volume, not an
    optimality guarantee.
    """
    E = _as_matrix(A).copy()
    rows, cols = [], []
    for _ in range(r):
        i, j = np.unravel_index(np.argmax(np.abs(E)), E.shape)
        if E[i, j] == 0.0:
            raise ValueError("residual vanished before reaching the requested rank")
        rows.append(int(i) + 1)
        cols.append(int(j) + 1)
        E = E - np.outer(E[:, j], E[i, :]) / E[i, j]
    return rows, cols


def ball_volume(n: int, p, exact: bool = False):
    """Volume of the unit ball of the l^p norm in dimension ``n``.

    ``mu_n = 2**n * Gamma(1 + 1/p)**n / Gamma(1 + n/p)``; closed forms
    ``2**n / n!`` for ``p=1`` and ``2**n`` for ``p=inf``.  With
    ``exact=True`` those two cases return a :class:`fractions.Fraction`.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if p == 1:
        frac = Fraction(2 ** n, math.factorial(n))
        return frac if exact else float(frac)
    if p in (math.inf, np.inf) or p == "inf":
        if exact:
            return Fraction(2 ** n)
        return float(2 ** n)
    if p == 2:
        if exact:
            raise ValueError("exact volume is only available for p in {1, inf}")
        return 2.0 ** n * math.gamma(1.5) ** n / math.gamma(1 + n / 2)
    raise ValueError(f"unsupported norm order {p!r}; use 1, 2 or inf")
