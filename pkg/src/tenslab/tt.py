"""Tensor-train format and its in-format arithmetic.

A TT representation stores one order-3 core per mode, with chain ranks
``1 = r_0, r_1, ..., r_{d-1}, r_d = 1``; every entry is the 1x1 matrix
product of the per-mode core slices.  This keeps storage linear in the
order and makes sums over indices (partition function, marginals) chains
of small matrix products, densifying nothing.

``tt_svd`` decomposes or approximates a dense tensor by a sweep of
truncated SVDs; ``tt_add`` / ``tt_hadamard`` combine trains without
leaving the format; ``tt_round`` recompresses a train whose ranks grew.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dense import DenseTensor, as_tensor, norm
from .linalg import svd as _svd
from .cp import CPDecomposition

__all__ = [
    "TTTensor",
    "TTQuality",
    "DEFAULT_DENSE_CAP",
    "dense_cap",
    "tt_svd",
    "tt_entry",
    "tt_reconstruct",
    "tt_add",
    "tt_hadamard",
    "tt_round",
    "tt_partition",
    "tt_marginal",
    "cp_to_tt",
    "tt_to_cp",
    "additive_tt",
    "zeros_tt",
]

DEFAULT_DENSE_CAP = 10 ** 8
_DENSE_CAP_ENV = "TENSLAB_DENSE_CAP"


def dense_cap(override: int | None = None) -> int:
    """Densification guard: max entries a reconstruction may produce."""
    if override is not None:
        return int(override)
    return int(os.environ.get(_DENSE_CAP_ENV, DEFAULT_DENSE_CAP))


class TTTensor:
    """Chain of order-3 cores ``G_mu`` of shape ``(r_{mu-1}, n_mu, r_mu)``.

    Boundary ranks are 1, adjacent core ranks must match, and the entry
    at a (1-based) multi-index is the product of the selected slices:
    ``A[i] = G_1[:, i_1, :] @ ... @ G_d[:, i_d, :]``.
    """

    __slots__ = ("cores",)

    def __init__(self, cores: Sequence[np.ndarray]):
        cs = [np.ascontiguousarray(G, dtype=np.float64) for G in cores]
        if not cs:
            raise ValueError("a tensor train needs at least one core")
        for mu, G in enumerate(cs, start=1):
            if G.ndim != 3:
                raise ValueError(f"core {mu} has order {G.ndim}, expected 3")
        if cs[0].shape[0] != 1 or cs[-1].shape[2] != 1:
            raise ValueError("boundary ranks must be 1")
        for mu in range(len(cs) - 1):
            if cs[mu].shape[2] != cs[mu + 1].shape[0]:
                raise ValueError(
                    f"rank mismatch between cores {mu + 1} and {mu + 2}: "
                    f"{cs[mu].shape[2]} vs {cs[mu + 1].shape[0]}")
        self.cores = cs

    @property
    def order(self) -> int:
        return len(self.cores)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(G.shape[1] for G in self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        """Interior chain ranks ``(r_1, ..., r_{d-1})``."""
        return tuple(G.shape[2] for G in self.cores[:-1])

    @property
    def full_ranks(self) -> tuple[int, ...]:
        """All chain ranks including the boundary 1s."""
        return (1,) + self.ranks + (1,) if self.order > 1 else (1, 1)

    def entry(self, index: Sequence[int]) -> float:
        return tt_entry(self, index)

    def to_dense(self, cap: int | None = None) -> DenseTensor:
        return tt_reconstruct(self, cap)

    def __add__(self, other):
        return tt_add(self, other)

    def __repr__(self):
        shape = "x".join(str(n) for n in self.dims)
        return f"TTTensor({shape}, ranks={self.ranks})"


@dataclass
class TTQuality:
    """Per-SVD bookkeeping of a TT-SVD run.

    ``step_qualities[mu]`` is the energy fraction the ``mu``-th SVD
    retained of the matrix it saw; ``step_tail_energies[mu]`` the
    squared energy it discarded.  ``input_energy`` (``||A||**2``) splits
    exactly into ``kept_energy`` plus the sum of the tails, and the
    reconstruction retains ``prod(step_qualities)`` of the input energy.
    """

    step_qualities: list[float]
    step_tail_energies: list[float]
    input_energy: float
    kept_energy: float

    @property
    def global_quality(self) -> float:
        return float(np.prod(self.step_qualities)) if self.step_qualities else 1.0


def _truncation_rank(s: np.ndarray, max_rank: int | None, abs_tail: float | None) -> int:
    """Smallest kept rank honoring a hard cap and/or an absolute l2 tail."""
    k = len(s)
    r = k
    if abs_tail is not None:
        tails = np.concatenate([np.cumsum(s[::-1] ** 2)[::-1][1:], [0.0]])
        r = int(np.argmax(tails <= abs_tail ** 2)) + 1
    if max_rank is not None:
        r = min(r, max_rank)
    return max(r, 1)


def tt_svd(A, ranks: Sequence[int] | None = None,
           rel_tol: float | None = None) -> tuple[TTTensor, TTQuality]:
    """Build a TT decomposition or approximation of a dense tensor.

    Walks the modes left to right: unfold the carried matrix with the
    next mode folded into the rows, SVD, keep ``U`` as the next core and
    carry ``S @ V.T`` forward.  Exactly one of

    * ``ranks``: hard per-step ranks ``(r_1, ..., r_{d-1})``,
    * ``rel_tol``: one relative tolerance; each SVD keeps an l2 tail of
      at most ``rel_tol * ||A|| / sqrt(d-1)``, so the total relative
      error is at most ``rel_tol``,

    may be given; with neither, the decomposition is exact.  Returns the
    train and the per-step quality accounting.
    """
    A = as_tensor(A)
    d = A.order
    dims = A.dims
    if ranks is not None and rel_tol is not None:
        raise ValueError("give target ranks or a tolerance, not both")
    if ranks is not None:
        ranks = [int(r) for r in ranks]
        if len(ranks) != d - 1:
            raise ValueError(f"need {d - 1} interior ranks, got {len(ranks)}")
        if any(r < 1 for r in ranks):
            raise ValueError("ranks must be >= 1")
    norm_a = norm(A)
    abs_tail = None
    if rel_tol is not None:
        if rel_tol < 0:
            raise ValueError("rel_tol must be >= 0")
        abs_tail = rel_tol * norm_a / math.sqrt(max(d - 1, 1))

    if d == 1:
        core = A.data.reshape(1, dims[0], 1)
        quality = TTQuality([], [], norm_a ** 2, norm_a ** 2)
        return TTTensor([core]), quality

    cores: list[np.ndarray] = []
    qualities: list[float] = []
    tails: list[float] = []
    W = A.data.reshape(dims[0], -1)
    r_prev = 1
    for mu in range(d - 1):
        n_mu = dims[mu]
        W = W.reshape(r_prev * n_mu, -1)
        res = _svd(W)
        energy_before = float(np.sum(res.singular_values ** 2))
        r = _truncation_rank(res.singular_values,
                             ranks[mu] if ranks is not None else None,
                             abs_tail)
        kept = res.truncate(r)
        tail = res.tail_energy(r)
        cores.append(kept.U.reshape(r_prev, n_mu, r))
        W = (kept.singular_values[:, None] * kept.V.T)
        qualities.append(1.0 if energy_before == 0.0 else
                         float(np.sum(kept.singular_values ** 2)) / energy_before)
        tails.append(tail)
        r_prev = r
    cores.append(W.reshape(r_prev, dims[-1], 1))
    kept_energy = float(np.sum(W ** 2))
    quality = TTQuality(qualities, tails, norm_a ** 2, kept_energy)
    return TTTensor(cores), quality


def tt_entry(T: TTTensor, index: Sequence[int]) -> float:
    """Entry at a 1-based multi-index: the chain product of core slices."""
    idx = [int(i) for i in index]
    if len(idx) != T.order:
        raise ValueError(f"multi-index of length {len(idx)} for order {T.order}")
    for i, n in zip(idx, T.dims):
        if not 1 <= i <= n:
            raise ValueError(f"index {idx} out of range for dims {T.dims} (1-based)")
    row = T.cores[0][:, idx[0] - 1, :]
    for G, i in zip(T.cores[1:], idx[1:]):
        row = row @ G[:, i - 1, :]
    return float(row[0, 0])


def tt_reconstruct(T: TTTensor, cap: int | None = None) -> DenseTensor:
    """Densify the train by the reverse cascade of its construction."""
    total = math.prod(T.dims)
    limit = dense_cap(cap)
    if total > limit:
        raise ValueError(
            f"refusing to densify {total} entries (cap {limit}); "
            f"raise the cap explicitly to override")
    out = T.cores[0].reshape(T.dims[0], -1)          # (n_1, r_1)
    for G in T.cores[1:]:
        r_prev, n, r = G.shape
        out = out @ G.reshape(r_prev, n * r)
        out = out.reshape(-1, r)
    return DenseTensor(out.reshape(T.dims))


def _check_same_dims(T: TTTensor, S: TTTensor) -> None:
    if T.dims != S.dims:
        raise ValueError(f"dims differ: {T.dims} vs {S.dims}")


def tt_add(T: TTTensor, S: TTTensor) -> TTTensor:
    """Sum of two trains without densifying: ranks add.

    Boundary cores concatenate along the free rank; interior core
    slices stack block-diagonally.
    """
    _check_same_dims(T, S)
    if T.order == 1:
        return TTTensor([T.cores[0] + S.cores[0]])
    cores = []
    for mu, (G, H) in enumerate(zip(T.cores, S.cores)):
        rl1, n, rr1 = G.shape
        rl2, _, rr2 = H.shape
        if mu == 0:
            C = np.concatenate([G, H], axis=2)
        elif mu == T.order - 1:
            C = np.concatenate([G, H], axis=0)
        else:
            C = np.zeros((rl1 + rl2, n, rr1 + rr2))
            C[:rl1, :, :rr1] = G
            C[rl1:, :, rr1:] = H
        cores.append(C)
    return TTTensor(cores)


def tt_hadamard(T: TTTensor, S: TTTensor) -> TTTensor:
    """Entrywise product of two trains without densifying: ranks multiply.

    Every core slice is the Kronecker product of the operands' slices
    (columnwise Khatri-Rao at the boundaries).
    """
    _check_same_dims(T, S)
    cores = []
    for G, H in zip(T.cores, S.cores):
        rl1, n, rr1 = G.shape
        rl2, _, rr2 = H.shape
        C = np.einsum("aib,cid->acibd", G, H).reshape(rl1 * rl2, n, rr1 * rr2)
        cores.append(C)
    return TTTensor(cores)


def tt_round(T: TTTensor, ranks: Sequence[int] | None = None,
             rel_tol: float | None = None) -> TTTensor:
    """Recompress a train to lower ranks without densifying.

    Two sweeps: right-to-left orthogonalization (LQ on the unfolded
    cores), then a left-to-right truncated-SVD sweep to the targets.
    Rounding a train back to (at least) its true ranks preserves the
    entries up to roundoff.
    """
    if ranks is not None and rel_tol is not None:
        raise ValueError("give target ranks or a tolerance, not both")
    d = T.order
    if d == 1:
        return TTTensor([G.copy() for G in T.cores])
    if ranks is not None:
        ranks = [int(r) for r in ranks]
        if len(ranks) != d - 1:
            raise ValueError(f"need {d - 1} interior ranks, got {len(ranks)}")
        if any(r < 1 for r in ranks):
            raise ValueError("ranks must be >= 1")

    cores = [G.copy() for G in T.cores]
    # right-to-left: make every core but the first row-orthogonal
    for mu in range(d - 1, 0, -1):
        r_prev, n, r = cores[mu].shape
        M = cores[mu].reshape(r_prev, n * r)
        Q, R = np.linalg.qr(M.T)              # M = R.T @ Q.T, Q.T has orthonormal rows
        rho = Q.shape[1]
        cores[mu] = Q.T.reshape(rho, n, r)
        cores[mu - 1] = np.tensordot(cores[mu - 1], R.T, axes=(2, 0))

    norm_t = float(np.linalg.norm(cores[0]))  # all later cores are orthogonal now
    abs_tail = None
    if rel_tol is not None:
        if rel_tol < 0:
            raise ValueError("rel_tol must be >= 0")
        abs_tail = rel_tol * norm_t / math.sqrt(d - 1)

    # left-to-right: truncate
    for mu in range(d - 1):
        r_prev, n, r = cores[mu].shape
        M = cores[mu].reshape(r_prev * n, r)
        res = _svd(M)
        k = _truncation_rank(res.singular_values,
                             ranks[mu] if ranks is not None else None,
                             abs_tail)
        k = min(k, res.rank)
        kept = res.truncate(k)
        cores[mu] = kept.U.reshape(r_prev, n, k)
        carry = kept.singular_values[:, None] * kept.V.T
        cores[mu + 1] = np.tensordot(carry, cores[mu + 1], axes=(1, 0))
    return TTTensor(cores)


def tt_partition(T: TTTensor) -> float:
    """Sum of all entries as a chain of summed-core matrix products."""
    row = np.sum(T.cores[0], axis=1)
    for G in T.cores[1:]:
        row = row @ np.sum(G, axis=1)
    return float(row[0, 0])


def tt_marginal(T: TTTensor, mode: int) -> DenseTensor:
    """Sum over every mode but ``mode`` (1-based), without densifying.

    Entry ``i`` is ``(left partial product) @ G_mode[:, i, :] @ (right
    partial product)`` where the partial products chain the summed
    cores on each side.
    """
    mu = int(mode)
    if not 1 <= mu <= T.order:
        raise ValueError(f"mode {mu} out of range for order {T.order}")
    left = np.ones((1, 1))
    for G in T.cores[:mu - 1]:
        left = left @ np.sum(G, axis=1)
    right = np.ones((1, 1))
    for G in reversed(T.cores[mu:]):
        right = np.sum(G, axis=1) @ right
    G = T.cores[mu - 1]
    out = np.array([(left @ G[:, i, :] @ right).item() for i in range(G.shape[1])])
    return DenseTensor(out)


def cp_to_tt(cp: CPDecomposition) -> TTTensor:
    """Exact TT representation of a CP model with all chain ranks ``r``.

    Interior core slices are diagonal in the term index; the first core
    carries the weights.
    """
    d = cp.order
    r = cp.rank
    if d == 1:
        vec = cp.factors[0] @ cp.weights
        return TTTensor([vec.reshape(1, -1, 1)])
    cores = [(cp.factors[0] * cp.weights)[None, :, :]]    # (1, n_1, r)
    for mu in range(1, d - 1):
        X = cp.factors[mu]
        n = X.shape[0]
        C = np.zeros((r, n, r))
        for a in range(r):
            C[a, :, a] = X[:, a]
        cores.append(C)
    cores.append(cp.factors[d - 1].T.reshape(r, cp.dims[d - 1], 1))
    return TTTensor(cores)


def tt_to_cp(T: TTTensor, max_terms: int = 100_000) -> CPDecomposition:
    """Expand a train into a CP model, one term per interior rank tuple.

    Produces at most ``prod(r_mu)`` terms (``r**(d-1)`` for uniform
    ranks); terms with an all-zero vector on some mode are dropped.
    Guarded by ``max_terms`` since the expansion is exponential in the
    order.

    When the interior core slices happen to be simultaneously
    diagonalizable a representation with only ``r`` terms exists, but
    detecting that robustly is numerically delicate, so this routine
    always takes the generic expansion.
    """
    d = T.order
    if d == 1:
        return CPDecomposition.from_factors([T.cores[0].reshape(-1, 1)])
    n_terms = math.prod(T.ranks)
    if n_terms > max_terms:
        raise ValueError(
            f"expansion would produce {n_terms} terms (cap {max_terms})")
    columns: list[list[np.ndarray]] = [[] for _ in range(d)]
    weights = []
    for combo in np.ndindex(*T.ranks):
        vecs = [T.cores[0][0, :, combo[0]]]
        for mu in range(1, d - 1):
            vecs.append(T.cores[mu][combo[mu - 1], :, combo[mu]])
        vecs.append(T.cores[d - 1][combo[d - 2], :, 0])
        if any(np.all(v == 0.0) for v in vecs):
            continue
        for mu, v in enumerate(vecs):
            columns[mu].append(v)
        weights.append(1.0)
    if not weights:
        factors = [np.zeros((n, 1)) for n in T.dims]
        return CPDecomposition.from_factors(factors, np.zeros(1))
    factors = [np.stack(cols, axis=1) for cols in columns]
    return CPDecomposition.from_factors(factors, np.asarray(weights))


def additive_tt(values_per_mode: Sequence[Sequence[float]]) -> TTTensor:
    """Rank-2 train of the additive tensor ``A[i] = sum_mu f_mu(i_mu)``.

    The boundary rows are ``(f_1(i), 1)`` and ``(1, f_d(i))^T``; interior
    slices are the unipotent matrices ``[[1, 0], [f_mu(i), 1]]``.
    """
    fs = [np.asarray(f, dtype=np.float64).reshape(-1) for f in values_per_mode]
    d = len(fs)
    if d < 2:
        raise ValueError("the additive construction needs at least two modes")
    cores = []
    first = np.zeros((1, len(fs[0]), 2))
    first[0, :, 0] = fs[0]
    first[0, :, 1] = 1.0
    cores.append(first)
    for f in fs[1:-1]:
        C = np.zeros((2, len(f), 2))
        C[0, :, 0] = 1.0
        C[1, :, 0] = f
        C[1, :, 1] = 1.0
        cores.append(C)
    last = np.zeros((2, len(fs[-1]), 1))
    last[0, :, 0] = 1.0
    last[1, :, 0] = fs[-1]
    cores.append(last)
    return TTTensor(cores)


def zeros_tt(dims: Sequence[int]) -> TTTensor:
    """All-zero train with every rank equal to 1 (keeps ``tt_add`` total)."""
    dims = [int(n) for n in dims]
    return TTTensor([np.zeros((1, n, 1)) for n in dims])
