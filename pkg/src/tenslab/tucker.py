"""Tucker format: multilinear basis change, HOSVD and HOOI refinement.

A Tucker representation is a (small) core tensor together with one
orthonormal factor matrix per mode; applying the factors to the core
reproduces the tensor.  :func:`hosvd` builds the factors from one SVD
per mode-wise unfolding, :func:`hooi` refines them by alternating
constrained SVDs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dense import DenseTensor, as_tensor, matricize, norm
from .linalg import svd

__all__ = [
    "TuckerDecomposition",
    "multilinear_apply",
    "tucker_reconstruct",
    "hosvd",
    "hooi",
]


@dataclass
class TuckerDecomposition:
    """Core of dims ``(r_1..r_d)`` plus per-mode ``(n_mu, r_mu)`` factors
    with orthonormal columns."""

    core: DenseTensor
    factors: list[np.ndarray]

    def __post_init__(self):
        self.core = as_tensor(self.core)
        self.factors = [np.ascontiguousarray(U, dtype=np.float64) for U in self.factors]
        if len(self.factors) != self.core.order:
            raise ValueError("need one factor per core mode")
        for mu, U in enumerate(self.factors):
            if U.ndim != 2 or U.shape[1] != self.core.dims[mu]:
                raise ValueError(
                    f"factor {mu + 1} shape {U.shape} incompatible with core "
                    f"dims {self.core.dims}")
            gram = U.T @ U
            if np.max(np.abs(gram - np.eye(U.shape[1]))) > 1e-8:
                raise ValueError(f"factor {mu + 1} columns are not orthonormal")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(U.shape[0] for U in self.factors)

    @property
    def ranks(self) -> tuple[int, ...]:
        return self.core.dims


def _normalize_flags(transpose, d: int) -> list[bool]:
    if isinstance(transpose, bool):
        return [transpose] * d
    flags = [bool(t) for t in transpose]
    if len(flags) != d:
        raise ValueError(f"need {d} transpose flags, got {len(flags)}")
    return flags


def multilinear_apply(A, mats: Sequence[np.ndarray], transpose=False) -> DenseTensor:
    """Apply one matrix per mode: the action ``(M_1, ..., M_d) . A``.

    With ``transpose=False`` the matrix multiplies each mode-``mu``
    fiber directly (``M_mu`` of shape ``(m_mu, n_mu)``); with the flag
    set, its transpose does (``M_mu`` of shape ``(n_mu, m_mu)``), which
    is the basis-change direction used to form Tucker cores.  ``None``
    entries leave a mode untouched.  Implemented as the classic cycle of
    unfold, multiply, fold, one mode at a time.
    """
    A = as_tensor(A)
    d = A.order
    if len(mats) != d:
        raise ValueError(f"need {d} matrices for order {d}")
    flags = _normalize_flags(transpose, d)
    out = A.data
    for mu0, (M, flag) in enumerate(zip(mats, flags)):
        if M is None:
            continue
        M = np.asarray(M, dtype=np.float64)
        op = M.T if flag else M
        if op.shape[1] != out.shape[mu0]:
            raise ValueError(
                f"matrix for mode {mu0 + 1} contracts {op.shape[1]} values against "
                f"dimension {out.shape[mu0]}")
        out = np.moveaxis(np.tensordot(op, out, axes=(1, mu0)), 0, mu0)
    return DenseTensor(out)


def tucker_reconstruct(T: TuckerDecomposition) -> DenseTensor:
    """Densify by applying the factors (untransposed) to the core."""
    return multilinear_apply(T.core, T.factors, transpose=False)


def hosvd(A, ranks: Sequence[int]) -> tuple[TuckerDecomposition, list[np.ndarray]]:
    """Higher-order SVD at the requested per-mode ranks.

    For each mode the tensor is unfolded with that mode as columns and
    the leading right singular vectors become the mode's orthonormal
    basis; the core is the tensor expressed in these bases.  In the new
    basis the mode-``mu`` slices are pairwise orthogonal with norms
    equal to that unfolding's singular values.  Returns the
    decomposition and the per-mode singular value arrays.
    """
    A = as_tensor(A)
    ranks = [int(r) for r in ranks]
    if len(ranks) != A.order:
        raise ValueError(f"need {A.order} ranks, got {len(ranks)}")
    for r, n in zip(ranks, A.dims):
        if not 1 <= r <= n:
            raise ValueError(f"rank {r} out of range 1..{n}")
    factors, spectra = [], []
    for mu in range(1, A.order + 1):
        res = svd(matricize(A, mu).data)
        spectra.append(res.singular_values.copy())
        factors.append(res.V[:, :ranks[mu - 1]].copy())
    core = multilinear_apply(A, factors, transpose=True)
    return TuckerDecomposition(core, factors), spectra


def hooi(A, ranks: Sequence[int], opts=None) -> tuple[TuckerDecomposition, list[float]]:
    """Higher-order orthogonal iteration (alternating subspace refinement).

    Starts from :func:`hosvd`.  Each step fixes every subspace but one,
    projects the tensor onto the fixed subspaces, unfolds with the free
    mode as columns and takes the leading right singular vectors as the
    new basis (Gauss-Seidel style: the freshest bases are used within a
    sweep).  Equivalent to maximizing the core energy, so the
    reconstruction error never increases across sweeps.  Returns the
    decomposition and the per-sweep error trace (initial HOSVD error
    first).
    """
    from .cp import ALSOptions  # shared option bag; no circular import at runtime

    A = as_tensor(A)
    opts = opts or ALSOptions(max_sweeps=50)
    tuck, _ = hosvd(A, ranks)
    factors = [U.copy() for U in tuck.factors]
    d = A.order
    norm_sq = norm(A) ** 2

    def error_of(facs) -> float:
        core = multilinear_apply(A, facs, transpose=True)
        recon = multilinear_apply(core, facs, transpose=False)
        return norm(DenseTensor(A.data - recon.data))

    trace = [error_of(factors)]
    for _ in range(opts.max_sweeps):
        for mu0 in range(d):
            reducers = [factors[nu] if nu != mu0 else None for nu in range(d)]
            Y = multilinear_apply(A, reducers, transpose=True)
            res = svd(matricize(Y, mu0 + 1).data)
            factors[mu0] = res.V[:, :ranks[mu0]].copy()
        trace.append(error_of(factors))
        if trace[-2] ** 2 - trace[-1] ** 2 < opts.rel_tol * norm_sq:
            break
    core = multilinear_apply(A, factors, transpose=True)
    return TuckerDecomposition(core, factors), trace
