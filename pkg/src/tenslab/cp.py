"""CP (Candecomp/Parafac) representation and alternating least squares.

The normative fitting routine is :func:`cp_als`, which updates one whole
factor matrix at a time (each block update is an exact least-squares
solve).  :func:`cp_als_naive` updates one column vector at a time and is
kept as a slower pedagogical variant.  Rank diagnostics for the
``2 x 2 x 2`` case (hyperdeterminant sign), a dimension-count lower
bound and the classic border-rank demonstrator live here as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .dense import DenseTensor, as_tensor, inner, matricize, norm, tensor_product
from .linalg import RANK_CUTOFF, cp_product, khatri_rao, pseudo_inverse
from . import tucker as _tucker

__all__ = [
    "CPDecomposition",
    "ALSOptions",
    "ALSTrace",
    "cp_reconstruct",
    "cp_als",
    "cp_als_naive",
    "best_rank_one",
    "hyperdeterminant_222",
    "rank222_classify",
    "cp_rank_lower_bound",
    "border_rank_demo",
    "RANK2",
    "RANK3",
    "BOUNDARY",
]

RANK2 = "Rank2"
RANK3 = "Rank3"
BOUNDARY = "Boundary"


@dataclass
class CPDecomposition:
    """Weighted sum of rank-one terms.

    ``factors[mu]`` has shape ``(n_mu, r)`` with unit-norm columns; all
    scale lives in ``weights`` (length ``r``).
    """

    weights: np.ndarray
    factors: list[np.ndarray]

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        self.factors = [np.ascontiguousarray(X, dtype=np.float64) for X in self.factors]
        r = len(self.weights)
        for mu, X in enumerate(self.factors, start=1):
            if X.ndim != 2 or X.shape[1] != r:
                raise ValueError(f"factor shape {X.shape} incompatible with rank {r}")
            norms = np.linalg.norm(X, axis=0)
            if np.any(np.abs(norms - 1.0) > 1e-8):
                raise ValueError(
                    f"factor {mu} columns are not unit-norm; build through "
                    f"CPDecomposition.from_factors to absorb scale into weights")

    @classmethod
    def from_factors(cls, factors: Sequence[np.ndarray], weights=None) -> "CPDecomposition":
        """Normalize columns into weights (zero columns get weight 0)."""
        mats = [np.asarray(X, dtype=np.float64).copy() for X in factors]
        r = mats[0].shape[1]
        w = np.ones(r) if weights is None else np.asarray(weights, dtype=np.float64).copy()
        for X in mats:
            norms = np.linalg.norm(X, axis=0)
            for a in range(r):
                if norms[a] > 0:
                    X[:, a] /= norms[a]
                    w[a] *= norms[a]
                else:
                    w[a] = 0.0
                    X[:, a] = 0.0
                    X[0, a] = 1.0
        return cls(w, mats)

    @property
    def rank(self) -> int:
        return len(self.weights)

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(X.shape[0] for X in self.factors)


def cp_reconstruct(cp: CPDecomposition) -> DenseTensor:
    """Densify: the weighted sum of rank-one terms."""
    return cp_product(cp.factors, cp.weights)


@dataclass
class ALSOptions:
    """Knobs shared by the alternating solvers.

    A sweep stops the iteration when the objective decrease over the
    sweep drops below ``rel_tol * ||A||**2``.
    """

    max_sweeps: int = 100
    rel_tol: float = 1e-12
    seed: int = 0
    init: str = "random"          # "random" | "hosvd"

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be >= 0")


@dataclass
class ALSTrace:
    """Objective values recorded during a fit.

    ``per_block`` holds ``||A - recon||**2`` after every block update;
    ``per_sweep`` its value at the end of each full sweep.
    """

    initial: float
    per_block: list[float] = field(default_factory=list)
    per_sweep: list[float] = field(default_factory=list)
    flagged_sweeps: list[int] = field(default_factory=list)

    @property
    def final(self) -> float:
        return self.per_sweep[-1] if self.per_sweep else self.initial


def _init_factors(A: DenseTensor, r: int, opts: ALSOptions) -> list[np.ndarray]:
    rng = np.random.default_rng(opts.seed)
    if opts.init == "random":
        mats = []
        for n in A.dims:
            X = rng.uniform(-1.0, 1.0, size=(n, r))
            X /= np.maximum(np.linalg.norm(X, axis=0), 1e-300)
            mats.append(X)
        return mats
    if opts.init == "hosvd":
        ranks = [min(r, n) for n in A.dims]
        tuck, _ = _tucker.hosvd(A, ranks)
        mats = []
        for n, U in zip(A.dims, tuck.factors):
            if U.shape[1] < r:
                pad = rng.uniform(-1.0, 1.0, size=(n, r - U.shape[1]))
                pad /= np.maximum(np.linalg.norm(pad, axis=0), 1e-300)
                U = np.hstack([U, pad])
            mats.append(U.copy())
        return mats
    raise ValueError(f"unknown init {opts.init!r}")


def _khatri_rao_others(factors: list[np.ndarray], mu0: int) -> np.ndarray:
    """Khatri-Rao chain of every factor but ``mu0``, ascending mode order.

    Row order matches the row-major unfolding with mode ``mu0`` as columns.
    """
    others = [factors[nu] for nu in range(len(factors)) if nu != mu0]
    return reduce(khatri_rao, others)


def cp_als(A, r: int, opts: ALSOptions | None = None) -> tuple[CPDecomposition, ALSTrace]:
    """Fit a rank-``r`` CP model by block alternating least squares.

    Sweeps the modes in the order ``d, d-1, ..., 1``.  For the active
    mode the tensor is unfolded with that mode as columns, the other
    factors are combined columnwise into ``U``, and the exact block
    minimizer ``X = A.T @ U @ inv(U.T U)`` is taken (pseudo-inverse when
    the Gram matrix is ill-conditioned, with the sweep flagged).  Factor
    columns are renormalized into the weights after each update, so the
    objective is non-increasing across block updates.
    """
    A = as_tensor(A)
    if r < 1:
        raise ValueError("rank must be >= 1")
    if np.any(~np.isfinite(A.data)):
        raise ValueError("input tensor contains non-finite entries")
    opts = opts or ALSOptions()
    d = A.order
    norm_sq = norm(A) ** 2

    factors = _init_factors(A, r, opts)
    weights = np.ones(r)
    unfolds = [matricize(A, mu).data for mu in range(1, d + 1)]

    def objective() -> float:
        recon = cp_product(factors, weights)
        return norm(DenseTensor(A.data - recon.data)) ** 2

    trace = ALSTrace(initial=objective())
    prev = trace.initial
    for sweep in range(opts.max_sweeps):
        flagged = False
        for mu0 in reversed(range(d)):
            # unit columns only: the solve absorbs the whole model scale
            # into mode mu0, which then renormalizes into the weights
            U = _khatri_rao_others(factors, mu0)
            G = U.T @ U
            rhs = unfolds[mu0].T @ U
            with np.errstate(all="ignore"):
                cond = np.linalg.cond(G)
            if not np.isfinite(cond) or cond > 1e12:
                Y = rhs @ pseudo_inverse(G, RANK_CUTOFF)
                flagged = True
            else:
                Y = np.linalg.solve(G, rhs.T).T
            col_norms = np.linalg.norm(Y, axis=0)
            for a in range(r):
                if col_norms[a] > 0:
                    factors[mu0][:, a] = Y[:, a] / col_norms[a]
            weights = col_norms
            trace.per_block.append(objective())
        current = trace.per_block[-1]
        trace.per_sweep.append(current)
        if flagged:
            trace.flagged_sweeps.append(sweep)
        if prev - current < opts.rel_tol * norm_sq:
            break
        prev = current

    cp = CPDecomposition.from_factors(factors, weights)
    return cp, trace


def cp_als_naive(A, r: int, opts: ALSOptions | None = None) -> tuple[CPDecomposition, ALSTrace]:
    """Column-at-a-time alternating least squares (pedagogical variant).

    For each term ``a`` and mode ``mu`` the update replaces the mode-
    ``mu`` vector of term ``a`` by the residual tensor contracted with
    the remaining unit vectors of that term.  Each update is an exact
    1-D least-squares solve, so the objective is still monotone, just
    with far more, smaller steps than :func:`cp_als`.
    """
    from .contract import contract

    A = as_tensor(A)
    if r < 1:
        raise ValueError("rank must be >= 1")
    opts = opts or ALSOptions()
    d = A.order
    norm_sq = norm(A) ** 2

    factors = _init_factors(A, r, opts)
    weights = np.ones(r)

    def term(a: int) -> np.ndarray:
        vecs = [factors[nu][:, a] for nu in range(d)]
        out = weights[a] * reduce(np.multiply.outer, vecs)
        return out

    def objective() -> float:
        recon = sum(term(a) for a in range(r))
        return float(np.sum((A.data - recon) ** 2))

    trace = ALSTrace(initial=objective())
    prev = trace.initial
    for sweep in range(opts.max_sweeps):
        for a in range(r):
            residual = A.data - sum(term(b) for b in range(r) if b != a)
            for mu0 in reversed(range(d)):
                others = [factors[nu][:, a] for nu in range(d) if nu != mu0]
                X = reduce(tensor_product, [DenseTensor(v) for v in others])
                J = [nu + 1 for nu in range(d) if nu != mu0]
                y = contract(DenseTensor(residual), X, J).data
                nrm = float(np.linalg.norm(y))
                if nrm > 0:
                    factors[mu0][:, a] = y / nrm
                weights[a] = nrm
                trace.per_block.append(objective())
        current = trace.per_block[-1]
        trace.per_sweep.append(current)
        if prev - current < opts.rel_tol * norm_sq:
            break
        prev = current

    cp = CPDecomposition.from_factors(factors, weights)
    return cp, trace


def best_rank_one(A, opts: ALSOptions | None = None) -> tuple[float, list[np.ndarray]]:
    """Best rank-one approximation by the normalized fixed-point cycle.

    Cyclically replaces the mode-``mu`` vector by the tensor contracted
    with all the other (unit) vectors, normalized; at a fixed point the
    scale is ``alpha = <A, x_1 (x) ... (x) x_d>`` and the squared error
    is ``||A||**2 - alpha**2``.  For a matrix this converges to the
    leading singular pair.
    """
    from .contract import contract

    A = as_tensor(A)
    if norm(A) == 0.0:
        raise ValueError("zero tensor has no rank-one direction")
    opts = opts or ALSOptions()
    d = A.order
    rng = np.random.default_rng(opts.seed)
    xs = []
    for n in A.dims:
        v = rng.uniform(-1.0, 1.0, size=n)
        xs.append(v / np.linalg.norm(v))

    def alpha_of(vecs) -> float:
        prod = reduce(tensor_product, [DenseTensor(v) for v in vecs])
        return inner(A, prod)

    alpha = alpha_of(xs)
    for _ in range(opts.max_sweeps):
        for mu0 in range(d):
            others = [DenseTensor(xs[nu]) for nu in range(d) if nu != mu0]
            X = reduce(tensor_product, others)
            J = [nu + 1 for nu in range(d) if nu != mu0]
            y = contract(A, X, J).data
            nrm = float(np.linalg.norm(y))
            if nrm == 0.0:
                break
            xs[mu0] = y / nrm
        new_alpha = alpha_of(xs)
        if abs(new_alpha - alpha) <= opts.rel_tol * max(abs(new_alpha), 1e-300):
            alpha = new_alpha
            break
        alpha = new_alpha
    return alpha, xs


def _slices_222(A: DenseTensor) -> tuple[float, ...]:
    if A.dims != (2, 2, 2):
        raise ValueError(f"expected a 2x2x2 tensor, got dims {A.dims}")
    T = A.data
    a, b, c, d = T[0, 0, 0], T[0, 1, 0], T[1, 0, 0], T[1, 1, 0]
    ap, bp, cp_, dp = T[0, 0, 1], T[0, 1, 1], T[1, 0, 1], T[1, 1, 1]
    return a, b, c, d, ap, bp, cp_, dp


def hyperdeterminant_222(A) -> float:
    """Degree-4 invariant of a ``2 x 2 x 2`` tensor deciding real rank.

    With the two mode-3 slices written ``(a b; c d)`` and
    ``(a' b'; c' d')``, this is the discriminant
    ``(a d' + a' d - b c' - b' c)**2 - 4 (a' d - b c')(a d' - b' c)
    + 4 (a c' - a' c)(b' d - b d')`` of the pencil eigenproblem: it is
    positive exactly when ``inv(A_1) @ A_2`` has two real eigenvalues.
    """
    a, b, c, d, ap, bp, cp_, dp = _slices_222(as_tensor(A))
    tr_m = a * dp + ap * d - b * cp_ - bp * c
    det_m = (ap * d - b * cp_) * (a * dp - bp * c) - (a * cp_ - ap * c) * (bp * d - b * dp)
    return float(tr_m * tr_m - 4.0 * det_m)


def rank222_classify(A, boundary_tol: float = 1e-10) -> str:
    """Classify a ``2 x 2 x 2`` tensor as rank 2, rank 3 or boundary.

    The hyperdeterminant is quartic in the entries, so the boundary band
    is ``|delta| <= boundary_tol * max|entry|**4``.
    """
    A = as_tensor(A)
    delta = hyperdeterminant_222(A)
    scale = norm(A, np.inf) ** 4
    if delta > boundary_tol * scale:
        return RANK2
    if delta < -boundary_tol * scale:
        return RANK3
    return BOUNDARY


def cp_rank_lower_bound(dims: Sequence[int]) -> int:
    """Dimension-count lower bound on the maximal typical CP rank.

    Counts parameters of a rank-``r`` model modulo its ``d - 1`` scale
    redundancies: ``ceil(prod(n) / (sum(n) - d + 1))``.
    """
    dims = [int(n) for n in dims]
    if any(n < 1 for n in dims):
        raise ValueError(f"invalid dims {dims}")
    d = len(dims)
    return math.ceil(math.prod(dims) / (sum(dims) - d + 1))


def border_rank_demo(xs: Sequence, ys: Sequence, k: float) -> tuple[DenseTensor, DenseTensor]:
    """Rank-3 tensor with border rank 2, and its rank-2 approximant.

    ``A = x1 (x) x2 (x) y3 + x1 (x) y2 (x) x3 + y1 (x) x2 (x) x3`` and
    ``A_k = k (x1 + y1/k) (x) (x2 + y2/k) (x) (x3 + y3/k)
    - k x1 (x) x2 (x) x3``; the difference is ``O(1/k)`` exactly, so
    ``A`` is approached arbitrarily closely by rank-2 tensors.
    Each pair ``(x_i, y_i)`` must be linearly independent.
    """
    if k == 0:
        raise ValueError("k must be nonzero")
    X = [np.asarray(x, dtype=np.float64).reshape(-1) for x in xs]
    Y = [np.asarray(y, dtype=np.float64).reshape(-1) for y in ys]
    if len(X) != 3 or len(Y) != 3:
        raise ValueError("need three x vectors and three y vectors")
    for i, (x, y) in enumerate(zip(X, Y), start=1):
        if x.shape != y.shape:
            raise ValueError(f"pair {i} has mismatched lengths")
        s = np.linalg.svd(np.stack([x, y]), compute_uv=False)
        if s[0] == 0 or s[-1] <= 1e-12 * s[0]:
            raise ValueError(f"pair {i} is not linearly independent")

    def outer3(u, v, w):
        return np.multiply.outer(np.multiply.outer(u, v), w)

    A = outer3(X[0], X[1], Y[2]) + outer3(X[0], Y[1], X[2]) + outer3(Y[0], X[1], X[2])
    Ak = k * outer3(X[0] + Y[0] / k, X[1] + Y[1] / k, X[2] + Y[2] / k) \
        - k * outer3(X[0], X[1], X[2])
    return DenseTensor(A), DenseTensor(Ak)
