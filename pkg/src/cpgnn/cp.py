"""CP decompositions: reconstruction, symmetric factorizations, fitting.

Three representations live here:

* :class:`CPDecomp` — one factor matrix per mode, rank R.
* :class:`PartialSymCP` — a single factor ``w`` shared by the first
  ``k_sym`` modes plus a trailing factor ``m``; materializes to a tensor
  that is invariant under permutations of its first ``k_sym`` indices.
* :class:`WeightedSymCP` — eigen-style symmetric factorization of a
  symmetric matrix with signed weights, so negative eigenvalues do not
  force complex factors.

``build_sum_tensor`` constructs, entry by entry, the tensor whose
homogeneous-coordinate contraction computes ``alpha * sum_i x_i``; it is
the executable witness that plain sum/mean aggregation lives inside the
multiplicative-pooling function class.  ``fit_partial_sym_cp`` is a plain
gradient-descent fitter used to confirm that specific targets are
reachable at a prescribed rank.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, NumericalError
from .tensor import DenseTensor

MATERIALIZE_GUARD = 10**7

_SYMMETRY_TOL = 1e-9


def _check_capacity(shape) -> None:
    size = math.prod(shape)
    if size > MATERIALIZE_GUARD:
        raise CapacityError(
            f"refusing to materialize {size} entries (guard {MATERIALIZE_GUARD})"
        )


def _cp_materialize(factors) -> DenseTensor:
    """Sum of rank-one outer products, one per shared column."""
    shape = tuple(f.shape[0] for f in factors)
    _check_capacity(shape)
    letters = string.ascii_lowercase[: len(factors)]
    spec = ",".join(f"{c}z" for c in letters) + "->" + letters
    return DenseTensor(np.einsum(spec, *factors))


@dataclass(frozen=True)
class CPDecomp:
    """General CP decomposition: ``factors[i]`` has shape ``(N_i, R)``."""

    factors: tuple

    def __post_init__(self):
        ranks = {f.shape[1] for f in self.factors}
        if len(ranks) != 1:
            raise ValueError(f"factor matrices disagree on rank: {ranks}")

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1]

    def reconstruct(self) -> DenseTensor:
        return _cp_materialize(self.factors)


@dataclass(frozen=True)
class PartialSymCP:
    """CP decomposition with ``w`` shared across the first ``k_sym`` modes."""

    w: np.ndarray
    m: np.ndarray
    k_sym: int

    def __post_init__(self):
        if self.k_sym < 1:
            raise ValueError("k_sym must be >= 1")
        if self.w.shape[1] != self.m.shape[1]:
            raise ValueError(
                f"rank mismatch: w has {self.w.shape[1]} columns, "
                f"m has {self.m.shape[1]}"
            )

    @property
    def rank(self) -> int:
        return self.w.shape[1]

    def reconstruct(self) -> DenseTensor:
        return _cp_materialize([self.w] * self.k_sym + [self.m])


@dataclass(frozen=True)
class WeightedSymCP:
    """Symmetric rank-R matrix factorization ``sum_r weights_r v_r v_r^T``."""

    v: np.ndarray
    weights: np.ndarray

    @property
    def rank(self) -> int:
        return self.v.shape[1]

    def reconstruct(self) -> np.ndarray:
        return (self.v * self.weights) @ self.v.T


def symmetric_cp_of_matrix(s, tol: float = _SYMMETRY_TOL) -> WeightedSymCP:
    """Signed symmetric factorization of a symmetric matrix.

    Uses the spectral decomposition and keeps eigenpairs with
    ``|lambda| > tol``, so the reported rank is the numerical rank.
    Raises ``ValueError`` for asymmetric input and ``NumericalError``
    if the eigensolver fails.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {s.shape}")
    if np.max(np.abs(s - s.T), initial=0.0) > _SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric within 1e-9")
    try:
        eigvals, eigvecs = np.linalg.eigh((s + s.T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    keep = np.abs(eigvals) > tol
    return WeightedSymCP(v=eigvecs[:, keep].copy(), weights=eigvals[keep].copy())


def partial_sym_from_slices(t: DenseTensor):
    """Slice-wise symmetric factorization of a 3rd-order tensor.

    Every frontal slice ``t[:, :, i]`` must be symmetric.  Each slice is
    factorized spectrally and the per-slice factors are concatenated into
    ``a`` (with ``sqrt(|lambda|)`` folded into the columns); ``delta`` is
    the slice selector with the eigenvalue signs carried in its entries,
    so that ``sum_r a_r (outer) a_r (outer) delta_r`` reproduces ``t``.

    Returns
    -------
    (a, delta) : pair of ndarrays with shapes ``(m, R)`` and ``(n, R)``
        where ``R`` is the sum of the numerical ranks of the slices.
    """
    if t.order != 3:
        raise ValueError(f"expected a 3rd-order tensor, got order {t.order}")
    m1, m2, n = t.shape
    if m1 != m2:
        raise ValueError(f"first two modes must match, got {t.shape}")
    a_cols = []
    delta_cols = []
    for i in range(n):
        s = t.data[:, :, i]
        if np.max(np.abs(s - s.T), initial=0.0) > _SYMMETRY_TOL:
            raise ValueError(f"frontal slice {i} is not symmetric within 1e-9")
        sym = symmetric_cp_of_matrix(s)
        for r in range(sym.rank):
            lam = sym.weights[r]
            a_cols.append(math.sqrt(abs(lam)) * sym.v[:, r])
            sel = np.zeros(n)
            sel[i] = math.copysign(1.0, lam)
            delta_cols.append(sel)
    if not a_cols:
        return np.zeros((m1, 0)), np.zeros((n, 0))
    return np.column_stack(a_cols), np.column_stack(delta_cols)


def build_sum_tensor(f_dim: int, k: int, d: int, alpha: float) -> DenseTensor:
    """Tensor of shape ``(f_dim+1,)*k + (d,)`` computing a scaled sum.

    Contracting vectors ``[x_1;1], ..., [x_k;1]`` over the first ``k``
    modes yields ``alpha * sum_i x_i`` truncated to its first ``d``
    coordinates, hence ``d <= f_dim``.  Each rank-one term is an
    indicator: all symmetric indices sit at the homogeneous slot except
    one, which selects coordinate ``j``.
    """
    if d > f_dim:
        raise ValueError(f"output dim {d} exceeds feature dim {f_dim}")
    if k < 1 or d < 1:
        raise ValueError("k and d must be >= 1")
    shape = (f_dim + 1,) * k + (d,)
    _check_capacity(shape)
    data = np.zeros(shape)
    for j in range(d):
        for pos in range(k):
            idx = [f_dim] * k
            idx[pos] = j
            data[tuple(idx) + (j,)] += alpha
    return DenseTensor(data)


def _fit_gradients(w, m, err, k_sym):
    """Analytic gradients of sum(err**2) w.r.t. the shared/trailing factors."""
    letters = string.ascii_lowercase[:k_sym]
    err_sub = letters + "y"
    dm = 2.0 * np.einsum(
        err_sub + "," + ",".join(f"{c}z" for c in letters) + "->yz",
        err,
        *([w] * k_sym),
    )
    dw = np.zeros_like(w)
    for pos in range(k_sym):
        others = [letters[t] for t in range(k_sym) if t != pos]
        spec = (
            err_sub
            + ","
            + ",".join(f"{c}z" for c in others)
            + ",yz->"
            + letters[pos]
            + "z"
        )
        dw += 2.0 * np.einsum(spec, err, *([w] * (k_sym - 1)), m)
    return dw, dm


def _fit_single(target_data, k_sym, rank, iters, lr, seed, stop_loss):
    """One adaptive-moment descent run; returns (best_loss, best_w, best_m)."""
    n = target_data.shape[0]
    d = target_data.shape[-1]
    rng = np.random.default_rng(seed)
    limit_w = math.sqrt(6.0 / (n + rank))
    limit_m = math.sqrt(6.0 / (d + rank))
    w = rng.uniform(-limit_w, limit_w, size=(n, rank))
    m = rng.uniform(-limit_m, limit_m, size=(d, rank))

    mom = [np.zeros_like(w), np.zeros_like(m)]
    sec = [np.zeros_like(w), np.zeros_like(m)]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    decay_every = max(1, iters // 4)

    best_loss = math.inf
    best = (w.copy(), m.copy())
    step = lr
    for t in range(1, iters + 1):
        approx = _cp_materialize([w] * k_sym + [m]).data
        err = approx - target_data
        loss = float(np.sum(err * err))
        if not math.isfinite(loss):
            raise NumericalError("fit diverged to non-finite loss; lower lr")
        if loss < best_loss:
            best_loss = loss
            best = (w.copy(), m.copy())
        if best_loss <= stop_loss:
            break
        grads = _fit_gradients(w, m, err, k_sym)
        c1 = 1.0 - beta1**t
        c2 = 1.0 - beta2**t
        for i, (p, g) in enumerate(zip((w, m), grads)):
            mom[i] = beta1 * mom[i] + (1.0 - beta1) * g
            sec[i] = beta2 * sec[i] + (1.0 - beta2) * g * g
            p -= step * (mom[i] / c1) / (np.sqrt(sec[i] / c2) + eps)
        if t % decay_every == 0:
            step *= 0.5
    return best_loss, best[0], best[1]


def fit_partial_sym_cp(
    target: DenseTensor,
    k_sym: int,
    rank: int,
    iters: int = 6000,
    lr: float = 0.01,
    seed: int = 0,
    restarts: int = 12,
    rel_tol: float = 1e-5,
):
    """Fit a partially symmetric CP model to ``target`` by gradient descent.

    Minimizes the squared Frobenius reconstruction error using
    adaptive-moment gradient steps with a halving learning-rate schedule.
    The descent is restarted from up to ``restarts`` seeded
    Glorot-uniform inits (derived deterministically from ``seed``) and
    the best iterate across restarts is returned together with its loss;
    a restart short-circuits once the relative Frobenius error drops
    below ``rel_tol``.  Raises ``NumericalError`` if the loss leaves
    float range (lower ``lr`` in that case).
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if target.order != k_sym + 1:
        raise ValueError(
            f"target order {target.order} does not match k_sym={k_sym} "
            "plus one trailing mode"
        )
    _check_capacity(target.shape)
    n = target.shape[0]
    if any(dim != n for dim in target.shape[:k_sym]):
        raise ValueError(f"first {k_sym} modes must share a size, got {target.shape}")

    target_norm2 = float(np.sum(target.data**2))
    stop_loss = max(rel_tol * rel_tol * target_norm2, 1e-28)

    best_loss = math.inf
    best = None
    for attempt in range(max(1, restarts)):
        loss, w, m = _fit_single(
            target.data, k_sym, rank, iters, lr, seed + attempt, stop_loss
        )
        if loss < best_loss:
            best_loss = loss
            best = (w, m)
        if best_loss <= stop_loss:
            break
    return PartialSymCP(w=best[0], m=best[1], k_sym=k_sym), best_loss
