"""Dense tensor algebra: storage, matricization, mode products.

This module is the brute-force reference substrate for the rest of the
package.  Everything is stored as a flat row-major ``float64`` buffer and
all operations are written for auditability rather than speed.

Conventions
-----------
Modes are 1-based, as is standard in multilinear algebra: a tensor of
order ``k`` has modes ``1..k``.  The mode-``i`` matricization ``T_(i)``
has the mode-``i`` fibers as columns, with the column index built from
the remaining indices so that the *first* remaining index varies fastest.
Under that convention the contraction chain

    T x_1 v_1 x_2 ... x_{k-1} v_{k-1}  ==  T_(k) @ (v_{k-1} kron ... kron v_1)

holds exactly; ``test_tensor.py`` pins it.
"""

from __future__ import annotations

import math

import numpy as np


class DenseTensor:
    """Arbitrary-order dense tensor over float64.

    Parameters
    ----------
    data : array_like
        Anything ``np.asarray`` accepts; reshaped to ``shape`` if given.
    shape : tuple of int, optional
        Explicit shape; defaults to ``data``'s own shape.
    """

    __slots__ = ("data",)

    def __init__(self, data, shape=None):
        arr = np.asarray(data, dtype=np.float64)
        if shape is not None:
            if arr.size != math.prod(shape):
                raise ValueError(
                    f"data has {arr.size} entries, shape {tuple(shape)} needs "
                    f"{math.prod(shape)}"
                )
            arr = arr.reshape(shape)
        if arr.ndim < 1:
            arr = arr.reshape(1)
        if any(n < 1 for n in arr.shape):
            raise ValueError(f"all dimensions must be >= 1, got {arr.shape}")
        self.data = np.ascontiguousarray(arr)

    @classmethod
    def zeros(cls, *shape) -> "DenseTensor":
        return cls(np.zeros(shape))

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def order(self) -> int:
        return self.data.ndim

    def __getitem__(self, idx):
        return self.data[idx]

    def __repr__(self):
        return f"DenseTensor(shape={self.shape})"

    def _check_mode(self, mode: int) -> None:
        if not 1 <= mode <= self.order:
            raise ValueError(
                f"mode {mode} out of range for order-{self.order} tensor"
            )

    def matricize(self, mode: int) -> np.ndarray:
        """Mode-``mode`` unfolding, shape ``(N_mode, prod of the rest)``.

        Columns are the mode fibers; the first remaining index varies
        fastest along the column axis.
        """
        self._check_mode(mode)
        moved = np.moveaxis(self.data, mode - 1, 0)
        return moved.reshape(self.shape[mode - 1], -1, order="F")

    def mode_vec_product(self, mode: int, v) -> "DenseTensor":
        """Contract mode ``mode`` with vector ``v``; order drops by one.

        ``(T x_i v)[n_1,..,n_{i-1},n_{i+1},..,n_k] = sum_j T[..,j,..] v[j]``.
        An order-1 tensor contracts to an order-1 tensor holding the scalar.
        """
        self._check_mode(mode)
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != self.shape[mode - 1]:
            raise ValueError(
                f"vector length {v.shape} does not match mode {mode} "
                f"dimension {self.shape[mode - 1]}"
            )
        out = np.tensordot(self.data, v, axes=([mode - 1], [0]))
        if out.ndim == 0:
            out = out.reshape(1)
        return DenseTensor(out)

    def multi_mode_product(self, vs) -> np.ndarray:
        """Contract modes ``1..len(vs)`` with the given vectors.

        With ``k-1`` vectors the result is the remaining mode-``k`` fiber
        combination (a vector); with ``k`` vectors it is a scalar.
        """
        k = self.order
        if len(vs) not in (k - 1, k) or len(vs) == 0:
            raise ValueError(
                f"expected {k - 1} or {k} vectors for an order-{k} tensor, "
                f"got {len(vs)}"
            )
        t = self
        for v in vs:
            t = t.mode_vec_product(1, v)
        if len(vs) == k:
            return float(t.data.reshape(-1)[0])
        return t.data.copy()


def dematricize(mat, shape, mode: int) -> DenseTensor:
    """Inverse of :meth:`DenseTensor.matricize` for the given shape/mode."""
    mat = np.asarray(mat, dtype=np.float64)
    shape = tuple(shape)
    if not 1 <= mode <= len(shape):
        raise ValueError(f"mode {mode} out of range for shape {shape}")
    rest = shape[: mode - 1] + shape[mode:]
    if mat.shape != (shape[mode - 1], math.prod(rest)):
        raise ValueError(
            f"matrix shape {mat.shape} inconsistent with shape {shape}, "
            f"mode {mode}"
        )
    moved = mat.reshape((shape[mode - 1],) + rest, order="F")
    return DenseTensor(np.moveaxis(moved, 0, mode - 1))


def kron(a, b) -> np.ndarray:
    """Kronecker product of two vectors: ``out[i*len(b)+j] = a[i] b[j]``."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    return np.kron(a, b)


def hadamard(a, b) -> np.ndarray:
    """Component-wise product of two equal-length vectors."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a * b


def outer(vs) -> DenseTensor:
    """Outer product of a list of vectors; shape is the tuple of lengths."""
    vs = [np.asarray(v, dtype=np.float64).reshape(-1) for v in vs]
    if not vs:
        raise ValueError("outer() needs at least one vector")
    out = vs[0]
    for v in vs[1:]:
        out = np.multiply.outer(out, v)
    return DenseTensor(out)
