"""Structured one-leg operators and their application to multi-leg states.

A :class:`Tridiagonal` holds a diagonal plus one pair of off-diagonals at a
fixed offset ``K``.  Applying it to leg ``k`` of a state views the amplitude
tensor as ``(pre, dim, post)`` and updates the caller's accumulator slice by
slice, so no transposed copy of the state is ever made.

Interaction-picture convention
------------------------------
An operator carrying per-index frequencies ``omega`` stands for
``U(t)^-1 M U(t)`` with ``U(t) = exp(-i diag(omega) t)``.  Element
``M[n, n+K]`` is therefore multiplied by ``exp(i (omega[n] - omega[n+K]) t)``
and ``M[n+K, n]`` by the inverse phase.  Frequencies may be complex, which
covers a non-unitary (loss-absorbing) propagator: for exponents ``z`` of
:class:`DiagonalPropagator` the matching frequencies are ``omega = i z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .qdata import StateVector


class DimensionMismatch(ValueError):
    pass


def _raw(x) -> np.ndarray:
    return x.data if hasattr(x, "data") and not isinstance(x, np.ndarray) else x


def _leg_view(arr: np.ndarray, leg: int, writable: bool = False) -> np.ndarray:
    if writable and not arr.flags.c_contiguous:
        raise ValueError("in-place target must be C-contiguous")
    shape = arr.shape
    pre = math.prod(shape[:leg])
    post = math.prod(shape[leg + 1:])
    return arr.reshape(pre, shape[leg], post)


class Tridiagonal:
    """Operator ``diag + upper (offset +K) + lower (offset -K)`` on one leg.

    Parameters
    ----------
    diagonal, upper, lower : array_like or None
        ``upper[n]`` is element ``[n, n+K]``, ``lower[n]`` is ``[n+K, n]``.
        ``None`` means all zero.
    freqs : array_like, optional
        Per-index frequencies used by :meth:`dressed`.
    """

    __slots__ = ("dim", "offset", "diagonal", "upper", "lower", "freqs",
                 "_has_diag", "_has_upper", "_has_lower", "_rate")

    def __init__(self, dim: int, offset: int = 1, diagonal=None, upper=None,
                 lower=None, freqs=None):
        dim, offset = int(dim), int(offset)
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        if not 1 <= offset or (dim > 1 and offset >= dim):
            raise ValueError(f"offset {offset} must satisfy 1 <= K < dim = {dim}")
        n_off = max(dim - offset, 0)
        self.dim = dim
        self.offset = offset
        self.diagonal = self._vector(diagonal, dim, "diagonal")
        self.upper = self._vector(upper, n_off, "upper")
        self.lower = self._vector(lower, n_off, "lower")
        self.freqs = None if freqs is None else self._vector(freqs, dim, "freqs")
        self._has_diag = bool(np.any(self.diagonal))
        self._has_upper = bool(np.any(self.upper))
        self._has_lower = bool(np.any(self.lower))
        if self.freqs is None:
            self._rate = None
        else:
            self._rate = 1j * (self.freqs[:n_off] - self.freqs[offset:])

    @staticmethod
    def _vector(values, length, name):
        if values is None:
            return np.zeros(length, dtype=np.complex128)
        v = np.array(values, dtype=np.complex128).reshape(-1)
        if v.size != length:
            raise ValueError(f"{name} must have length {length}, got {v.size}")
        return v

    @classmethod
    def annihilation(cls, dim: int, freqs=None) -> "Tridiagonal":
        return cls(dim, 1, upper=np.sqrt(np.arange(1, dim)), freqs=freqs)

    @classmethod
    def creation(cls, dim: int, freqs=None) -> "Tridiagonal":
        return cls(dim, 1, lower=np.sqrt(np.arange(1, dim)), freqs=freqs)

    @classmethod
    def number(cls, dim: int, freqs=None) -> "Tridiagonal":
        return cls(dim, 1, diagonal=np.arange(dim), freqs=freqs)

    @classmethod
    def identity(cls, dim: int) -> "Tridiagonal":
        return cls(dim, 1, diagonal=np.ones(dim))

    def dense(self) -> np.ndarray:
        m = np.diag(self.diagonal)
        k = self.offset
        for n in range(self.dim - k):
            m[n, n + k] += self.upper[n]
            m[n + k, n] += self.lower[n]
        return m

    def adjoint(self) -> "Tridiagonal":
        """Hermitian conjugate; real frequencies carry over unchanged."""
        freqs = None if self.freqs is None else self.freqs.conj()
        return Tridiagonal(self.dim, self.offset, self.diagonal.conj(),
                           self.lower.conj(), self.upper.conj(), freqs)

    def is_hermitian(self, tol: float = 1e-14) -> bool:
        return (np.all(np.abs(self.diagonal.imag) <= tol)
                and np.all(np.abs(self.lower - self.upper.conj()) <= tol))

    def scaled(self, c: complex) -> "Tridiagonal":
        return Tridiagonal(self.dim, self.offset, c * self.diagonal, c * self.upper,
                           c * self.lower, self.freqs)

    def __add__(self, other: "Tridiagonal") -> "Tridiagonal":
        if (self.dim, self.offset) != (other.dim, other.offset):
            raise DimensionMismatch("cannot add tridiagonals of different shape")
        if not _same_freqs(self.freqs, other.freqs):
            raise ValueError("cannot add tridiagonals with different frequencies")
        return Tridiagonal(self.dim, self.offset, self.diagonal + other.diagonal,
                           self.upper + other.upper, self.lower + other.lower, self.freqs)

    def dressed(self, t: float) -> "Tridiagonal":
        return dress_with_freqs(self, t)

    def __repr__(self):
        return f"Tridiagonal(dim={self.dim}, K={self.offset}, dressed={self.freqs is not None})"


def _same_freqs(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and bool(np.all(a == b))


def dress_with_freqs(op: Tridiagonal, t: float) -> Tridiagonal:
    """Operator in the interaction picture at time ``t``; unchanged without freqs."""
    if op.freqs is None or t == 0:
        return op
    phase = np.exp(op._rate * t)
    return Tridiagonal(op.dim, op.offset, op.diagonal, op.upper * phase,
                       op.lower / phase, op.freqs)


def apply_tridiagonal(op: Tridiagonal, leg: int, psi, acc, prefactor: complex = 1.0, t=None):
    """``acc += prefactor * op_leg psi``; other legs untouched, ``psi`` unmodified.

    If ``t`` is given the operator is dressed at that time on the fly.
    """
    x = _raw(psi)
    out = _raw(acc)
    if x.shape[leg] != op.dim:
        raise DimensionMismatch(
            f"leg dimension mismatch: operator dim {op.dim}, leg {leg} has {x.shape[leg]}")
    if out.shape != x.shape:
        raise DimensionMismatch(f"leg dimension mismatch: accumulator {out.shape} vs {x.shape}")
    x3 = _leg_view(x, leg)
    o3 = _leg_view(out, leg, writable=True)
    k = op.offset
    n = op.dim - k
    if op._has_diag:
        o3 += (prefactor * op.diagonal)[None, :, None] * x3
    if n <= 0:
        return acc
    if t is None or op._rate is None or t == 0:
        up, low = op.upper, op.lower
        if op._has_upper:
            o3[:, :n, :] += (prefactor * up)[None, :, None] * x3[:, k:, :]
        if op._has_lower:
            o3[:, k:, :] += (prefactor * low)[None, :, None] * x3[:, :n, :]
    else:
        phase = np.exp(op._rate * t)
        if op._has_upper:
            o3[:, :n, :] += (prefactor * op.upper * phase)[None, :, None] * x3[:, k:, :]
        if op._has_lower:
            o3[:, k:, :] += (prefactor * op.lower / phase)[None, :, None] * x3[:, :n, :]
    return acc


@dataclass(frozen=True)
class ProductTerm:
    """``coefficient * prod_k factors[k]`` with each factor acting on its own leg."""

    coefficient: complex
    factors: Mapping[int, Tridiagonal] = field(default_factory=dict)

    def __post_init__(self):
        if not self.factors:
            raise ValueError("a product term needs at least one factor")

    @property
    def legs(self) -> tuple[int, ...]:
        return tuple(self.factors)

    def relabel(self, legs) -> "ProductTerm":
        """Same term with local leg ``k`` moved to ``legs[k]``."""
        return ProductTerm(self.coefficient, {legs[k]: op for k, op in self.factors.items()})

    def adjoint(self) -> "ProductTerm":
        return ProductTerm(complex(self.coefficient).conjugate(),
                           {k: op.adjoint() for k, op in self.factors.items()})

    def dense(self, dims) -> np.ndarray:
        """Kronecker-lifted matrix on the full space ``dims``."""
        m = np.ones((1, 1), dtype=np.complex128)
        for leg, d in enumerate(dims):
            f = self.factors.get(leg)
            m = np.kron(m, f.dense() if f is not None else np.eye(d))
        return self.coefficient * m


def apply_product_term(term: ProductTerm, t, psi, acc, prefactor: complex = 1.0):
    """``acc += prefactor * coefficient * (prod of dressed factors) psi``."""
    x = _raw(psi)
    items = list(term.factors.items())
    c = prefactor * term.coefficient
    if len(items) == 1:
        leg, op = items[0]
        return apply_tridiagonal(op, leg, x, acc, c, t)
    for leg, op in items[:-1]:
        tmp = np.zeros_like(x)
        apply_tridiagonal(op, leg, x, tmp, 1.0, t)
        x = tmp
    leg, op = items[-1]
    return apply_tridiagonal(op, leg, x, acc, c, t)


class DiagonalPropagator:
    """Exact diagonal propagator on one leg: amplitude ``n`` gets ``exp(z[n] t)``."""

    __slots__ = ("leg", "exponents")

    def __init__(self, leg: int, exponents):
        self.leg = int(leg)
        self.exponents = np.array(exponents, dtype=np.complex128).reshape(-1)

    @property
    def unitary(self) -> bool:
        return bool(np.all(np.abs(self.exponents.real) <= 1e-14))

    @property
    def freqs(self) -> np.ndarray:
        """Frequencies that dress operators into this propagator's picture."""
        return 1j * self.exponents

    def on_leg(self, leg: int) -> "DiagonalPropagator":
        return DiagonalPropagator(leg, self.exponents)

    def __repr__(self):
        return f"DiagonalPropagator(leg={self.leg}, dim={self.exponents.size}, unitary={self.unitary})"


def apply_propagator(u: DiagonalPropagator, t: float, state, direction: str = "forward",
                     leg: int | None = None, conjugate: bool = False):
    """Scale amplitudes along the leg by ``exp(+-z t)`` in place and return ``state``.

    ``conjugate`` uses ``conj(z)``, which is what bra legs of a density
    operator need.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    if t == 0:
        return state
    arr = _raw(state)
    leg = u.leg if leg is None else leg
    if arr.shape[leg] != u.exponents.size:
        raise DimensionMismatch(
            f"leg dimension mismatch: propagator dim {u.exponents.size}, leg {leg} has {arr.shape[leg]}")
    z = u.exponents.conj() if conjugate else u.exponents
    factor = np.exp(z * (t if direction == "forward" else -t))
    view = _leg_view(arr, leg, writable=True)
    view *= factor[None, :, None]
    return state


def lift_dense(op: np.ndarray, leg: int, dims) -> np.ndarray:
    """``I x ... x op x ... x I`` with ``op`` on ``leg``."""
    m = np.ones((1, 1), dtype=np.complex128)
    for k, d in enumerate(dims):
        m = np.kron(m, op if k == leg else np.eye(d))
    return m


__all__ = [
    "DimensionMismatch", "Tridiagonal", "ProductTerm", "DiagonalPropagator",
    "apply_tridiagonal", "apply_product_term", "dress_with_freqs", "apply_propagator",
    "lift_dense", "StateVector",
]
