"""Multi-leg quantum state containers and the linear algebra built on them.

A state of a composite system carries one tensor index ("leg") per
subsystem.  :class:`StateVector` stores amplitudes with shape ``dims``;
:class:`DensityOperator` stores elements with shape ``dims + dims`` (all ket
legs first, then all bra legs).  Both use row-major multi-index order, so
flattening gives the usual Kronecker-product ordering.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

MAX_RANK = 8

JACOBI_MAX_SWEEPS = 100
JACOBI_TOLERANCE = 1e-12


class QuantumDataError(ValueError):
    """Raised for invalid state data or invalid subsystem selections."""


class EigensolverError(RuntimeError):
    pass


def _check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not 1 <= len(dims) <= MAX_RANK:
        raise QuantumDataError(f"rank must be between 1 and {MAX_RANK}, got {len(dims)}")
    if any(d < 1 for d in dims):
        raise QuantumDataError(f"all leg dimensions must be positive, got {dims}")
    return dims


class StateVector:
    """Complex amplitude tensor over a product of truncated bases.

    Parameters
    ----------
    data : array_like
        Amplitudes.  If ``dims`` is omitted the shape of ``data`` is used.
    dims : sequence of int, optional
        Leg dimensions; ``data`` is reshaped to them.
    """

    __slots__ = ("data",)

    def __init__(self, data, dims: Sequence[int] | None = None):
        arr = np.array(data, dtype=np.complex128)
        if dims is None:
            if arr.ndim == 0:
                arr = arr.reshape(1)
            dims = arr.shape
        dims = _check_dims(dims)
        if arr.size != math.prod(dims):
            raise QuantumDataError(
                f"amplitude count {arr.size} does not match dims {dims}")
        self.data = np.ascontiguousarray(arr.reshape(dims))

    @classmethod
    def basis(cls, dims: Sequence[int], index: Sequence[int] | int) -> "StateVector":
        dims = _check_dims(dims if not isinstance(dims, int) else (dims,))
        data = np.zeros(dims, dtype=np.complex128)
        idx = (index,) if isinstance(index, (int, np.integer)) else tuple(index)
        data[idx] = 1.0
        return cls(data)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def rank(self) -> int:
        return self.data.ndim

    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def copy(self) -> "StateVector":
        return StateVector(self.data.copy())

    def __mul__(self, other):
        if isinstance(other, StateVector):
            return direct_product(self, other)
        return StateVector(self.data * other)

    def __rmul__(self, scalar):
        return StateVector(self.data * scalar)

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.data + other.data)

    def __repr__(self):
        return f"StateVector(dims={self.dims})"


class DensityOperator:
    """Density operator with ket legs followed by bra legs."""

    __slots__ = ("data",)

    def __init__(self, data, dims: Sequence[int] | None = None):
        arr = np.array(data, dtype=np.complex128)
        if dims is None:
            if arr.ndim % 2:
                raise QuantumDataError("density operator needs an even number of axes")
            dims = arr.shape[: arr.ndim // 2]
            if arr.shape[arr.ndim // 2:] != tuple(dims):
                raise QuantumDataError(f"ket and bra shapes differ: {arr.shape}")
        dims = _check_dims(dims)
        if arr.size != math.prod(dims) ** 2:
            raise QuantumDataError(
                f"element count {arr.size} does not match dims {dims}")
        self.data = np.ascontiguousarray(arr.reshape(dims + dims))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape[: self.data.ndim // 2]

    @property
    def rank(self) -> int:
        return self.data.ndim // 2

    def matrix(self) -> np.ndarray:
        """Flat ``(D, D)`` view, ``D`` the total dimension."""
        n = math.prod(self.dims)
        return self.data.reshape(n, n)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix()))

    def copy(self) -> "DensityOperator":
        return DensityOperator(self.data.copy())

    def __repr__(self):
        return f"DensityOperator(dims={self.dims})"


class PartySelector:
    """A proper, non-empty subset of the legs of a rank-``rank`` state."""

    __slots__ = ("legs", "rank")

    def __init__(self, legs: Iterable[int], rank: int):
        legs = [int(k) for k in legs]
        if len(set(legs)) != len(legs):
            raise QuantumDataError(f"improper party: duplicate legs in {legs}")
        if any(k < 0 or k >= rank for k in legs):
            raise QuantumDataError(f"improper party: legs {legs} out of range for rank {rank}")
        if not legs or len(legs) == rank:
            raise QuantumDataError(f"improper party: {legs} must be a non-empty proper subset")
        self.legs = tuple(sorted(legs))
        self.rank = rank

    def complement(self) -> "PartySelector":
        return PartySelector([k for k in range(self.rank) if k not in self.legs], self.rank)

    def __repr__(self):
        return f"PartySelector({list(self.legs)}, rank={self.rank})"


def _party(party, rank: int) -> PartySelector:
    if isinstance(party, PartySelector):
        if party.rank != rank:
            raise QuantumDataError(f"improper party: selector rank {party.rank} != {rank}")
        return party
    return PartySelector(party, rank)


def direct_product(a: StateVector, b: StateVector) -> StateVector:
    """Direct product; the legs of ``a`` come first."""
    return StateVector(np.multiply.outer(a.data, b.data))


def norm(a: StateVector) -> float:
    return float(np.linalg.norm(a.data.reshape(-1)))


def renormalize(a: StateVector) -> StateVector:
    n = norm(a)
    if n == 0.0:
        raise QuantumDataError("zero-norm state")
    return StateVector(a.data / n)


def dyad(a: StateVector) -> DensityOperator:
    """The projector-like operator ``|a><a|`` (not normalized)."""
    return DensityOperator(np.multiply.outer(a.data, a.data.conj()))


def partial_trace(rho: DensityOperator, keep) -> DensityOperator:
    """Trace out every leg not in ``keep``.  Kept legs stay in ascending order."""
    rank = rho.rank
    keep = _party(keep, rank)
    kets = list(range(rank))
    bras = [rank + k if k in keep.legs else k for k in range(rank)]
    out = list(keep.legs) + [rank + k for k in keep.legs]
    return DensityOperator(np.einsum(rho.data, kets + bras, out))


def partial_transpose(rho: DensityOperator, party) -> DensityOperator:
    """Swap ket and bra indices on the legs of ``party``."""
    rank = rho.rank
    party = _party(party, rank)
    axes = list(range(2 * rank))
    for k in party.legs:
        axes[k], axes[rank + k] = axes[rank + k], axes[k]
    return DensityOperator(rho.data.transpose(axes))


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Accepts a square array or a :class:`DensityOperator` (its flat matrix).
    Each rotation first removes the phase of the pivot element, turning the
    2x2 block real symmetric, then applies the classical Jacobi rotation.
    """
    if isinstance(m, DensityOperator):
        m = m.matrix()
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise QuantumDataError(f"square matrix expected, got shape {a.shape}")
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-9 * scale:
        raise QuantumDataError("matrix is not Hermitian within 1e-9")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    tol = JACOBI_TOLERANCE * scale

    off = _off_norm(a)
    for _ in range(JACOBI_MAX_SWEEPS):
        if off <= tol:
            return np.sort(np.real(np.diag(a)))
        _jacobi_sweep(a, 1e-20 * scale)
        off = _off_norm(a)
    if off <= tol:
        return np.sort(np.real(np.diag(a)))
    raise EigensolverError(
        f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps "
        f"(dimension {n}, off-diagonal norm {off:.3e})")


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def _jacobi_sweep(a: np.ndarray, skip_below: float = 0.0) -> None:
    n = a.shape[0]
    u2 = np.empty((2, 2), dtype=np.complex128)
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = complex(a[p, q])
            mag = abs(apq)
            # negligible pivots: rotating on a subnormal value loses unitarity
            if mag <= skip_below or mag < 1e-150:
                continue
            phase = apq / mag
            theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
            if abs(theta) > 1e150:
                t = 0.5 / theta
            else:
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            # columns p, q of the unitary: diag(1, conj(phase)) @ [[c, s], [-s, c]]
            u2[0, 0] = c
            u2[0, 1] = s
            u2[1, 0] = -s * phase.conjugate()
            u2[1, 1] = c * phase.conjugate()
            cols = a[:, (p, q)] @ u2
            a[:, p] = cols[:, 0]
            a[:, q] = cols[:, 1]
            rows = u2.conj().T @ a[(p, q), :]
            a[p, :] = rows[0]
            a[q, :] = rows[1]
            a[p, q] = a[q, p] = 0.0
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real


def negativity(rho: DensityOperator, party) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    ev = hermitian_eigenvalues(partial_transpose(rho, party))
    return float(np.sum(np.maximum(0.0, -ev)))
