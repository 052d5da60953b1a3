"""Contracts shared by every free subsystem and interaction.

An element is described by data rather than by overridden numerical
methods: the Hamiltonian part that is *not* absorbed into the exact
propagator of the active picture (a list of :class:`~cqed.qop.ProductTerm`
on the element's own legs), the jump channels, the optional diagonal
propagator, and the averaged quantities it displays.  Variants without
jumps or without a propagator simply carry none, so an absent channel is
never evaluated at zero rate.

Elements are immutable after construction and may be shared by any number
of systems and trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .qdata import DensityOperator, StateVector
from .qop import (DiagonalPropagator, DimensionMismatch, ProductTerm, apply_product_term,
                  apply_propagator)


@dataclass(frozen=True)
class JumpChannel:
    label: str
    operator: ProductTerm

    def relabel(self, legs) -> "JumpChannel":
        return JumpChannel(self.label, self.operator.relabel(legs))


class Element:
    """Common base of frees and interactions."""

    label: str = "element"
    display_key: tuple[str, ...] = ()

    def __init__(self, dims: Sequence[int], label: str | None = None):
        self.dims = tuple(int(d) for d in dims)
        if label is not None:
            self.label = label
        self._terms: tuple[ProductTerm, ...] = ()
        self._jumps: tuple[JumpChannel, ...] = ()
        self._propagator: DiagonalPropagator | None = None

    @property
    def arity(self) -> int:
        return len(self.dims)

    @property
    def hamiltonian_terms(self) -> tuple[ProductTerm, ...]:
        return self._terms

    @property
    def jumps(self) -> tuple[JumpChannel, ...]:
        return self._jumps

    @property
    def propagator(self) -> DiagonalPropagator | None:
        return self._propagator

    def averages(self, rho: np.ndarray) -> list[float]:
        """Averages from a trace-normalized density matrix on the element's legs."""
        return []

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.dims})"


class Free(Element):
    """An elementary subsystem with a single leg."""

    def __init__(self, dim: int, label: str | None = None):
        super().__init__((dim,), label)

    @property
    def dim(self) -> int:
        return self.dims[0]

    @property
    def freqs(self) -> np.ndarray | None:
        """Frequencies that dress operators of this leg into the active picture."""
        return None if self._propagator is None else self._propagator.freqs


class Interaction(Element):
    """A coupling between the frees it was built from, one leg per free."""

    label = "interaction"

    def __init__(self, frees: Sequence[Free], label: str | None = None):
        self.frees = tuple(frees)
        super().__init__([f.dim for f in self.frees], label)


def _check_dims(element: Element, shape, legs) -> None:
    for k, leg in enumerate(legs):
        if shape[leg] != element.dims[k]:
            raise DimensionMismatch(
                f"leg dimension mismatch: {element.label} leg {k} has dim "
                f"{element.dims[k]}, state leg {leg} has {shape[leg]}")


def _data(state) -> np.ndarray:
    return state.data if isinstance(state, (StateVector, DensityOperator)) else state


def add_hamiltonian_contribution(element: Element, t: float, psi, dpsidt, legs=None):
    """``dpsidt += -i H psi`` for the element's non-propagated Hamiltonian part."""
    x, out = _data(psi), _data(dpsidt)
    legs = tuple(range(element.arity)) if legs is None else tuple(legs)
    _check_dims(element, x.shape, legs)
    for term in element.hamiltonian_terms:
        apply_product_term(term.relabel(legs), t, x, out, -1j)
    return dpsidt


def jump_channels(element: Element, t: float, psi, legs=None
                  ) -> list[tuple[float, Callable[[np.ndarray], np.ndarray]]]:
    """``(rate, apply)`` pairs; ``rate = |J psi|^2 / |psi|^2``."""
    x = _data(psi)
    legs = tuple(range(element.arity)) if legs is None else tuple(legs)
    _check_dims(element, x.shape, legs)
    norm2 = float(np.vdot(x, x).real)
    out = []
    for ch in element.jumps:
        term = ch.operator.relabel(legs)

        def apply(y, term=term):
            res = np.zeros_like(y)
            apply_product_term(term, t, y, res)
            return res

        jx = apply(x)
        out.append((float(np.vdot(jx, jx).real) / norm2, apply))
    return out


def exact_propagator(element: Element) -> DiagonalPropagator | None:
    return element.propagator


def apply_exact_propagator(element: Element, t: float, psi, direction="forward", leg=0):
    u = element.propagator
    if u is not None:
        apply_propagator(u, t, _data(psi), direction, leg)
    return psi


def reduced_matrix(state) -> np.ndarray:
    """Flat density matrix of a state vector or a density operator."""
    if isinstance(state, StateVector):
        v = state.data.reshape(-1)
        return np.outer(v, v.conj())
    if isinstance(state, DensityOperator):
        return state.matrix()
    arr = np.asarray(state)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    return arr


def average(element: Element, t: float, state) -> list[float]:
    """Display values of ``element`` for a state on its legs, normalized by the trace."""
    rho = reduced_matrix(state)
    if rho.shape[0] != int(np.prod(element.dims)):
        raise DimensionMismatch(
            f"leg dimension mismatch: state dim {rho.shape[0]} vs element dims {element.dims}")
    tr = np.trace(rho).real
    return element.averages(rho / tr)
