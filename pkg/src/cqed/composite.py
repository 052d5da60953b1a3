"""Composite systems: a row of frees wired together by interactions.

Each :class:`Act` names, for every leg of its interaction, the ordinal of
the free that leg attaches to.  Ordinals start at 0 and leg order inside an
Act matters.  The layout is checked when the composite is built; any
inconsistency raises a :class:`LayoutError` subclass.

A :class:`Composite` is the object the evolution drivers consume.  It
flattens all contributions into lists of product terms on global legs, so a
single free or interaction instance may appear several times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .qdata import DensityOperator, StateVector, partial_trace
from .qop import (DimensionMismatch, ProductTerm, Tridiagonal, apply_product_term,
                  apply_propagator)
from .structure import Free, Interaction


class LayoutError(ValueError):
    pass


class DuplicateLegError(LayoutError):
    pass


class LegDimensionError(LayoutError):
    pass


class UnreferencedFreeError(LayoutError):
    pass


class NonUnitaryPictureError(RuntimeError):
    pass


@dataclass(frozen=True)
class Act:
    legs: tuple[int, ...]
    interaction: Interaction

    def __init__(self, *args):
        # Act(1, 0, interaction) or Act((1, 0), interaction)
        *legs, interaction = args
        if len(legs) == 1 and not isinstance(legs[0], (int, np.integer)):
            legs = legs[0]
        object.__setattr__(self, "legs", tuple(int(k) for k in legs))
        object.__setattr__(self, "interaction", interaction)


@dataclass(frozen=True)
class Channel:
    free: int
    label: str
    operator: ProductTerm


class Composite:
    """A validated layout of frees and Acts.

    Parameters
    ----------
    frees : sequence of Free
        The row of frees; position in the row is the ordinal used by Acts.
    acts : sequence of Act
    """

    def __init__(self, frees: Sequence[Free], acts: Sequence[Act] = ()):
        self.frees = tuple(frees)
        self.acts = tuple(acts)
        if not self.frees:
            raise LayoutError("a composite needs at least one free")
        self.dims = tuple(f.dim for f in self.frees)
        self._validate()

        terms: list[ProductTerm] = []
        for i, f in enumerate(self.frees):
            terms.extend(t.relabel((i,)) for t in f.hamiltonian_terms)
        for act in self.acts:
            terms.extend(t.relabel(act.legs) for t in act.interaction.hamiltonian_terms)
        self.terms = tuple(_merge_single_leg(terms))

        channels = []
        for i, f in enumerate(self.frees):
            channels.extend(Channel(i, ch.label, ch.operator.relabel((i,))) for ch in f.jumps)
        for act in self.acts:
            channels.extend(Channel(act.legs[0], ch.label, ch.operator.relabel(act.legs))
                            for ch in act.interaction.jumps)
        self.channels = tuple(channels)

        self.propagators = tuple(f.propagator.on_leg(i) for i, f in enumerate(self.frees)
                                 if f.propagator is not None)

    def _validate(self):
        n = len(self.frees)
        referenced = set()
        for k, act in enumerate(self.acts):
            legs = act.legs
            inter = act.interaction
            if len(set(legs)) != len(legs):
                raise DuplicateLegError(f"duplicate leg ordinal in act #{k}: {legs}")
            if len(legs) != inter.arity:
                raise LayoutError(
                    f"layout inconsistency at act #{k}: {len(legs)} ordinals for an "
                    f"interaction with {inter.arity} legs")
            for j, o in enumerate(legs):
                if not 0 <= o < n:
                    raise LayoutError(
                        f"layout inconsistency at act #{k} leg #{j}: ordinal {o} outside 0..{n - 1}")
                if inter.dims[j] != self.frees[o].dim:
                    raise LegDimensionError(
                        f"layout inconsistency at act #{k} leg #{j}: interaction leg has dim "
                        f"{inter.dims[j]}, free #{o} has dim {self.frees[o].dim}")
            referenced.update(legs)
        if n > 1:
            missing = [i for i in range(n) if i not in referenced]
            if missing:
                raise UnreferencedFreeError(
                    f"layout inconsistency: free #{missing[0]} is not referenced by any act")

    # --- shape ---------------------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def check_dims(self, shape) -> None:
        if tuple(shape[: self.rank]) != self.dims:
            raise DimensionMismatch(f"state/system dimension mismatch: {tuple(shape)} vs {self.dims}")

    # --- dynamics ------------------------------------------------------------

    def add_hamiltonian(self, t: float, psi: np.ndarray, dpsidt: np.ndarray) -> np.ndarray:
        """``dpsidt += -i H psi`` over the ket legs of ``psi``."""
        self.check_dims(psi.shape)
        for term in self.terms:
            apply_product_term(term, t, psi, dpsidt, -1j)
        return dpsidt

    def jump_rates(self, psi: np.ndarray, t: float = 0.0) -> np.ndarray:
        rates = np.empty(len(self.channels))
        norm2 = float(np.vdot(psi, psi).real)
        for m, ch in enumerate(self.channels):
            jpsi = self.apply_jump(m, psi, t)
            rates[m] = float(np.vdot(jpsi, jpsi).real) / norm2
        return rates

    def apply_jump(self, m: int, psi: np.ndarray, t: float = 0.0) -> np.ndarray:
        out = np.zeros_like(psi)
        apply_product_term(self.channels[m].operator, t, psi, out)
        return out

    def jump_channels(self, t: float, psi) -> list[tuple[int, str, float, Callable]]:
        """``(free ordinal, label, rate, apply)`` in free order, then element order."""
        x = psi.data if isinstance(psi, StateVector) else psi
        rates = self.jump_rates(x, t)
        return [(ch.free, ch.label, float(r), lambda y, m=m: self.apply_jump(m, y, t))
                for m, (ch, r) in enumerate(zip(self.channels, rates))]

    @property
    def unitary(self) -> bool:
        return all(u.unitary for u in self.propagators)

    def apply_propagators(self, t: float, arr: np.ndarray, direction: str = "forward",
                          density: bool = False) -> np.ndarray:
        """Apply every free's exact propagator in place (bra legs too if ``density``)."""
        if t == 0:
            return arr
        for u in self.propagators:
            apply_propagator(u, t, arr, direction)
            if density:
                apply_propagator(u, t, arr, direction, leg=self.rank + u.leg, conjugate=True)
        return arr

    # --- display -------------------------------------------------------------

    @property
    def display_blocks(self) -> list[tuple[str, tuple[str, ...]]]:
        blocks = [(f.label, tuple(f.display_key)) for f in self.frees]
        for act in self.acts:
            if act.interaction.display_key:
                blocks.append((act.interaction.label, tuple(act.interaction.display_key)))
        return blocks

    def reduced(self, state, legs: Sequence[int]) -> np.ndarray:
        """Trace-normalized reduced density matrix on ``legs`` (in that order)."""
        legs = list(legs)
        if isinstance(state, DensityOperator):
            if len(legs) == self.rank:
                rho = state.data
            else:
                rho = partial_trace(state, legs).data
            order = sorted(legs)
            perm = [order.index(k) for k in legs]
            r = len(legs)
            rho = rho.transpose(perm + [r + p for p in perm])
            d = math.prod(self.dims[k] for k in legs)
            m = rho.reshape(d, d)
        else:
            x = state.data if isinstance(state, StateVector) else np.asarray(state)
            others = [k for k in range(self.rank) if k not in legs]
            d = math.prod(self.dims[k] for k in legs)
            v = np.transpose(x, legs + others).reshape(d, -1)
            m = v @ v.conj().T
        return m / np.trace(m).real

    def display(self, t: float, state) -> list[list[float]]:
        """Per-block averages: frees in order, then interactions with a display key."""
        blocks = [f.averages(self.reduced(state, [i])) for i, f in enumerate(self.frees)]
        for act in self.acts:
            if act.interaction.display_key:
                blocks.append(act.interaction.averages(self.reduced(state, act.legs)))
        return blocks

    # --- dense oracles ---------------------------------------------------------

    def dense_hamiltonian(self) -> np.ndarray:
        """Dense non-propagated ``H_nh`` at dressing time 0."""
        d = self.total_dim
        h = np.zeros((d, d), dtype=np.complex128)
        for term in self.terms:
            h += term.dense(self.dims)
        return h

    def __repr__(self):
        return f"Composite(dims={self.dims}, acts={[a.legs for a in self.acts]})"


class BinarySystem(Composite):
    """Two frees coupled by one interaction; the layout follows from the interaction."""

    def __init__(self, interaction: Interaction):
        if interaction.arity != 2:
            raise LayoutError(f"BinarySystem needs a two-leg interaction, got {interaction.arity}")
        super().__init__(interaction.frees, (Act((0, 1), interaction),))


def make_binary(interaction: Interaction) -> BinarySystem:
    return BinarySystem(interaction)


def make_composite(frees: Sequence[Free], *acts: Act) -> Composite:
    if len(acts) == 1 and not isinstance(acts[0], Act):
        acts = tuple(acts[0])
    return Composite(frees, acts)


def as_system(obj) -> Composite:
    """Wrap a lone free as a one-leg composite; composites pass through."""
    if isinstance(obj, Composite):
        return obj
    if isinstance(obj, Free):
        return Composite((obj,))
    if isinstance(obj, Interaction) and obj.arity == 2:
        return BinarySystem(obj)
    raise TypeError(f"cannot evolve a {type(obj).__name__}")


def _merge_single_leg(terms: list[ProductTerm]) -> list[ProductTerm]:
    """Sum one-leg terms acting on the same leg with the same dressing."""
    merged: dict[int, list[Tridiagonal]] = {}
    rest = []
    for term in terms:
        if len(term.factors) == 1:
            (leg, op), = term.factors.items()
            op = op.scaled(term.coefficient)
            bucket = merged.setdefault(leg, [])
            for i, other in enumerate(bucket):
                if other.offset == op.offset and _freqs_equal(other.freqs, op.freqs):
                    bucket[i] = other + op
                    break
            else:
                bucket.append(op)
        else:
            rest.append(term)
    out = [ProductTerm(1.0, {leg: op}) for leg, ops in merged.items() for op in ops]
    return out + rest


def _freqs_equal(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and bool(np.all(a == b))
