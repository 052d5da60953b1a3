"""Concrete elements: the mode and qbit families, Jaynes-Cummings, and a
lowering-operator coupling of arbitrary arity (the synthetic ternary
interaction is its three-leg instance).

Conventions
-----------
Mode:  ``H = -delta a^dag a + i (eta a^dag - conj(eta) a)``, jump ``sqrt(2 kappa) a``.
Qbit:  the same with ``a -> sigma = |g><e|`` and ``kappa -> gamma``; basis ``(g, e)``.
JC:    ``H = i (conj(g) a sigma^dag - g a^dag sigma)``, legs ``(qbit, mode)``.

The non-Hermitian Hamiltonian adds ``-(i/2) J^dag J = -i kappa n``.  In the
unitary interaction picture (UIP) the ``-delta n`` part goes into the exact
propagator; in the full interaction picture (IP) ``(-delta - i kappa) n``
does, which makes the propagator non-unitary when the element is lossy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .qdata import QuantumDataError, StateVector
from .qop import DiagonalPropagator, ProductTerm, Tridiagonal
from .structure import Free, Interaction, JumpChannel


class Picture(Enum):
    Sch = "Sch"
    UIP = "UIP"
    IP = "IP"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ParsMode:
    delta: float = 0.0
    kappa: float = 0.0
    eta: complex = 0j
    cutoff: int = 10
    minit: complex = 0j
    minitFock: int = 0
    minitFock_set: bool = False

    def __post_init__(self):
        if self.cutoff < 2:
            raise ValueError(f"cutoff must be at least 2, got {self.cutoff}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if self.minitFock < 0:
            raise ValueError(f"minitFock must be non-negative, got {self.minitFock}")


@dataclass(frozen=True)
class ParsQbit:
    delta: float = 0.0
    gamma: float = 0.0
    eta: complex = 0j
    qbitInit: tuple[complex, complex] = (1.0 + 0j, 0j)

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")


@dataclass(frozen=True)
class ParsJC:
    g: complex = 0j


# --- mode and qbit families ------------------------------------------------------

class _Oscillator(Free):
    """Shared construction for the truncated-oscillator families.

    Subclasses fix ``lossy``, ``pumped`` and the picture they realize; the
    maker functions pick the subclass.
    """

    lossy = False
    pumped = False
    picture = Picture.IP
    jump_label = "loss"

    def __init__(self, dim: int, delta: float, loss: float, eta: complex,
                 label: str | None = None):
        super().__init__(dim, label)
        self.delta = float(delta)
        self.loss = float(loss)
        self.eta = complex(eta)
        n = np.arange(dim, dtype=float)
        loss = self.loss if self.lossy else 0.0
        eta = self.eta if self.pumped else 0j

        if self.picture is Picture.Sch:
            diag = -self.delta * n - 1j * loss * n
            self._propagator = None
        elif self.picture is Picture.UIP and self.lossy:
            diag = -1j * loss * n
            self._propagator = DiagonalPropagator(0, 1j * self.delta * n)
        else:
            diag = np.zeros(dim)
            self._propagator = DiagonalPropagator(0, (1j * self.delta - loss) * n)

        freqs = self.freqs
        root = np.sqrt(np.arange(1, dim))
        terms = []
        if np.any(diag != 0) or eta != 0:
            op = Tridiagonal(dim, 1, diagonal=diag, upper=-1j * eta.conjugate() * root,
                             lower=1j * eta * root, freqs=freqs)
            terms.append(ProductTerm(1.0, {0: op}))
        self._terms = tuple(terms)
        if self.lossy and loss > 0:
            self._jumps = (JumpChannel(
                f"{self.label}:{self.jump_label}",
                ProductTerm(math.sqrt(2.0 * loss), {0: Tridiagonal.annihilation(dim, freqs)})),)

    def lowering(self) -> Tridiagonal:
        return Tridiagonal.annihilation(self.dim, self.freqs)

    def raising(self) -> Tridiagonal:
        return Tridiagonal.creation(self.dim, self.freqs)


class ModeBase(_Oscillator):
    label = "mode"
    display_key = ("<n>", "Var(n)", "Re<a>", "Im<a>")
    jump_label = "photon loss"

    def __init__(self, delta: float, kappa: float, eta: complex, cutoff: int,
                 label: str | None = None):
        super().__init__(cutoff, delta, kappa, eta, label)

    @property
    def kappa(self) -> float:
        return self.loss

    def averages(self, rho: np.ndarray) -> list[float]:
        n = np.arange(self.dim)
        pops = np.real(np.diag(rho))
        mean = float(pops @ n)
        var = float(pops @ n**2) - mean**2
        a = complex(np.sum(np.sqrt(n[1:]) * np.diag(rho, -1)))
        return [mean, var, a.real, a.imag]


class QbitBase(_Oscillator):
    label = "qbit"
    display_key = ("P_e", "Re<sigma>", "Im<sigma>")
    jump_label = "decay"

    def __init__(self, delta: float, gamma: float, eta: complex, label: str | None = None):
        super().__init__(2, delta, gamma, eta, label)

    @property
    def gamma(self) -> float:
        return self.loss

    def averages(self, rho: np.ndarray) -> list[float]:
        s = complex(rho[1, 0])
        return [float(rho[1, 1].real), s.real, s.imag]


def _variant_name(stem: str, lossy: bool, pumped: bool, picture: Picture) -> str:
    prefix = ("Pumped" if pumped else "") + ("Lossy" if lossy else "")
    if picture is Picture.Sch:
        suffix = "Sch"
    elif picture is Picture.UIP and lossy:
        suffix = "UIP"
    else:
        # without loss the two interaction pictures coincide
        suffix = ""
    return f"{prefix}{stem}{suffix}"


def _build_family(base, stem) -> dict[str, type]:
    family = {}
    for lossy in (False, True):
        for pumped in (False, True):
            for picture in Picture:
                name = _variant_name(stem, lossy, pumped, picture)
                if name in family:
                    continue
                if picture is Picture.UIP and not lossy:
                    picture = Picture.IP
                family[name] = type(name, (base,), {
                    "lossy": lossy, "pumped": pumped, "picture": picture,
                    "__doc__": f"{name} variant of the {base.label} family."})
    return family


MODE_VARIANTS = _build_family(ModeBase, "Mode")
QBIT_VARIANTS = _build_family(QbitBase, "Qbit")
globals().update(MODE_VARIANTS)
globals().update(QBIT_VARIANTS)


def _picture(picture) -> Picture:
    return picture if isinstance(picture, Picture) else Picture(str(picture))


def make_mode(p: ParsMode, picture=Picture.UIP, label: str | None = None) -> ModeBase:
    """Pick the cheapest mode variant able to represent ``p`` in ``picture``."""
    picture = _picture(picture)
    name = _variant_name("Mode", p.kappa != 0, p.eta != 0, picture)
    return MODE_VARIANTS[name](p.delta, p.kappa, p.eta, p.cutoff, label)


def make_qbit(p: ParsQbit, picture=Picture.UIP, label: str | None = None) -> QbitBase:
    picture = _picture(picture)
    name = _variant_name("Qbit", p.gamma != 0, p.eta != 0, picture)
    return QBIT_VARIANTS[name](p.delta, p.gamma, p.eta, label)


# --- initial states --------------------------------------------------------------

def coherent(alpha: complex, cutoff: int) -> StateVector:
    """Truncated coherent state, renormalized on the truncated space."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    amps = np.empty(cutoff, dtype=np.complex128)
    amps[0] = 1.0
    for n in range(1, cutoff):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return StateVector(amps / np.linalg.norm(amps))


def fock(n: int, cutoff: int) -> StateVector:
    if not 0 <= n < cutoff:
        raise QuantumDataError(f"Fock index exceeds cutoff: {n} >= {cutoff}")
    return StateVector.basis((cutoff,), n)


def mode_init(p: ParsMode) -> StateVector:
    """Fock state if ``minitFock`` is nonzero or was set explicitly, else coherent."""
    if p.minitFock != 0 or p.minitFock_set:
        if p.minitFock >= p.cutoff:
            raise QuantumDataError(
                f"Fock index exceeds cutoff: minitFock={p.minitFock}, cutoff={p.cutoff}")
        return fock(p.minitFock, p.cutoff)
    return coherent(p.minit, p.cutoff)


def state0() -> StateVector:
    return StateVector([1.0, 0.0])


def state1() -> StateVector:
    return StateVector([0.0, 1.0])


def qbit_init(p: ParsQbit) -> StateVector:
    v = np.array(p.qbitInit, dtype=np.complex128)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise QuantumDataError("zero-norm state: qbitInit is the zero vector")
    return StateVector(v / nrm)


# --- interactions ----------------------------------------------------------------

class JaynesCummings(Interaction):
    label = "JC"

    def __init__(self, qbit: QbitBase, mode: ModeBase, g, label: str | None = None):
        super().__init__((qbit, mode), label)
        self.g = complex(g.g if isinstance(g, ParsJC) else g)
        if self.g != 0:
            self._terms = (
                ProductTerm(1j * self.g.conjugate(), {0: qbit.raising(), 1: mode.lowering()}),
                ProductTerm(-1j * self.g, {0: qbit.lowering(), 1: mode.raising()}),
            )


def _lowering(free: Free) -> Tridiagonal:
    return Tridiagonal.annihilation(free.dim, free.freqs)


def _raising(free: Free) -> Tridiagonal:
    return Tridiagonal.creation(free.dim, free.freqs)


class LoweringCoupling(Interaction):
    """``c * (A_0 x A_1 x ...) + h.c.`` with ``A_k`` the lowering operator of leg ``k``."""

    label = "coupling"

    def __init__(self, frees: Sequence[Free], coupling, label: str | None = None):
        if len(frees) < 2:
            raise ValueError("a coupling needs at least two legs")
        super().__init__(frees, label)
        self.coupling = complex(coupling)
        if self.coupling != 0:
            self._terms = (
                ProductTerm(self.coupling, {k: _lowering(f) for k, f in enumerate(self.frees)}),
                ProductTerm(self.coupling.conjugate(),
                            {k: _raising(f) for k, f in enumerate(self.frees)}),
            )


def make_jaynes_cummings(qbit, mode, p) -> JaynesCummings:
    return JaynesCummings(qbit, mode, p)


def make_ternary_demo(f0: Free, f1: Free, f2: Free, coupling) -> LoweringCoupling:
    return LoweringCoupling((f0, f1, f2), coupling, label="ternary")
