"""Time-evolution drivers: single MCWF trajectory, master equation, ensemble.

Pictures
--------
The stored state is always in the Schrödinger picture.  Each adaptive step
from ``t`` to ``t + dt`` integrates the interaction-picture equation on the
local time ``tau in [0, dt]`` (operators dressed at ``tau``) and then applies
the exact propagators for ``dt``.  Jump rates and displays therefore need
no picture transformation.

MCWF step
---------
1. ``dt`` is the stepper's proposal, clamped to the display target and
   shrunk so that ``R dt <= dpLimit`` with ``R`` the total jump rate.
2. The non-Hermitian evolution runs through :func:`~cqed.ode.ode_step`.
3. ``dp = 1 - |psi|^2`` is the probability lost over the step.  One uniform
   ``r`` is drawn; if ``r < dp`` a channel is picked from the cumulative
   rates using ``r / dp`` and applied.  The state is then renormalized.
4. ``jumpProximity = r - dp``: negative exactly when a jump happened.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .composite import Composite, NonUnitaryPictureError, as_system
from .ode import ode_step
from .qdata import DensityOperator, PartySelector, StateVector, dyad, negativity
from .qop import apply_product_term

EVOL_MODES = ("single", "ensemble", "master")


class EvolutionError(RuntimeError):
    pass


@dataclass
class ParsEvolution:
    evol: str = "single"
    T: float = 1.0
    Dt: float = 0.1
    dc: int = 0
    eps: float = 1e-6
    epsAbs: float = 1e-12
    dpLimit: float = 0.01
    seed: int = 1001
    nTraj: int = 100
    workers: int = 1

    def __post_init__(self):
        if self.evol not in EVOL_MODES:
            raise ValueError(f"evol must be one of {EVOL_MODES}, got {self.evol!r}")
        if self.T < 0 or self.Dt < 0 or self.dc < 0:
            raise ValueError("T, Dt and dc must be non-negative")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not 0 < self.dpLimit < 1:
            raise ValueError(f"dpLimit must lie in (0, 1), got {self.dpLimit}")
        if self.nTraj < 1:
            raise ValueError(f"nTraj must be at least 1, got {self.nTraj}")


@dataclass
class OdeStepperState:
    dt: float


@dataclass
class TrajectoryState:
    t: float
    state: np.ndarray
    rng: np.random.Generator | None
    stepper: OdeStepperState


@dataclass
class DisplayRow:
    t: float
    dtDid: float
    blocks: list[list[float]]
    jumpProximity: float | None = None
    negativity: float | None = None
    jumpLabels: tuple[str, ...] = ()


@dataclass
class StepReport:
    dt_did: float
    jump_proximity: float | None = None
    jump_label: str | None = None


def initial_stepsize(pars: ParsEvolution) -> float:
    base = pars.Dt if pars.Dt > 0 else (pars.T if pars.T > 0 else 1.0)
    return base / 10.0


def _min_dt(pars: ParsEvolution) -> float:
    return 1e-12 * max(pars.T, 1.0)


def _party_legs(system: Composite, party) -> PartySelector | None:
    if party is None:
        return None
    if isinstance(party, PartySelector):
        return party
    return PartySelector(list(party), system.rank)


class _Driver:
    """Shared bookkeeping of the MCWF and master drivers."""

    def __init__(self, system, pars: ParsEvolution, party=None):
        self.system = as_system(system)
        self.pars = pars
        self.party = _party_legs(self.system, party)
        self.dt_did = 0.0
        self.steps = 0

    @property
    def t(self) -> float:
        return self.traj.t

    def _advance(self, t_target: float, dt: float, derivative):
        ts = self.traj
        remaining = t_target - ts.t
        y, _, used, dt_next = ode_step(derivative, ts.state, 0.0, dt, self.pars.eps,
                                       self.pars.epsAbs, _min_dt(self.pars))
        ts.stepper.dt = dt_next
        t_new = t_target if used == remaining else ts.t + used
        self.dt_did = used
        self.steps += 1
        return y, used, t_new


class MCWFTrajectory(_Driver):
    """A single Monte Carlo wave-function trajectory."""

    kind = "single"

    def __init__(self, system, psi0, pars: ParsEvolution, seed: int | None = None,
                 state: TrajectoryState | None = None):
        super().__init__(system, pars)
        if state is None:
            psi = np.array(psi0.data if isinstance(psi0, StateVector) else psi0,
                           dtype=np.complex128)
            self.system.check_dims(psi.shape)
            psi /= np.linalg.norm(psi)
            rng = np.random.default_rng(pars.seed if seed is None else seed)
            state = TrajectoryState(0.0, psi, rng, OdeStepperState(initial_stepsize(pars)))
        else:
            self.system.check_dims(state.state.shape)
        self.traj = state
        self.min_proximity: float | None = None
        self.labels: list[str] = []

    @property
    def psi(self) -> np.ndarray:
        return self.traj.state

    def _derivative(self, tau, y):
        out = np.zeros_like(y)
        self.system.add_hamiltonian(tau, y, out)
        return out

    def step(self, t_target: float) -> StepReport:
        ts, system, pars = self.traj, self.system, self.pars
        dt = min(ts.stepper.dt, t_target - ts.t)
        lossy = bool(system.channels)
        if lossy:
            total = float(np.sum(system.jump_rates(ts.state)))
            if total * dt > pars.dpLimit:
                dt = pars.dpLimit / total
        y, used, t_new = self._advance(t_target, dt, self._derivative)
        system.apply_propagators(used, y, "forward")
        report = StepReport(used)
        if lossy:
            dp = 1.0 - float(np.vdot(y, y).real)
            r = float(ts.rng.random())
            if r < dp:
                rates = system.jump_rates(y)
                cum = np.cumsum(rates)
                m = int(np.searchsorted(cum / cum[-1], r / dp, side="right"))
                m = min(m, len(rates) - 1)
                y = system.apply_jump(m, y)
                report.jump_label = system.channels[m].label
                self.labels.append(report.jump_label)
            nrm = np.linalg.norm(y)
            if nrm == 0.0:
                raise EvolutionError("zero-norm state after jump")
            y /= nrm
            report.jump_proximity = r - dp
            if self.min_proximity is None or report.jump_proximity < self.min_proximity:
                self.min_proximity = report.jump_proximity
        ts.state = y
        ts.t = t_new
        return report

    def display(self) -> DisplayRow:
        prox = 1.0 if self.min_proximity is None else self.min_proximity
        row = DisplayRow(self.t, self.dt_did, self.system.display(self.t, self.psi), prox,
                         jumpLabels=tuple(self.labels))
        self.min_proximity = None
        self.labels = []
        return row


class MasterEquation(_Driver):
    """Deterministic evolution of the density operator."""

    kind = "master"

    def __init__(self, system, initial, pars: ParsEvolution, party=None,
                 state: TrajectoryState | None = None):
        super().__init__(system, pars, party)
        if not self.system.unitary:
            raise NonUnitaryPictureError(
                "Master-equation evolution does not work with non-unitary interaction picture")
        if state is None:
            if isinstance(initial, DensityOperator):
                rho = initial.data.copy()
            else:
                psi = initial.data if isinstance(initial, StateVector) else np.asarray(initial)
                rho = dyad(StateVector(psi)).data
            self.system.check_dims(rho.shape)
            rho = rho / np.trace(rho.reshape(self.system.total_dim, -1)).real
            state = TrajectoryState(0.0, rho, None, OdeStepperState(initial_stepsize(pars)))
        self.traj = state

    @property
    def rho(self) -> DensityOperator:
        return DensityOperator(self.traj.state)

    def _dagger(self, x: np.ndarray) -> np.ndarray:
        r = self.system.rank
        return np.ascontiguousarray(x.conj().transpose(list(range(r, 2 * r)) + list(range(r))))

    def derivative(self, tau: float, rho: np.ndarray) -> np.ndarray:
        """``-i H rho + h.c. + sum_m J_m rho J_m^dag`` with the kernel acting on ket legs."""
        out = np.zeros_like(rho)
        self.system.add_hamiltonian(tau, rho, out)
        out += self._dagger(out)
        for ch in self.system.channels:
            y = np.zeros_like(rho)
            apply_product_term(ch.operator, tau, rho, y)
            z = np.zeros_like(rho)
            apply_product_term(ch.operator, tau, self._dagger(y), z)
            out += self._dagger(z)
        return out

    def step(self, t_target: float) -> StepReport:
        ts = self.traj
        dt = min(ts.stepper.dt, t_target - ts.t)
        y, used, t_new = self._advance(t_target, dt, self.derivative)
        self.system.apply_propagators(used, y, "forward", density=True)
        ts.state = y
        ts.t = t_new
        return StepReport(used)

    def display(self) -> DisplayRow:
        rho = self.rho
        row = DisplayRow(self.t, self.dt_did, self.system.display(self.t, rho))
        if self.party is not None:
            row.negativity = _negativity(rho, self.party)
        return row


def _negativity(rho: DensityOperator, party: PartySelector) -> float:
    tr = rho.trace().real
    return negativity(DensityOperator(rho.data / tr), party)


# --- display loops -----------------------------------------------------------------

Observer = Callable[[DisplayRow], None]


def run_dt(traj, T: float, Dt: float, observer: Observer | None = None,
           display_initial: bool = True):
    """Display at every multiple of ``Dt`` up to ``T`` and at ``T``."""
    if Dt <= 0:
        raise ValueError(f"Dt must be positive, got {Dt}")
    rows = []
    emit = _emitter(rows, observer)
    if display_initial:
        emit(traj.display())
    while traj.t < T:
        n = math.floor(traj.t / Dt + 1e-9) + 1
        target = min(n * Dt, T)
        if target - traj.t <= 1e-12 * max(Dt, 1.0):
            # the previous landing already sits on this grid point
            target = min((n + 1) * Dt, T)
        while traj.t < target:
            traj.step(target)
        emit(traj.display())
    return rows


def run(traj, T: float, dc: int, observer: Observer | None = None, display_initial: bool = True):
    """Display every ``dc`` adaptive steps, and at ``T``."""
    if dc < 1:
        raise ValueError(f"dc must be at least 1, got {dc}")
    rows = []
    emit = _emitter(rows, observer)
    if display_initial:
        emit(traj.display())
    count = 0
    shown = True
    while traj.t < T:
        traj.step(T)
        count += 1
        shown = False
        if count % dc == 0:
            emit(traj.display())
            shown = True
    if not shown:
        emit(traj.display())
    return rows


def _emitter(rows, observer):
    def emit(row):
        rows.append(row)
        if observer is not None:
            observer(row)
    return emit


# --- ensemble ------------------------------------------------------------------------

def display_times(T: float, Dt: float, t0: float = 0.0) -> list[float]:
    times = [t0]
    t = t0
    while t < T:
        n = math.floor(t / Dt + 1e-9) + 1
        target = min(n * Dt, T)
        if target - t <= 1e-12 * max(Dt, 1.0):
            target = min((n + 1) * Dt, T)
        times.append(target)
        t = target
    return times


def _member(args):
    system, psi0, pars, seed = args
    traj = MCWFTrajectory(system, psi0, pars, seed=seed)
    states, dts = [traj.psi.copy()], [0.0]

    def grab(row):
        states.append(traj.psi.copy())
        dts.append(traj.dt_did)

    run_dt(traj, pars.T, pars.Dt, grab, display_initial=False)
    return np.array(states), np.array(dts)


def ensemble_states(system, psi0, pars: ParsEvolution, workers: int | None = None):
    """Per-member normalized states at every display time.

    Returns ``(times, states, dts)`` with ``states`` of shape
    ``(nTraj, nTimes) + dims``.  Member ``k`` is seeded with ``seed + k``.
    """
    system = as_system(system)
    if pars.Dt <= 0:
        raise ValueError("ensemble evolution needs Dt > 0")
    workers = pars.workers if workers is None else workers
    jobs = [(system, psi0, pars, pars.seed + k) for k in range(pars.nTraj)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_member, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_member(j) for j in jobs]
    states = np.stack([r[0] for r in results])
    dts = np.stack([r[1] for r in results])
    return display_times(pars.T, pars.Dt), states, dts


class _EnsembleView:
    def __init__(self, system, t, rho, dt, party):
        self.system, self.t, self.rho, self.dt, self.party = system, t, rho, dt, party

    def display(self) -> DisplayRow:
        row = DisplayRow(self.t, self.dt, self.system.display(self.t, self.rho))
        if self.party is not None:
            row.negativity = _negativity(self.rho, self.party)
        return row


def ensemble_run(system, psi0, pars: ParsEvolution, observer: Observer | None = None,
                 party=None, workers: int | None = None) -> list[DisplayRow]:
    """Average ``nTraj`` trajectories into one density operator per display time."""
    system = as_system(system)
    times, states, dts = ensemble_states(system, psi0, pars, workers)
    return average_rows(system, times, states, dts, observer, party)


def average_rows(system, times, states, dts, observer: Observer | None = None,
                 party=None) -> list[DisplayRow]:
    """Display rows of the member average, reduced in member order."""
    system = as_system(system)
    party = _party_legs(system, party)
    n = states.shape[0]
    rows = []
    emit = _emitter(rows, observer)
    for j, t in enumerate(times):
        rho = np.zeros(system.dims * 2, dtype=np.complex128)
        dt = 0.0
        for k in range(n):
            psi = states[k, j]
            rho += np.multiply.outer(psi, psi.conj())
            dt += dts[k, j]
        rho /= n
        emit(_EnsembleView(system, t, DensityOperator(rho), dt / n, party).display())
    return rows


# --- dispatcher ----------------------------------------------------------------------

def make_driver(system, psi0, pars: ParsEvolution, party=None, state=None):
    if pars.evol == "master":
        return MasterEquation(system, psi0, pars, party, state=state)
    if pars.evol == "single":
        if party is not None:
            raise EvolutionError("negativity requires a density-operator evolution")
        return MCWFTrajectory(system, psi0, pars, state=state)
    raise ValueError(f"no single driver for evol={pars.evol!r}")


def evolve(psi0, system, pars: ParsEvolution, party=None, observer: Observer | None = None,
           driver=None, display_initial: bool = True):
    """Dispatch on ``pars.evol`` and on the display discipline.

    A nonzero ``dc`` selects :func:`run`, otherwise :func:`run_dt` is used;
    ensembles always use the ``Dt`` discipline.  Returns the display rows;
    the driver (for single and master runs) is available as ``rows.driver``.
    """
    system = as_system(system)
    if party is not None and pars.evol == "single":
        raise EvolutionError("negativity requires a density-operator evolution")
    if pars.evol == "ensemble":
        return _Rows(ensemble_run(system, psi0, pars, observer, party), None)
    if driver is None:
        driver = make_driver(system, psi0, pars, party)
    if pars.dc != 0:
        rows = run(driver, pars.T, pars.dc, observer, display_initial)
    elif pars.Dt > 0:
        rows = run_dt(driver, pars.T, pars.Dt, observer, display_initial)
    else:
        raise EvolutionError("either dc or Dt must be nonzero")
    return _Rows(rows, driver)


class _Rows(list):
    def __init__(self, rows, driver):
        super().__init__(rows)
        self.driver = driver
