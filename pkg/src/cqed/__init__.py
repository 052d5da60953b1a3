"""Open quantum dynamics of composite cavity-QED systems.

Build frees (modes, qbits) and interactions, wire them into a composite and
evolve it as a single Monte Carlo wave-function trajectory, an ensemble of
trajectories, or through the master equation.
"""

__version__ = "0.1.0"

from .composite import (Act, BinarySystem, Composite, DuplicateLegError, LayoutError,  # noqa: E402
                        LegDimensionError, NonUnitaryPictureError, UnreferencedFreeError,
                        make_binary, make_composite)
from .elements import (JaynesCummings, LoweringCoupling, ParsJC, ParsMode, ParsQbit,  # noqa: E402
                       Picture, coherent, fock, make_jaynes_cummings, make_mode, make_qbit,
                       make_ternary_demo, mode_init, qbit_init, state0, state1)
from .evolution import (MasterEquation, MCWFTrajectory, ParsEvolution, ensemble_run,  # noqa: E402
                        evolve, run, run_dt)
from .qdata import (DensityOperator, PartySelector, StateVector, dyad, negativity,  # noqa: E402
                    partial_trace, partial_transpose)

__all__ = [
    "Act", "BinarySystem", "Composite", "DensityOperator", "DuplicateLegError",
    "JaynesCummings", "LayoutError", "LegDimensionError", "LoweringCoupling", "MCWFTrajectory",
    "MasterEquation", "NonUnitaryPictureError", "ParsEvolution", "ParsJC", "ParsMode",
    "ParsQbit", "PartySelector", "Picture", "StateVector", "UnreferencedFreeError",
    "coherent", "dyad", "ensemble_run", "evolve", "fock", "make_binary", "make_composite",
    "make_jaynes_cummings", "make_mode", "make_qbit", "make_ternary_demo", "mode_init",
    "negativity", "partial_trace", "partial_transpose", "qbit_init", "run", "run_dt",
    "state0", "state1", "__version__",
]
