"""Parameter blocks for the elements and the evolution drivers."""

from __future__ import annotations

from ..elements import ParsJC, ParsMode, ParsQbit, Picture
from ..evolution import EVOL_MODES, ParsEvolution
from ..qdata import PartySelector
from .parameters import (COMPLEX, COMPLEX_PAIR, INTEGER, REAL, TEXT, UNSIGNED, ParameterTable,
                         ParsGroup, enum_type)

MODE_PARAMS = (
    ("delta", "deltaC", "mode detuning", 0.0, REAL),
    ("kappa", "kappa", "mode loss rate", 0.0, REAL),
    ("eta", "eta", "mode pump amplitude", 0j, COMPLEX),
    ("cutoff", "cutoff", "Fock-space cutoff", 10, UNSIGNED),
    ("minit", "minit", "initial coherent amplitude", 0j, COMPLEX),
    ("minitFock", "minitFock", "initial Fock state, overrides minit when given", 0, UNSIGNED),
)

QBIT_PARAMS = (
    ("delta", "deltaA", "qbit detuning", 0.0, REAL),
    ("gamma", "gamma", "qbit decay rate", 0.0, REAL),
    ("eta", "etaA", "qbit pump amplitude", 0j, COMPLEX),
    ("qbitInit", "qbitInit", "initial qbit amplitudes (g);(e)", (1 + 0j, 0j), COMPLEX_PAIR),
)

JC_PARAMS = (("g", "g", "Jaynes-Cummings coupling", 0j, COMPLEX),)

EVOLUTION_PARAMS = (
    ("evol", "evol", "evolution mode", "single", enum_type(EVOL_MODES)),
    ("T", "T", "total simulated time", 1.0, REAL),
    ("Dt", "Dt", "display interval (used when dc is 0)", 0.1, REAL),
    ("dc", "dc", "adaptive steps between displays, overrides Dt when nonzero", 0, UNSIGNED),
    ("eps", "eps", "relative ODE tolerance", 1e-6, REAL),
    ("epsAbs", "epsAbs", "absolute ODE tolerance", 1e-12, REAL),
    ("dpLimit", "dpLimit", "maximal total jump probability per step", 0.01, REAL),
    ("seed", "seed", "random seed (ensemble member k uses seed+k)", 1001, UNSIGNED),
    ("nTraj", "nTraj", "number of ensemble trajectories", 100, INTEGER),
    ("workers", "workers", "worker processes for ensembles", 1, INTEGER),
)


def _mode_extra(group: ParsGroup) -> dict:
    return {"minitFock_set": group.was_set("minitFock")}


def add_mode(table: ParameterTable, prefix: str = "") -> ParsGroup:
    return ParsGroup(table, MODE_PARAMS, ParsMode, prefix, _mode_extra)


def add_qbit(table: ParameterTable, prefix: str = "") -> ParsGroup:
    return ParsGroup(table, QBIT_PARAMS, ParsQbit, prefix)


def add_jc(table: ParameterTable, prefix: str = "") -> ParsGroup:
    return ParsGroup(table, JC_PARAMS, ParsJC, prefix)


def add_evolution(table: ParameterTable, prefix: str = "") -> ParsGroup:
    return ParsGroup(table, EVOLUTION_PARAMS, ParsEvolution, prefix)


class RunOptions:
    """Driver-level options that are not part of the evolution record."""

    def __init__(self, table: ParameterTable):
        self.table = table
        table.add("picture", "quantum mechanical picture", Picture.UIP)
        table.add("negativity", "party for the negativity column, e.g. 0 or 0,2 (empty: off)", "",
                  ptype=TEXT)
        table.add("o", "output file (empty: standard output); the final state goes to <o>.sv",
                  "", ptype=TEXT)
        table.add("resume", "resume from <o>.sv", "auto", ptype=enum_type(("auto", "yes", "no")))
        table.add("checkpoint", "time interval between intermediate <o>.sv writes (0: off)", 0.0)
        table.add("figure", "also render the output to <o>.png", False)

    @property
    def picture(self) -> Picture:
        return self.table["picture"]

    @property
    def output(self) -> str:
        return self.table["o"]

    @property
    def resume(self) -> str:
        return self.table["resume"]

    @property
    def checkpoint(self) -> float:
        return self.table["checkpoint"]

    @property
    def figure(self) -> bool:
        return self.table["figure"]

    def party(self, rank: int) -> PartySelector | None:
        text = self.table["negativity"].strip()
        if not text:
            return None
        try:
            legs = [int(s) for s in text.replace(";", ",").split(",") if s.strip()]
        except ValueError:
            raise ValueError(f"malformed party {text!r}; expected ordinals like 0 or 0,2") from None
        return PartySelector(legs, rank)
