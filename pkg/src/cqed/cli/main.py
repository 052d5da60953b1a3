"""Command-line driver.

``cqed <script> [--name value ...]`` runs one of the bundled scripts; each
script registers its parameters in a :class:`ParameterTable`, and
``cqed <script> --help`` lists them.  ``cqed plot <file>`` renders an
existing output file.

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence, TextIO

from ..composite import Act, BinarySystem, Composite, make_composite
from ..elements import (JaynesCummings, LoweringCoupling, make_mode, make_qbit,
                        make_ternary_demo, mode_init, qbit_init)
from ..evolution import ParsEvolution, evolve, make_driver
from ..trajio import load_and_resume, open_output, save_state, sv_path, write_header, write_row
from .parameters import COMPLEX, HelpRequested, ParameterTable, UsageError, print_help
from .records import RunOptions, add_evolution, add_jc, add_mode, add_qbit

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class Script:
    """A parameterized simulation: register parameters, build the system, evolve."""

    name = ""
    summary = ""

    def __init__(self):
        self.table = ParameterTable()
        self.evolution = add_evolution(self.table)
        self.register()
        self.options = RunOptions(self.table)
        self.defaults()

    def register(self) -> None:
        raise NotImplementedError

    def defaults(self) -> None:
        pass

    def build(self) -> tuple[Composite, object]:
        raise NotImplementedError

    # --- driving -------------------------------------------------------------

    def parse(self, argv: Sequence[str]) -> ParsEvolution:
        self.table.update(argv, "--")
        try:
            return self.evolution.build()
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def simulate(self, pars: ParsEvolution, stdout: TextIO = sys.stdout) -> list:
        opts = self.options
        try:
            system, psi0 = self.build()
            party = opts.party(system.rank)
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from None
        if opts.figure and not opts.output:
            raise UsageError("--figure needs an output file given with --o")
        sv = sv_path(opts.output) if opts.output else None
        single = pars.evol == "single"
        if opts.resume == "yes" and not (single and sv is not None):
            raise UsageError("--resume yes works only with --evol single and --o")

        driver = None
        resumed = False
        if single and sv is not None and opts.resume != "no" and sv.exists():
            driver = load_and_resume(sv, system, pars)
            resumed = True
        elif opts.resume == "yes":
            raise FileNotFoundError(f"no state file {sv} to resume from")
        if driver is None and pars.evol != "ensemble":
            driver = make_driver(system, psi0, pars, party)

        checkpoint = _Checkpointer(driver, sv, opts.checkpoint) if single and sv else None
        with open_output(opts.output, append=resumed, default=stdout) as sink:
            if resumed:
                sink.write(f"# resumed from {sv.name} at t={driver.t!r}\n")
            else:
                write_header(system, self.table.dump(), sink, jump_proximity=single,
                             negativity_party=party, script=self.name)

            def observe(row):
                write_row(row, sink)
                if checkpoint is not None:
                    checkpoint(row.t)

            rows = evolve(psi0, system, pars, party, observe, driver=driver,
                          display_initial=not resumed)
            sink.flush()
        if single and sv is not None:
            save_state(driver, sv)
        if opts.figure:
            from ..report import render_file

            render_file(opts.output)
        return rows

    def main(self, argv: Sequence[str], stdout: TextIO | None = None,
             stderr: TextIO | None = None) -> int:
        stdout = stdout or sys.stdout
        stderr = stderr or sys.stderr
        try:
            pars = self.parse(argv)
            self.simulate(pars, stdout)
        except HelpRequested:
            stdout.write(f"{self.name}: {self.summary}\n")
            print_help(self.table, f"cqed {self.name}", stdout)
            return EXIT_OK
        except UsageError as exc:
            stderr.write(f"cqed {self.name}: usage error: {exc}\n")
            return EXIT_USAGE
        except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
            stderr.write(f"cqed {self.name}: error: {exc}\n")
            return EXIT_RUNTIME
        return EXIT_OK


class _Checkpointer:
    def __init__(self, driver, path, interval: float):
        self.driver, self.path, self.interval = driver, path, interval
        self.next = (driver.t + interval) if interval > 0 else None

    def __call__(self, t: float) -> None:
        if self.next is None or t < self.next * (1 - 1e-12):
            return
        save_state(self.driver, self.path)
        while self.next <= t * (1 + 1e-12):
            self.next += self.interval


class ModeScript(Script):
    name = "mode"
    summary = "a single pumped lossy mode"

    def register(self):
        self.mode = add_mode(self.table)

    def defaults(self):
        self.evolution.evol = "master"
        self.mode.cutoff = 30

    def build(self):
        pm = self.mode.build()
        mode = make_mode(pm, self.options.picture)
        return make_composite([mode]), mode_init(pm)


class JCScript(Script):
    name = "jc"
    summary = "qbit and mode coupled by a Jaynes-Cummings interaction"

    def register(self):
        self.qbit = add_qbit(self.table)
        self.mode = add_mode(self.table)
        self.jc = add_jc(self.table)

    def build(self):
        pq, pm = self.qbit.build(), self.mode.build()
        pic = self.options.picture
        system = BinarySystem(JaynesCummings(make_qbit(pq, pic), make_mode(pm, pic),
                                             self.jc.build()))
        return system, qbit_init(pq) * mode_init(pm)


class RingScript(Script):
    name = "ring"
    summary = "qbit coupled to two counterpropagating modes P and M (frees: qbit, P, M)"

    def register(self):
        self.qbit = add_qbit(self.table)
        self.plus = add_mode(self.table, "P")
        self.minus = add_mode(self.table, "M")
        self.table.add("g", "mode P - qbit coupling", 0j, "P", COMPLEX)
        self.table.add("g", "mode M - qbit coupling", 0j, "M", COMPLEX)
        self.table.add("u", "ternary P-M-qbit coupling", 0j, "", COMPLEX)

    def build(self):
        pq, pp, pmm = self.qbit.build(), self.plus.build(), self.minus.build()
        pic = self.options.picture
        qbit = make_qbit(pq, pic)
        plus = make_mode(pp, pic, label="modeP")
        minus = make_mode(pmm, pic, label="modeM")
        t = self.table
        system = make_composite(
            [qbit, plus, minus],
            Act(1, 0, LoweringCoupling((plus, qbit), t["gP"], label="P-qbit")),
            Act(2, 0, LoweringCoupling((minus, qbit), t["gM"], label="M-qbit")),
            Act(1, 2, 0, make_ternary_demo(plus, minus, qbit, t["u"])),
        )
        return system, qbit_init(pq) * mode_init(pp) * mode_init(pmm)


SCRIPTS: dict[str, type[Script]] = {s.name: s for s in (ModeScript, JCScript, RingScript)}


def plot_main(argv: Sequence[str], stdout: TextIO, stderr: TextIO) -> int:
    parser = argparse.ArgumentParser(prog="cqed plot",
                                     description="render an output file to a PNG figure")
    parser.add_argument("source", help="output file written by a script")
    parser.add_argument("--out", help="figure path (default: <source>.png)")
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    from ..report import render_file

    try:
        path = render_file(args.source, args.out)
    except (OSError, ValueError) as exc:
        stderr.write(f"cqed plot: error: {exc}\n")
        return EXIT_RUNTIME
    stdout.write(f"{path}\n")
    return EXIT_OK


def usage() -> str:
    lines = ["Usage: cqed <script> [--name value ...]", "       cqed plot <file> [--out png]",
             "", "Scripts:"]
    lines += [f"  {name:<6} {cls.summary}" for name, cls in SCRIPTS.items()]
    lines += ["  plot   render an output file to a PNG figure", "",
              "Use cqed <script> --help for the parameters of a script."]
    return "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None,
         stderr: TextIO | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if not argv:
        stderr.write(usage())
        return EXIT_USAGE
    head, rest = argv[0], argv[1:]
    if head in ("-h", "--help", "help"):
        stdout.write(usage())
        return EXIT_OK
    if head == "plot":
        return plot_main(rest, stdout, stderr)
    if head not in SCRIPTS:
        stderr.write(f"cqed: unknown script {head!r}\n{usage()}")
        return EXIT_USAGE
    return SCRIPTS[head]().main(rest, stdout, stderr)


__all__ = ["EXIT_OK", "EXIT_RUNTIME", "EXIT_USAGE", "JCScript", "ModeScript", "RingScript",
           "SCRIPTS", "Script", "main"]
