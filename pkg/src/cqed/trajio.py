"""Trajectory output and persistence.

Text output: header lines start with ``"# "``; each data row holds the time,
the last timestep, one field per display block (values space-separated),
then the optional jump-proximity and negativity fields, all tab-separated.

Binary ``.sv`` snapshot (little-endian)::

    8 bytes   magic "CQEDSV01"
    u32       rank
    u32 x R   dims
    f64       t
    f64 x 2N  amplitudes (re, im), row-major
    u32       RNG blob length L, then L bytes
    f64       stepper stepsize

The RNG blob is the full PCG64 state including the cached 32-bit half,
so a resumed trajectory draws the same numbers an uninterrupted one would.  ``L = 0`` marks a deterministic (RNG-free) state.
"""

from __future__ import annotations

import io
import math
import os
import re
import struct
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from . import __version__
from .composite import as_system
from .evolution import (DisplayRow, MCWFTrajectory, OdeStepperState, ParsEvolution,
                        TrajectoryState)
from .qop import DimensionMismatch

FRAMEWORK = "cqed"
MAGIC = b"CQEDSV01"
SV_SUFFIX = ".sv"
_RNG_BLOB_LEN = 40


class CorruptStateFile(ValueError):
    pass


# --- text output -------------------------------------------------------------------

def format_value(x: float) -> str:
    s = "%.6g" % float(x)
    return "0" if s == "-0" else s


def format_row(row: DisplayRow) -> str:
    fields = [format_value(row.t), format_value(row.dtDid)]
    fields += [" ".join(format_value(v) for v in block) for block in row.blocks]
    if row.jumpProximity is not None:
        fields.append(format_value(row.jumpProximity))
    if row.negativity is not None:
        fields.append(format_value(row.negativity))
    return "\t".join(fields) + "\n"


def write_row(row: DisplayRow, sink: TextIO) -> str:
    line = format_row(row)
    sink.write(line)
    return line


def column_key(system, jump_proximity: bool = False, negativity_party=None) -> list[str]:
    """Key lines (without the ``"# "`` prefix) mapping 1-based columns to quantities."""
    system = as_system(system)
    lines = ["Key to data:", "1: t  2: dtDid"]
    col = 3
    for label, keys in system.display_blocks:
        first, last = col, col + len(keys) - 1
        entries = "  ".join(f"{first + i} {k}" for i, k in enumerate(keys))
        lines.append(f"{first}..{last} {label}: {entries}")
        col = last + 1
    if jump_proximity:
        lines.append(f"{col}: jump proximity (negative when a jump happened since the last row)")
        col += 1
    if negativity_party is not None:
        legs = getattr(negativity_party, "legs", negativity_party)
        lines.append(f"{col}: negativity of party {{{','.join(str(k) for k in legs)}}}")
    return lines


def header_lines(system, parameters: Iterable[str] = (), jump_proximity: bool = False,
                 negativity_party=None, script: str | None = None) -> list[str]:
    title = f"{FRAMEWORK} {__version__}" + (f" script {script}" if script else "")
    lines = [title, "Parameters:"]
    lines += [str(p) for p in parameters]
    lines += column_key(system, jump_proximity, negativity_party)
    return [f"# {line}" for line in lines]


def write_header(system, parameters: Iterable[str], sink: TextIO, jump_proximity: bool = False,
                 negativity_party=None, script: str | None = None) -> str:
    text = "\n".join(header_lines(system, parameters, jump_proximity, negativity_party,
                                  script)) + "\n"
    sink.write(text)
    return text


_PARAM_RE = re.compile(r"^# (\S+) = (.*)$")
_BLOCK_RE = re.compile(r"^# (\d+)\.\.(\d+) (\S+): (.*)$")
_SINGLE_RE = re.compile(r"^# (\d+): (.*)$")


class OutputFile:
    """Parsed text output: the parameter dump plus the numeric rows with their column key."""

    def __init__(self, parameters: dict[str, str], blocks, extras, rows: np.ndarray):
        self.parameters = parameters
        self.blocks = blocks  # [(label, first_col, [names])], 1-based columns
        self.extras = extras  # {col: description}
        self.rows = rows

    def column(self, col: int) -> np.ndarray:
        return self.rows[:, col - 1]


def parse_output(text: str) -> OutputFile:
    params: dict[str, str] = {}
    blocks = []
    extras: dict[int, str] = {}
    data = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            if m := _BLOCK_RE.match(line):
                names = re.findall(r"\d+ (\S+)", m.group(4))
                blocks.append((m.group(3), int(m.group(1)), names))
            elif (m := _SINGLE_RE.match(line)) and not line.startswith("# 1: t"):
                extras[int(m.group(1))] = m.group(2)
            elif m := _PARAM_RE.match(line):
                params[m.group(1)] = m.group(2)
            continue
        values = []
        for field in line.split("\t"):
            values += [float(v) for v in field.split()]
        data.append(values)
    rows = np.array(data, dtype=float) if data else np.zeros((0, 0))
    return OutputFile(params, blocks, extras, rows)


def read_output(path) -> OutputFile:
    return parse_output(Path(path).read_text())


@contextmanager
def open_output(path: str | os.PathLike | None = None, append: bool = False,
                default: TextIO | None = None):
    """``default`` (standard output) when ``path`` is empty, else the file.

    An existing file is overwritten unless ``append`` is set.
    """
    if not path:
        yield default if default is not None else sys.stdout
        return
    try:
        fh = open(path, "a" if append else "w", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot open output file {path}: {exc.strerror}") from exc
    with fh:
        yield fh


def sv_path(output: str | os.PathLike) -> Path:
    """``run1.dat`` -> ``run1.dat.sv``."""
    return Path(f"{os.fspath(output)}{SV_SUFFIX}")


# --- .sv snapshots -----------------------------------------------------------------

def rng_blob(rng: np.random.Generator | None) -> bytes:
    if rng is None:
        return b""
    st = rng.bit_generator.state
    if st["bit_generator"] != "PCG64":
        raise TypeError(f"only PCG64 generators can be saved, got {st['bit_generator']}")
    inner = st["state"]
    return b"".join((inner["state"].to_bytes(16, "little"), inner["inc"].to_bytes(16, "little"),
                     struct.pack("<II", int(st["has_uint32"]), int(st["uinteger"]))))


def rng_from_blob(blob: bytes) -> np.random.Generator | None:
    if not blob:
        return None
    if len(blob) != _RNG_BLOB_LEN:
        raise CorruptStateFile(f"corrupt sv file: RNG blob of {len(blob)} bytes")
    bg = np.random.PCG64()
    has, uint = struct.unpack("<II", blob[32:40])
    bg.state = {"bit_generator": "PCG64",
                "state": {"state": int.from_bytes(blob[:16], "little"),
                          "inc": int.from_bytes(blob[16:32], "little")},
                "has_uint32": has, "uinteger": uint}
    return np.random.Generator(bg)


def encode_state(traj: TrajectoryState) -> bytes:
    psi = np.ascontiguousarray(traj.state, dtype=np.complex128)
    blob = rng_blob(traj.rng)
    parts = [MAGIC, struct.pack("<I", psi.ndim), struct.pack(f"<{psi.ndim}I", *psi.shape),
             struct.pack("<d", traj.t), psi.astype("<c16").tobytes(),
             struct.pack("<I", len(blob)), blob, struct.pack("<d", traj.stepper.dt)]
    return b"".join(parts)


def decode_state(data: bytes) -> TrajectoryState:
    buf = io.BytesIO(data)

    def take(n):
        chunk = buf.read(n)
        if len(chunk) != n:
            raise CorruptStateFile("corrupt sv file: truncated")
        return chunk

    if take(8) != MAGIC:
        raise CorruptStateFile("corrupt sv file: bad magic")
    (rank,) = struct.unpack("<I", take(4))
    if not 1 <= rank <= 64:
        raise CorruptStateFile(f"corrupt sv file: rank {rank}")
    dims = struct.unpack(f"<{rank}I", take(4 * rank))
    if any(d == 0 for d in dims):
        raise CorruptStateFile("corrupt sv file: zero dimension")
    (t,) = struct.unpack("<d", take(8))
    n = math.prod(dims)
    psi = np.frombuffer(take(16 * n), dtype="<c16").astype(np.complex128).reshape(dims)
    (blen,) = struct.unpack("<I", take(4))
    rng = rng_from_blob(take(blen))
    (dt,) = struct.unpack("<d", take(8))
    if buf.read(1):
        raise CorruptStateFile("corrupt sv file: trailing bytes")
    return TrajectoryState(t, psi, rng, OdeStepperState(dt))


def save_state(traj, path) -> Path:
    """Write a snapshot of a :class:`TrajectoryState` (or a driver holding one)."""
    state = getattr(traj, "traj", traj)
    path = Path(path)
    data = encode_state(state)
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write state file {path}: {exc.strerror}") from exc
    return path


def load_state(path) -> TrajectoryState:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read state file {path}: {exc.strerror}") from exc
    return decode_state(data)


def sv_size(dims, rng_len: int = _RNG_BLOB_LEN) -> int:
    return 8 + 4 + 4 * len(dims) + 8 + 16 * math.prod(dims) + 4 + rng_len + 8


def load_and_resume(path, system, pars: ParsEvolution) -> MCWFTrajectory:
    """Rebuild a single trajectory from a snapshot; dims must match ``system``."""
    system = as_system(system)
    state = load_state(path)
    if tuple(state.state.shape) != system.dims:
        raise DimensionMismatch(
            f"state/system dimension mismatch: saved {tuple(state.state.shape)}, "
            f"system {system.dims}")
    if state.rng is None:
        raise CorruptStateFile(f"corrupt sv file: {path} holds no RNG state")
    return MCWFTrajectory(system, None, pars, state=state)


__all__ = [
    "CorruptStateFile", "FRAMEWORK", "MAGIC", "OutputFile", "column_key", "decode_state",
    "encode_state", "format_row", "format_value", "header_lines", "load_and_resume",
    "load_state", "open_output", "parse_output", "read_output", "rng_blob", "rng_from_blob",
    "save_state", "sv_path", "sv_size", "write_header", "write_row",
]
