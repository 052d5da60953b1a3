"""Parameter table with command-line overrides.

Each parameter is registered with a description next to its default; the
type is taken from the default unless given.  A registration prefix is appended
to the name, so ``add("cutoff", ..., prefix="P")`` answers to ``--cutoffP``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence


class UsageError(Exception):
    """Bad command line: an unknown parameter or a bad value."""


class HelpRequested(Exception):
    pass


_COMPLEX_RE = re.compile(r"^\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)$")


def parse_complex(text: str) -> complex:
    """``"(a,b)"`` gives ``a + bi``; a bare real ``"x"`` gives ``x + 0i``."""
    s = str(text).strip()
    m = _COMPLEX_RE.match(s)
    try:
        if m:
            return complex(float(m.group(1)), float(m.group(2)))
        return complex(float(s), 0.0)
    except ValueError:
        raise ValueError(f"malformed complex number {text!r}; expected (re,im) or a real") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"({z.real!r},{z.imag!r})"


@dataclass(frozen=True)
class ParamType:
    name: str
    parse: Callable[[str], Any]
    format: Callable[[Any], str]
    tokens: tuple[str, ...] = ()

    def coerce(self, value):
        return self.parse(self.format(value))


def _parse_int(text):
    return int(str(text).strip())


def _parse_unsigned(text):
    v = _parse_int(text)
    if v < 0:
        raise ValueError(f"expected a non-negative integer, got {text!r}")
    return v


def _parse_bool(text):
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_pair(text):
    parts = str(text).split(";")
    if len(parts) != 2:
        raise ValueError(f"expected two complex numbers separated by ';', got {text!r}")
    return tuple(parse_complex(p) for p in parts)


INTEGER = ParamType("integer", _parse_int, lambda v: str(int(v)))
UNSIGNED = ParamType("unsigned", _parse_unsigned, lambda v: str(int(v)))
REAL = ParamType("real", lambda s: float(str(s).strip()), lambda v: repr(float(v)))
COMPLEX = ParamType("complex", parse_complex, format_complex)
COMPLEX_PAIR = ParamType("complex pair", _parse_pair,
                         lambda v: ";".join(format_complex(z) for z in v))
TEXT = ParamType("text", str, str)
FLAG = ParamType("flag", _parse_bool, lambda v: "true" if v else "false")


def enum_type(tokens: Iterable[str] | type[enum.Enum]) -> ParamType:
    if isinstance(tokens, type) and issubclass(tokens, enum.Enum):
        cls = tokens
        names = tuple(str(m.value) for m in cls)

        def parse(s, cls=cls):
            try:
                return cls(str(s).strip())
            except ValueError:
                raise ValueError(f"expected one of {'|'.join(names)}, got {s!r}") from None

        return ParamType("|".join(names), parse, lambda v: str(v.value), names)
    names = tuple(tokens)

    def parse(s):
        s = str(s).strip()
        if s not in names:
            raise ValueError(f"expected one of {'|'.join(names)}, got {s!r}")
        return s

    return ParamType("|".join(names), parse, str, names)


def infer_type(default) -> ParamType:
    if isinstance(default, bool):
        return FLAG
    if isinstance(default, enum.Enum):
        return enum_type(type(default))
    if isinstance(default, int):
        return INTEGER
    if isinstance(default, float):
        return REAL
    if isinstance(default, complex):
        return COMPLEX
    if isinstance(default, str):
        return TEXT
    raise TypeError(f"cannot infer a parameter type for default {default!r}")


class Parameter:
    def __init__(self, name: str, description: str, default, ptype: ParamType):
        self.name = name
        self.description = description
        self.type = ptype
        self.default = ptype.coerce(default) if ptype is not TEXT else str(default)
        self.value = self.default
        self.explicitly_set = False

    def set_default(self, value):
        self.default = self.type.coerce(value)
        if not self.explicitly_set:
            self.value = self.default

    def __repr__(self):
        return f"Parameter(--{self.name} {self.type.name} = {self.type.format(self.value)})"


class ParameterTable:
    """Ordered collection of named parameters; registration order is help order."""

    def __init__(self):
        self._params: dict[str, Parameter] = {}

    def add(self, name: str, description: str, default, prefix: str = "",
            ptype: ParamType | None = None) -> Parameter:
        full = f"{name}{prefix or ''}"
        if full in self._params:
            raise ValueError(f"duplicate parameter registration: --{full}")
        p = Parameter(full, description, default, ptype or infer_type(default))
        self._params[full] = p
        return p

    def __contains__(self, name):
        return name in self._params

    def __getitem__(self, name):
        return self._params[name].value

    def __setitem__(self, name, value):
        self._params[name].set_default(value)

    def param(self, name) -> Parameter:
        return self._params[name]

    def __iter__(self):
        return iter(self._params.values())

    def __len__(self):
        return len(self._params)

    def was_set(self, name) -> bool:
        return self._params[name].explicitly_set

    def update(self, argv: Sequence[str], marker: str = "--") -> "ParameterTable":
        return update(self, argv, marker)

    def help_text(self, program: str = "") -> str:
        return print_help(self, program)

    def dump(self) -> list[str]:
        """``name = value`` lines in registration order."""
        return [f"{p.name} = {p.type.format(p.value)}" for p in self]

    def argv(self) -> list[str]:
        """Command-line tokens reproducing every current value."""
        out = []
        for p in self:
            if p.type is FLAG:
                if p.value:
                    out.append(f"--{p.name}")
            else:
                out += [f"--{p.name}", p.type.format(p.value)]
        return out


def update(table: ParameterTable, argv: Sequence[str], marker: str = "--") -> ParameterTable:
    """Parse ``--name value`` pairs (flags stand alone) into ``table``.

    Raises :class:`HelpRequested` on ``--help`` and :class:`UsageError` on
    unknown names and on missing or unparsable values.
    """
    if not marker:
        raise ValueError("prefix marker must be non-empty")
    tokens = list(argv)
    if f"{marker}help" in tokens:
        raise HelpRequested()
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith(marker):
            raise UsageError(f"unexpected token {tok!r}; parameters look like {marker}name value")
        name = tok[len(marker):]
        if name not in table:
            raise UsageError(f"unknown parameter {tok!r}")
        p = table.param(name)
        if p.type is FLAG:
            if i + 1 < len(tokens) and not tokens[i + 1].startswith(marker):
                try:
                    p.value = _parse_bool(tokens[i + 1])
                    i += 1
                except ValueError:
                    p.value = True
            else:
                p.value = True
            p.explicitly_set = True
            i += 1
            continue
        if i + 1 >= len(tokens):
            raise UsageError(f"missing value for {tok!r}")
        raw = tokens[i + 1]
        try:
            p.value = p.type.parse(raw)
        except (ValueError, TypeError) as exc:
            raise UsageError(f"cannot parse {raw!r} for {tok!r} ({p.type.name}): {exc}") from None
        p.explicitly_set = True
        i += 2
    return table


def print_help(table: ParameterTable, program: str = "", sink=None) -> str:
    rows = [(f"--{p.name}", p.type.name, p.description, p.type.format(p.default)) for p in table]
    w0 = max([len(r[0]) for r in rows] + [9])
    w1 = max([len(r[1]) for r in rows] + [4])
    w2 = max([len(r[2]) for r in rows] + [11])
    lines = [f"Usage: {program} [--name value ...]".strip() if program else "Parameters:",
             f"{'parameter':<{w0}}  {'type':<{w1}}  {'description':<{w2}}  default"]
    lines += [f"{a:<{w0}}  {b:<{w1}}  {c:<{w2}}  {d}" for a, b, c, d in rows]
    text = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(text)
    return text


class ParsGroup:
    """Attribute view on a block of parameters that builds a record on demand.

    ``entries`` lists ``(field, name, description, default, type)``; assigning to
    a field before parsing changes that parameter's default.
    """

    def __init__(self, table: ParameterTable, entries, record: type, prefix: str = "",
                 extra: Callable[["ParsGroup"], dict] | None = None):
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_names", {})
        object.__setattr__(self, "_record", record)
        object.__setattr__(self, "_extra", extra)
        object.__setattr__(self, "prefix", prefix)
        for field, name, description, default, ptype in entries:
            table.add(name, description, default, prefix, ptype)
            self._names[field] = f"{name}{prefix}"

    def __getattr__(self, field):
        names = object.__getattribute__(self, "_names")
        if field in names:
            return self._table[names[field]]
        raise AttributeError(field)

    def __setattr__(self, field, value):
        if field in self._names:
            self._table[self._names[field]] = value
        else:
            raise AttributeError(f"unknown parameter field {field!r}")

    def was_set(self, field) -> bool:
        return self._table.was_set(self._names[field])

    def build(self):
        values = {f: self._table[n] for f, n in self._names.items()}
        if self._extra is not None:
            values.update(self._extra(self))
        return self._record(**values)
