"""Runtime values and the builtin library.

Every builtin is declared once with its type (written in surface syntax)
and its implementation.  Implementations receive a `Machine` first so
higher-order builtins can call back into the evaluator and printing
builtins can write to its output buffer.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable


class RuntimeFailure(Exception):
    """An evaluation error such as division by zero."""


# ---------------------------------------------------------------- values
# int, float, str, bool map to Python values; unit is (); tuples are
# Python tuples of length >= 2; lists are Python lists.


@dataclass(frozen=True)
class SomeV:
    value: object


class _NoneV:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NONE"


NONE = _NoneV()


@dataclass
class Closure:
    params: tuple  # remaining patterns
    body: object
    env: object


@dataclass
class Builtin:
    name: str
    arity: int
    fn: Callable
    args: tuple = ()


@dataclass
class StructV:
    values: dict = field(default_factory=dict)
    modules: dict = field(default_factory=dict)


@dataclass
class FunctorV:
    param: str
    body: object
    env: object


@dataclass
class PackV:
    module: object


@dataclass
class DeclaredV:
    """A module that was declared without a body."""

    name: str


class Machine:
    """Interface the builtins need from the evaluator."""

    def apply(self, f, arg):  # pragma: no cover - overridden
        raise NotImplementedError

    def write(self, text: str) -> None:  # pragma: no cover - overridden
        raise NotImplementedError


# ---------------------------------------------------------------- helpers


def show_float(x: float) -> str:
    """Float rendering in the style of OCaml's string_of_float."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = "%.12g" % x
    if not any(c in s for c in ".e"):
        s += "."
    return s


def compare_values(a, b) -> int:
    if isinstance(a, (Closure, Builtin, FunctorV, PackV)) or isinstance(b, (Closure, Builtin, FunctorV, PackV)):
        raise RuntimeFailure("compare: functional value")
    if a is NONE or b is NONE:
        return (a is not NONE) - (b is not NONE)
    if isinstance(a, SomeV):
        return compare_values(a.value, b.value)
    if isinstance(a, (tuple, list)):
        for x, y in zip(a, b):
            c = compare_values(x, y)
            if c:
                return c
        return (len(a) > len(b)) - (len(a) < len(b))
    return (a > b) - (a < b)


def int_div(a: int, b: int) -> int:
    if b == 0:
        raise RuntimeFailure("Division_by_zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def int_mod(a: int, b: int) -> int:
    if b == 0:
        raise RuntimeFailure("Division_by_zero")
    return a - b * int_div(a, b)


def _int_of_string(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise RuntimeFailure(f"int_of_string {s!r}") from None


def _float_of_string(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise RuntimeFailure(f"float_of_string {s!r}") from None


def _nth(xs, n):
    if n < 0 or n >= len(xs):
        raise RuntimeFailure("List.nth")
    return xs[n]


def _hd(xs):
    if not xs:
        raise RuntimeFailure("List.hd")
    return xs[0]


def _tl(xs):
    if not xs:
        raise RuntimeFailure("List.tl")
    return xs[1:]


def _map2(m, f, xs, ys):
    if len(xs) != len(ys):
        raise RuntimeFailure("List.map2")
    return [m.apply(m.apply(f, x), y) for x, y in zip(xs, ys)]


def _fold_left(m, f, acc, xs):
    for x in xs:
        acc = m.apply(m.apply(f, acc), x)
    return acc


def _fold_right(m, f, xs, acc):
    for x in reversed(xs):
        acc = m.apply(m.apply(f, x), acc)
    return acc


def _iter(m, f, xs):
    for x in xs:
        m.apply(f, x)
    return ()


def _list_equal(m, eq, xs, ys):
    return len(xs) == len(ys) and all(m.apply(m.apply(eq, x), y) for x, y in zip(xs, ys))


def _list_compare(m, cmp, xs, ys):
    for x, y in zip(xs, ys):
        c = m.apply(m.apply(cmp, x), y)
        if c:
            return c
    return (len(xs) > len(ys)) - (len(xs) < len(ys))


def _sort(m, cmp, xs):
    return sorted(xs, key=functools.cmp_to_key(lambda a, b: m.apply(m.apply(cmp, a), b)))


def _print(m, s):
    m.write(s)
    return ()


def _print_line(m, s):
    m.write(s + "\n")
    return ()


def _check_equal(a, b) -> bool:
    return compare_values(a, b) == 0


# ---------------------------------------------------------------- table


def _pure(fn):
    return lambda m, *args: fn(*args)


ARITH = [
    ("+", "int -> int -> int", lambda a, b: a + b),
    ("-", "int -> int -> int", lambda a, b: a - b),
    ("*", "int -> int -> int", lambda a, b: a * b),
    ("/", "int -> int -> int", int_div),
    ("mod", "int -> int -> int", int_mod),
    ("+.", "float -> float -> float", lambda a, b: a + b),
    ("-.", "float -> float -> float", lambda a, b: a - b),
    ("*.", "float -> float -> float", lambda a, b: a * b),
    ("/.", "float -> float -> float", lambda a, b: a / b if b else math.copysign(math.inf, a) if a else math.nan),
    ("**", "float -> float -> float", lambda a, b: a ** b),
    ("=", "'a -> 'a -> bool", _check_equal),
    ("<>", "'a -> 'a -> bool", lambda a, b: not _check_equal(a, b)),
    ("==", "'a -> 'a -> bool", _check_equal),
    ("!=", "'a -> 'a -> bool", lambda a, b: not _check_equal(a, b)),
    ("<", "'a -> 'a -> bool", lambda a, b: compare_values(a, b) < 0),
    (">", "'a -> 'a -> bool", lambda a, b: compare_values(a, b) > 0),
    ("<=", "'a -> 'a -> bool", lambda a, b: compare_values(a, b) <= 0),
    (">=", "'a -> 'a -> bool", lambda a, b: compare_values(a, b) >= 0),
    ("&&", "bool -> bool -> bool", lambda a, b: a and b),
    ("||", "bool -> bool -> bool", lambda a, b: a or b),
    ("^", "string -> string -> string", lambda a, b: a + b),
    ("@", "'a list -> 'a list -> 'a list", lambda a, b: a + b),
]

PERVASIVES = [
    ("compare", "'a -> 'a -> int", compare_values),
    ("min", "'a -> 'a -> 'a", lambda a, b: a if compare_values(a, b) <= 0 else b),
    ("max", "'a -> 'a -> 'a", lambda a, b: a if compare_values(a, b) >= 0 else b),
    ("not", "bool -> bool", lambda a: not a),
    ("fst", "'a * 'b -> 'a", lambda p: p[0]),
    ("snd", "'a * 'b -> 'b", lambda p: p[1]),
    ("ignore", "'a -> unit", lambda a: ()),
    ("succ", "int -> int", lambda a: a + 1),
    ("pred", "int -> int", lambda a: a - 1),
    ("abs", "int -> int", abs),
    ("abs_float", "float -> float", abs),
    ("sqrt", "float -> float", lambda a: math.sqrt(a) if a >= 0 else math.nan),
    ("float", "int -> float", float),
    ("float_of_int", "int -> float", float),
    ("int_of_float", "float -> int", lambda a: int(a)),
    ("truncate", "float -> int", lambda a: int(a)),
    ("string_of_int", "int -> string", str),
    ("string_of_float", "float -> string", show_float),
    ("string_of_bool", "bool -> string", lambda b: "true" if b else "false"),
    ("int_of_string", "string -> int", _int_of_string),
    ("float_of_string", "string -> float", _float_of_string),
]

EFFECTFUL = [
    ("print_string", "string -> unit", _print),
    ("print_endline", "string -> unit", _print_line),
    ("print_int", "int -> unit", lambda m, i: _print(m, str(i))),
    ("print_float", "float -> unit", lambda m, x: _print(m, show_float(x))),
    ("print_newline", "unit -> unit", lambda m, u: _print(m, "\n")),
]

LIST = [
    ("map", "('a -> 'b) -> 'a list -> 'b list", lambda m, f, xs: [m.apply(f, x) for x in xs]),
    ("mapi", "(int -> 'a -> 'b) -> 'a list -> 'b list",
     lambda m, f, xs: [m.apply(m.apply(f, i), x) for i, x in enumerate(xs)]),
    ("map2", "('a -> 'b -> 'c) -> 'a list -> 'b list -> 'c list", _map2),
    ("iter", "('a -> unit) -> 'a list -> unit", _iter),
    ("fold_left", "('a -> 'b -> 'a) -> 'a -> 'b list -> 'a", _fold_left),
    ("fold_right", "('a -> 'b -> 'b) -> 'a list -> 'b -> 'b", _fold_right),
    ("filter", "('a -> bool) -> 'a list -> 'a list", lambda m, f, xs: [x for x in xs if m.apply(f, x)]),
    ("exists", "('a -> bool) -> 'a list -> bool", lambda m, f, xs: any(m.apply(f, x) for x in xs)),
    ("for_all", "('a -> bool) -> 'a list -> bool", lambda m, f, xs: all(m.apply(f, x) for x in xs)),
    ("equal", "('a -> 'a -> bool) -> 'a list -> 'a list -> bool", _list_equal),
    ("compare", "('a -> 'a -> int) -> 'a list -> 'a list -> int", _list_compare),
    ("sort", "('a -> 'a -> int) -> 'a list -> 'a list", _sort),
    ("length", "'a list -> int", _pure(len)),
    ("rev", "'a list -> 'a list", _pure(lambda xs: xs[::-1])),
    ("append", "'a list -> 'a list -> 'a list", _pure(lambda a, b: a + b)),
    ("concat", "'a list list -> 'a list", _pure(lambda xss: [x for xs in xss for x in xs])),
    ("flatten", "'a list list -> 'a list", _pure(lambda xss: [x for xs in xss for x in xs])),
    ("hd", "'a list -> 'a", _pure(_hd)),
    ("tl", "'a list -> 'a list", _pure(_tl)),
    ("nth", "'a list -> int -> 'a", _pure(_nth)),
    ("mem", "'a -> 'a list -> bool", _pure(lambda x, xs: any(_check_equal(x, y) for y in xs))),
    ("combine", "'a list -> 'b list -> ('a * 'b) list", _pure(lambda a, b: list(zip(a, b)))),
    ("init", "int -> (int -> 'a) -> 'a list", lambda m, n, f: [m.apply(f, i) for i in range(n)]),
]

STRING = [
    ("concat", "string -> string list -> string", _pure(lambda sep, xs: sep.join(xs))),
    ("length", "string -> int", _pure(len)),
    ("uppercase_ascii", "string -> string", _pure(lambda s: s.upper())),
    ("lowercase_ascii", "string -> string", _pure(lambda s: s.lower())),
    ("make", "int -> string -> string", _pure(lambda n, s: s * n)),
]

INT = [
    ("equal", "int -> int -> bool", _pure(lambda a, b: a == b)),
    ("compare", "int -> int -> int", _pure(compare_values)),
    ("to_string", "int -> string", _pure(str)),
    ("abs", "int -> int", _pure(abs)),
    ("add", "int -> int -> int", _pure(lambda a, b: a + b)),
    ("mul", "int -> int -> int", _pure(lambda a, b: a * b)),
]

FLOAT = [
    ("equal", "float -> float -> bool", _pure(lambda a, b: a == b)),
    ("compare", "float -> float -> int", _pure(compare_values)),
    ("to_string", "float -> string", _pure(show_float)),
    ("of_int", "int -> float", _pure(float)),
    ("sqrt", "float -> float", _pure(lambda a: math.sqrt(a) if a >= 0 else math.nan)),
    ("abs", "float -> float", _pure(abs)),
    ("add", "float -> float -> float", _pure(lambda a, b: a + b)),
    ("mul", "float -> float -> float", _pure(lambda a, b: a * b)),
]


def _pervasive_entries():
    out = [(n, t, _pure(f)) for n, t, f in ARITH + PERVASIVES]
    return out + list(EFFECTFUL)


def library() -> dict:
    """Module name -> list of (value name, type text, implementation)."""
    return {
        "Pervasives": _pervasive_entries(),
        "List": LIST,
        "String": STRING,
        "Int": INT,
        "Float": FLOAT,
    }


def arity(type_text: str) -> int:
    """Number of top-level arrows in a builtin's type."""
    depth, count, i = 0, 0, 0
    while i < len(type_text):
        c = type_text[i]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif type_text.startswith("->", i) and depth == 0:
            count += 1
            i += 1
        i += 1
    return count


def runtime_modules() -> dict:
    """Module name -> StructV of Builtin values."""
    mods = {}
    for mod, entries in library().items():
        mods[mod] = StructV({n: Builtin(n, arity(t), f) for n, t, f in entries})
    return mods
