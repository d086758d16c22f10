"""Resolution over random small universes.

A universe is a handful of ground instances of a one-member class and
up to two single-parameter functors, each wrapping its argument's type
in a constructor.  Because every functor strictly grows the type, the
solutions for a target can be enumerated by brute force."""
import random

from hypothesis import HealthCheck, given, settings, strategies as st

from implicitml.resolve import Ambiguous, NoSolution, Unique

from conftest import checked

GROUND = ["int", "bool", "string", "float"]
WRAPPERS = ["list", "option", "pair"]

CLASS = """module type C = sig
  type t
  val tag : t -> string
end
"""


def render(t):
    if t[0] == "pair":
        return f"({render(t[1])} * int)"
    if len(t) == 1:
        return t[0]
    return f"{render(t[1])} {t[0]}"


def size(t):
    return 1 + sum(size(a) for a in t[1:]) + (1 if t[0] == "pair" else 0)


def wrap(w, t):
    return (w, t)


@st.composite
def universes(draw):
    n_mods = draw(st.integers(1, 4))
    mods = [(f"M{i}", draw(st.sampled_from(GROUND))) for i in range(n_mods)]
    n_fun = draw(st.integers(0, 2))
    funs = [(f"F{i}", draw(st.sampled_from(WRAPPERS))) for i in range(n_fun)]
    return mods, funs


def ground_type(depth):
    base = st.sampled_from(GROUND).map(lambda g: (g,))
    if depth == 0:
        return base
    return st.one_of(base, st.tuples(st.sampled_from(WRAPPERS), ground_type(depth - 1)))


def source(mods, funs, extra=""):
    out = [CLASS]
    for name, g in mods:
        out.append(f"implicit module {name} = struct type t = {g} let tag _ = \"{name}\" end")
    for name, w in funs:
        body = render(wrap(w, ("X.t",)))
        out.append(f"implicit module {name} {{X : C}} = struct type t = {body} let tag _ = \"{name}\" end")
    out.append(extra)
    return "\n".join(out)


def brute_force(mods, funs, target):
    """Every instance expression whose type is `target`, as text."""
    limit = size(target)
    terms = [(name, (g,)) for name, g in mods]
    frontier = list(terms)
    while frontier:
        nxt = []
        for fname, w in funs:
            for text, t in frontier:
                u = wrap(w, t)
                if size(u) <= limit:
                    nxt.append((f"{fname}({text})", u))
        terms += nxt
        frontier = nxt
    return sorted(text for text, t in terms if t == target)


def outcome(result):
    if isinstance(result, Unique):
        return [result.normal_form]
    if isinstance(result, Ambiguous):
        return [nf for nf, _ in result.solutions]
    assert isinstance(result, NoSolution), result
    return []


SETTINGS = dict(deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def solvable(draw):
    """A universe and a target that some instance expression reaches."""
    mods, funs = draw(universes())
    name, g = draw(st.sampled_from(mods))
    t = (g,)
    for _ in range(draw(st.integers(0, 3)) if funs else 0):
        t = wrap(draw(st.sampled_from(funs))[1], t)
    return mods, funs, t


def arbitrary():
    return st.tuples(universes(), ground_type(3)).map(lambda p: (*p[0], p[1]))


@settings(max_examples=500, **SETTINGS)
@given(st.one_of(solvable(), arbitrary()))
def test_agrees_with_brute_force(case):
    mods, funs, target = case
    c, env = checked(source(mods, funs))
    got = outcome(c.query(env, f"C with type t = {render(target)}"))
    assert got == brute_force(mods, funs, target)


@settings(max_examples=1000, **SETTINGS)
@given(solvable(), st.randoms(use_true_random=False))
def test_scope_order_is_irrelevant(case, rng: random.Random):
    mods, funs, target = case
    c, env = checked(source(mods, funs))
    goal = f"C with type t = {render(target)}"
    scope = list(env.scope)
    rng.shuffle(scope)
    assert outcome(c.query(env, goal, scope)) == outcome(c.query(env, goal))


IRRELEVANT = """
module type D = sig
  type u
  val other : u -> int
end
implicit module Junk_d = struct type u = int let other _ = 0 end
implicit module Junk_c = struct type t = unit list let tag _ = "junk" end
implicit module Junk_f {X : D} = struct type t = X.u * unit let tag _ = "junk" end
"""


@settings(max_examples=1000, **SETTINGS)
@given(solvable())
def test_irrelevant_entries_change_nothing(case):
    mods, funs, target = case
    goal = f"C with type t = {render(target)}"
    c, env = checked(source(mods, funs))
    c2, env2 = checked(source(mods, funs, IRRELEVANT))
    assert outcome(c2.query(env2, goal)) == outcome(c.query(env, goal))
