import itertools

import pytest
from hypothesis import given, settings, strategies as st

from implicitml.modules import InclusionError
from implicitml.surface.parser import parse_modtype, parse_type
from implicitml.types import (
    INT, STRING, PIdent, Subst, TArrow, TCon, TMember, TVar, UnifyError, constraint_size,
    expand_manifest, fresh_ident, fresh_var, list_of, sexpr_modtype, sexpr_type,
    show_type, tuple_of, unify,
)

from conftest import SHOW_PRELUDE, checked


def test_unify_var_with_int():
    a = fresh_var()
    s = Subst()
    unify(a, INT, s)
    assert s.zonk(a) == INT


def test_member_is_rigid_in_full_mode():
    a = fresh_var()
    member = TMember(PIdent(fresh_ident("S")), "t", (a,))
    with pytest.raises(UnifyError, match="rigid member"):
        unify(member, list_of(INT), Subst())


def test_unify_pairs():
    a, b = fresh_var(), fresh_var()
    s = Subst()
    unify(tuple_of(a, a), tuple_of(INT, b), s)
    assert s.zonk(a) == INT and s.zonk(b) == INT


def test_occurs_check():
    a = fresh_var()
    with pytest.raises(UnifyError, match="occurs"):
        unify(a, list_of(a), Subst())


def test_one_way_matching_keeps_other_side_fixed():
    a, b = fresh_var(), fresh_var()
    only_a = {a.id}.__contains__
    s = Subst()
    unify(list_of(a), list_of(b), s, only_a)
    assert s.zonk(a) == b
    with pytest.raises(UnifyError):
        unify(INT, b, Subst(), only_a)


# ---------------------------------------------------------------- MGU oracle
#
# Types over {int, list, pair} and three variables, depth <= 3.  A unifier
# is most general if every ground unifier drawn from a small universe
# factors through it.

VARS = [TVar(-1), TVar(-2), TVar(-3)]


def types(depth):
    leaves = st.sampled_from([INT] + VARS)
    if depth == 0:
        return leaves
    sub = types(depth - 1)
    return st.one_of(
        leaves,
        sub.map(list_of),
        st.tuples(sub, sub).map(lambda p: tuple_of(*p)),
    )


GROUND = [INT, list_of(INT), tuple_of(INT, INT), list_of(list_of(INT))]


def apply(t, env):
    if isinstance(t, TVar):
        return env.get(t.id, t)
    if isinstance(t, TCon):
        return TCon(t.name, tuple(apply(a, env) for a in t.args))
    return t


@settings(max_examples=400, deadline=None)
@given(types(3), types(3))
def test_unifier_is_most_general(x, y):
    s = Subst()
    try:
        unify(x, y, s)
        mgu = True
    except UnifyError:
        mgu = False
    if mgu:
        assert s.zonk(x) == s.zonk(y)
    for choice in itertools.product(GROUND, repeat=3):
        g = {v.id: c for v, c in zip(VARS, choice)}
        if apply(x, g) != apply(y, g):
            continue
        assert mgu, "a ground unifier exists but unification failed"
        for v in VARS:
            assert apply(s.zonk(v), g) == g[v.id]


# ---------------------------------------------------------------- inclusion

INCLUSION_SRC = SHOW_PRELUDE + """
module type Add = sig
  type t
  val zero : t
  val ( + ) : t -> t -> t
end

module Show_read_int = struct
  type t = int
  let show = string_of_int
  let read = int_of_string
end

module Num_int = struct
  type t = int
  let zero = 0
  let one = 1
  let ( + ) = Pervasives.( + )
  let ( * ) = Pervasives.( * )
end
"""


def includes(c, env, module: str, target: str) -> bool:
    cand = c.registry.sig_of(env.modules[module])
    tgt = c.eval_modtype(parse_modtype(target), env.with_tyvars({}), PIdent(fresh_ident("T")))
    try:
        c.registry.include(cand, tgt, c.subst.copy())
        return True
    except InclusionError:
        return False


@pytest.fixture(scope="module")
def inclusion_env():
    return checked(INCLUSION_SRC)


def test_extra_members_are_allowed(inclusion_env):
    assert includes(*inclusion_env, "Show_read_int", "Show with type t = int")


def test_num_matches_add(inclusion_env):
    assert includes(*inclusion_env, "Num_int", "Add")


def test_manifest_clash(inclusion_env):
    assert not includes(*inclusion_env, "Show_float", "Show with type t = int")


def test_missing_member(inclusion_env):
    assert not includes(*inclusion_env, "Show_int", "Add")


ITEMS = [
    "type t", "type t = int", "type u = string", "val x : int", "val x : string",
    "val f : t -> t", "val g : 'a -> 'a", "val g : int -> int", "val y : t list",
]


def sig_text(items):
    names = set()
    out = []
    for it in items:
        key = it.split(":")[0].split("=")[0].strip()
        if key.split()[-1] in names:
            continue
        names.add(key.split()[-1])
        out.append(it)
    if not any(i.startswith("type t") for i in out) and any(" t" in i for i in out):
        out.append("type t")
    out.sort(key=lambda i: not i.startswith("type"))
    return "sig " + " ".join(out) + " end"


def sig_of_text(c, env, text):
    return c.eval_modtype(parse_modtype(text), env.with_tyvars({}), PIdent(fresh_ident("X")))


def included(c, a, b):
    try:
        c.registry.include(a, b, Subst())
        return True
    except InclusionError:
        return False


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(ITEMS), max_size=5),
       st.lists(st.sampled_from(ITEMS), max_size=5),
       st.lists(st.sampled_from(ITEMS), max_size=5))
def test_inclusion_reflexive_and_transitive(xs, ys, zs):
    c, env = checked("")
    a, b, d = (sig_of_text(c, env, sig_text(i)) for i in (xs, ys, zs))
    assert included(c, a, a)
    if included(c, a, b) and included(c, b, d):
        assert included(c, a, d)


def test_alias_paths_are_congruent():
    c, env = checked("""
module A : sig type t end = struct type t = int end
module B = A
module C : sig type t end = struct type t = int end
""")
    local = env.with_tyvars({})
    a, b, other = (c.convert_type(parse_type(f"{m}.t list"), local) for m in "ABC")
    unify(a, b, Subst())
    with pytest.raises(UnifyError):
        unify(a, other, Subst())


# ---------------------------------------------------------------- manifests


def test_expand_show_list_body():
    c, env = checked(SHOW_PRELUDE)
    fs = c.registry.sig_of(env.modules["Show_list"])
    t = expand_manifest(fs.result, "t", ())
    assert t == list_of(TMember(PIdent(fs.param), "t", ()))


def test_expand_discards_parameter():
    c, env = checked("module Monad_odd = struct type 'a t = int list end")
    sig = c.registry.sig_of(env.modules["Monad_odd"])
    assert expand_manifest(sig, "t", (fresh_var(),)) == list_of(INT)


def test_expand_abstract_member():
    root = PIdent(fresh_ident("M"))
    c, env = checked("module type S = sig type t end")
    sig = c.eval_modtype(parse_modtype("S"), env.with_tyvars({}), root)
    assert expand_manifest(sig, "t", ()) == TMember(root, "t", ())


def test_constraint_size():
    a = fresh_var()
    assert constraint_size(INT) == 1
    assert constraint_size(list_of(INT)) == 2
    assert constraint_size(a) == 1
    assert constraint_size(list_of(list_of(INT))) == 3
    assert constraint_size(tuple_of(INT, STRING)) == 3


# ---------------------------------------------------------------- printing


def test_sexpr_forms():
    a = fresh_var()
    t = tuple_of(list_of(a), a)
    assert sexpr_type(t) == "(con tuple (con list (var a)) (var a))"
    c, env = checked(SHOW_PRELUDE)
    sig = c.registry.sig_of(env.modules["Show_int"])
    assert sexpr_modtype(sig) == (
        "(sig (type t () (con int)) (val show (forall () (arrow (con int) (con string)))))"
    )


def test_show_type_names_variables_in_order():
    a, b = fresh_var(), fresh_var()
    assert show_type(TArrow(b, TArrow(a, b))) == "'a -> 'b -> 'a"
