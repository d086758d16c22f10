"""Core types, signatures, module paths and unification.

Types are immutable.  Flexible variables are solved through a `Subst`, a
plain mapping from variable id to type that is copied for trial matches
during resolution.

Module paths identify modules: a root `Ident` (unique per binding), a
projection `P.M` or a functor application `F(A)`.  A signature knows the
path it describes (`Sig.self`); member types of abstract items are written
`TMember(path, name, args)` and are rigid, compared by path.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

# ---------------------------------------------------------------- identifiers

_stamps = itertools.count(1)


@dataclass(frozen=True)
class Ident:
    name: str
    stamp: int

    def __str__(self) -> str:
        return self.name


def fresh_ident(name: str) -> Ident:
    return Ident(name, next(_stamps))


@dataclass(frozen=True)
class PIdent:
    ident: Ident


@dataclass(frozen=True)
class PDot:
    parent: "Path"
    name: str


@dataclass(frozen=True)
class PApply:
    fn: "Path"
    arg: "Path"


Path = Union[PIdent, PDot, PApply]


def path_str(p: Path) -> str:
    if isinstance(p, PIdent):
        return p.ident.name
    if isinstance(p, PDot):
        return f"{path_str(p.parent)}.{p.name}"
    return f"{path_str(p.fn)}({path_str(p.arg)})"


def path_root(p: Path) -> Ident:
    while not isinstance(p, PIdent):
        p = p.parent if isinstance(p, PDot) else p.fn
    return p.ident


def replace_path(p: Path, mapping: dict) -> Path:
    """Substitute whole sub-paths according to `mapping` (outermost first)."""
    if p in mapping:
        return mapping[p]
    if isinstance(p, PDot):
        parent = replace_path(p.parent, mapping)
        return p if parent is p.parent else PDot(parent, p.name)
    if isinstance(p, PApply):
        fn, arg = replace_path(p.fn, mapping), replace_path(p.arg, mapping)
        return p if (fn is p.fn and arg is p.arg) else PApply(fn, arg)
    return p


def path_mentions(p: Path, targets) -> bool:
    if p in targets:
        return True
    if isinstance(p, PDot):
        return path_mentions(p.parent, targets)
    if isinstance(p, PApply):
        return path_mentions(p.fn, targets) or path_mentions(p.arg, targets)
    return False


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class TVar:
    id: int


@dataclass(frozen=True)
class TRigid:
    id: int
    name: str = "r"


@dataclass(frozen=True)
class TCon:
    """Builtin constructor: int float string bool unit list option tuple."""

    name: str
    args: tuple = ()


@dataclass(frozen=True)
class TArrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class TMember:
    path: Path
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class TImplicit:
    """`{M : S} -> body`; `sig.self` is `PIdent(param)`."""

    param: Ident
    sig: "Sig"
    body: "Type"


@dataclass(frozen=True)
class TPackage:
    """Package of a functor with a single `value` member:
    `(module functor (M : S) -> sig val value : body end)`."""

    param: Ident
    sig: "Sig"
    body: "Type"


Type = Union[TVar, TRigid, TCon, TArrow, TMember, TImplicit, TPackage]

INT, FLOAT, STRING, BOOL, UNIT = (TCon(n) for n in ("int", "float", "string", "bool", "unit"))
BUILTIN_ARITY = {"int": 0, "float": 0, "string": 0, "bool": 0, "unit": 0, "list": 1, "option": 1}


def list_of(t: Type) -> TCon:
    return TCon("list", (t,))


def option_of(t: Type) -> TCon:
    return TCon("option", (t,))


def tuple_of(*ts: Type) -> TCon:
    return TCon("tuple", tuple(ts))


def arrows(*ts: Type) -> Type:
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = TArrow(t, out)
    return out


_var_ids = itertools.count(1)


def fresh_var() -> TVar:
    return TVar(next(_var_ids))


def fresh_rigid(name: str = "r") -> TRigid:
    return TRigid(next(_var_ids), name)


@dataclass(frozen=True)
class Scheme:
    quantified: tuple  # of TVar ids
    body: Type


def mono(t: Type) -> Scheme:
    return Scheme((), t)


# ---------------------------------------------------------------- signatures


@dataclass(frozen=True)
class TypeItem:
    name: str
    params: tuple  # TVar ids standing for the parameters
    manifest: Optional[Type]


@dataclass(frozen=True)
class ValItem:
    name: str
    scheme: Scheme


@dataclass(frozen=True)
class ModItem:
    name: str
    mty: "ModType"
    alias: Optional[Path] = None
    implicit: bool = False


@dataclass(frozen=True)
class Sig:
    self: Path
    items: tuple
    name: Optional[str] = field(default=None, compare=False)

    def find(self, kind, name):
        for item in self.items:
            if isinstance(item, kind) and item.name == name:
                return item
        return None

    def type_item(self, name) -> Optional[TypeItem]:
        return self.find(TypeItem, name)

    def val_item(self, name) -> Optional[ValItem]:
        return self.find(ValItem, name)

    def mod_item(self, name) -> Optional[ModItem]:
        return self.find(ModItem, name)


@dataclass(frozen=True)
class FunctorSig:
    """`functor (param : param_sig) -> result`.  `alias` is set when the
    functor body is a path, e.g. `Show_l {S : Show} = Show_list{S}`."""

    param: Ident
    param_sig: Sig
    result: "ModType"
    alias: Optional[Path] = None
    name: Optional[str] = field(default=None, compare=False)


ModType = Union[Sig, FunctorSig]


def functor_params(mty: ModType):
    """Split a curried functor signature into ([(ident, sig)], result)."""
    params = []
    while isinstance(mty, FunctorSig):
        params.append((mty.param, mty.param_sig))
        mty = mty.result
    return params, mty


# ---------------------------------------------------------------- generic maps


def map_type(t: Type, f: Callable[[Type], Optional[Type]]) -> Type:
    """Bottom-up rebuild; `f` may return a replacement for a rebuilt node."""
    if isinstance(t, TCon):
        args = tuple(map_type(a, f) for a in t.args)
        t = t if args == t.args else TCon(t.name, args)
    elif isinstance(t, TArrow):
        t = TArrow(map_type(t.dom, f), map_type(t.cod, f))
    elif isinstance(t, TMember):
        args = tuple(map_type(a, f) for a in t.args)
        t = t if args == t.args else TMember(t.path, t.name, args)
    elif isinstance(t, (TImplicit, TPackage)):
        t = type(t)(t.param, map_sig(t.sig, f), map_type(t.body, f))
    r = f(t)
    return t if r is None else r


def map_scheme(s: Scheme, f) -> Scheme:
    return Scheme(s.quantified, map_type(s.body, f))


def map_sig(s: Sig, f) -> Sig:
    return Sig(s.self, tuple(map_item(i, f) for i in s.items), s.name)


def map_item(i, f):
    if isinstance(i, TypeItem):
        return TypeItem(i.name, i.params, None if i.manifest is None else map_type(i.manifest, f))
    if isinstance(i, ValItem):
        return ValItem(i.name, map_scheme(i.scheme, f))
    return ModItem(i.name, map_modtype(i.mty, f), i.alias, i.implicit)


def map_modtype(m: ModType, f) -> ModType:
    if isinstance(m, Sig):
        return map_sig(m, f)
    return FunctorSig(m.param, map_sig(m.param_sig, f), map_modtype(m.result, f), m.alias, m.name)


def type_nodes(t: Type):
    yield t
    if isinstance(t, (TCon, TMember)):
        for a in t.args:
            yield from type_nodes(a)
    elif isinstance(t, TArrow):
        yield from type_nodes(t.dom)
        yield from type_nodes(t.cod)
    elif isinstance(t, (TImplicit, TPackage)):
        yield from sig_type_nodes(t.sig)
        yield from type_nodes(t.body)


def sig_type_nodes(s: Sig):
    for i in s.items:
        if isinstance(i, TypeItem) and i.manifest is not None:
            yield from type_nodes(i.manifest)
        elif isinstance(i, ValItem):
            yield from type_nodes(i.scheme.body)
        elif isinstance(i, ModItem):
            yield from modtype_type_nodes(i.mty)


def modtype_type_nodes(m: ModType):
    if isinstance(m, Sig):
        yield from sig_type_nodes(m)
    else:
        yield from sig_type_nodes(m.param_sig)
        yield from modtype_type_nodes(m.result)


def free_vars(t: Type) -> set:
    return {n.id for n in type_nodes(t) if isinstance(n, TVar)}


def substitute_vars(t: Type, mapping: dict) -> Type:
    """Replace TVar ids by types (no chasing through a Subst)."""
    if not mapping:
        return t
    return map_type(t, lambda n: mapping.get(n.id) if isinstance(n, TVar) else None)


def reroot_type(t: Type, mapping: dict, expand=None) -> Type:
    """Replace sub-paths of member types; `expand` may unfold the result."""

    def f(n):
        if isinstance(n, TMember):
            p = replace_path(n.path, mapping)
            if p is n.path:
                return None
            m = TMember(p, n.name, n.args)
            return expand(m) if expand else m
        if isinstance(n, (TImplicit, TPackage)):
            return None
        return None

    return map_type(t, f)


def reroot_modtype(m: ModType, mapping: dict, expand=None) -> ModType:
    f = lambda t: reroot_type(t, mapping, expand)  # noqa: E731

    def rsig(s: Sig) -> Sig:
        items = []
        for i in s.items:
            if isinstance(i, TypeItem):
                items.append(TypeItem(i.name, i.params, None if i.manifest is None else f(i.manifest)))
            elif isinstance(i, ValItem):
                items.append(ValItem(i.name, Scheme(i.scheme.quantified, f(i.scheme.body))))
            else:
                alias = None if i.alias is None else replace_path(i.alias, mapping)
                items.append(ModItem(i.name, reroot_modtype(i.mty, mapping, expand), alias, i.implicit))
        return Sig(replace_path(s.self, mapping), tuple(items), s.name)

    if isinstance(m, Sig):
        return rsig(m)
    alias = None if m.alias is None else replace_path(m.alias, mapping)
    return FunctorSig(m.param, rsig(m.param_sig), reroot_modtype(m.result, mapping, expand), alias, m.name)


# ---------------------------------------------------------------- substitution


class UnifyError(Exception):
    def __init__(self, message: str, left=None, right=None):
        super().__init__(message)
        self.left = left
        self.right = right


class Subst:
    """Solutions for flexible variables.  `copy` gives an independent trial."""

    def __init__(self, table: Optional[dict] = None):
        self.table = dict(table or {})

    def copy(self) -> "Subst":
        return Subst(self.table)

    def bind(self, v: int, t: Type) -> None:
        self.table[v] = t

    def shallow(self, t: Type) -> Type:
        while isinstance(t, TVar) and t.id in self.table:
            t = self.table[t.id]
        return t

    def zonk(self, t: Type) -> Type:
        t = self.shallow(t)
        if isinstance(t, TVar) or isinstance(t, TRigid):
            return t
        if isinstance(t, TCon):
            return TCon(t.name, tuple(self.zonk(a) for a in t.args))
        if isinstance(t, TArrow):
            return TArrow(self.zonk(t.dom), self.zonk(t.cod))
        if isinstance(t, TMember):
            return TMember(t.path, t.name, tuple(self.zonk(a) for a in t.args))
        return type(t)(t.param, self.zonk_sig(t.sig), self.zonk(t.body))

    def zonk_sig(self, s: Sig) -> Sig:
        return map_sig(s, lambda n: self.zonk(n) if isinstance(n, TVar) else None)

    def zonk_modtype(self, m: ModType) -> ModType:
        return map_modtype(m, lambda n: self.zonk(n) if isinstance(n, TVar) else None)

    def zonk_scheme(self, s: Scheme) -> Scheme:
        return Scheme(s.quantified, self.zonk(s.body))


def occurs(v: int, t: Type, subst: Subst) -> bool:
    return v in free_vars(subst.zonk(t))


def unify(a: Type, b: Type, subst: Subst, flexible: Optional[Callable[[int], bool]] = None) -> None:
    """Most general unifier, extending `subst` in place.

    When `flexible` is given only variables it accepts may be bound (used
    for one-way matching)."""
    a, b = subst.shallow(a), subst.shallow(b)
    if a == b:
        return
    if isinstance(a, TVar) and (flexible is None or flexible(a.id)):
        return _bind(a, b, subst)
    if isinstance(b, TVar) and (flexible is None or flexible(b.id)):
        return _bind(b, a, subst)
    if isinstance(a, TCon) and isinstance(b, TCon):
        if a.name != b.name or len(a.args) != len(b.args):
            raise UnifyError("constructor clash", a, b)
        for x, y in zip(a.args, b.args):
            unify(x, y, subst, flexible)
        return
    if isinstance(a, TArrow) and isinstance(b, TArrow):
        unify(a.dom, b.dom, subst, flexible)
        unify(a.cod, b.cod, subst, flexible)
        return
    if isinstance(a, TMember) and isinstance(b, TMember):
        if a.path != b.path or a.name != b.name or len(a.args) != len(b.args):
            raise UnifyError("rigid member", a, b)
        for x, y in zip(a.args, b.args):
            unify(x, y, subst, flexible)
        return
    if type(a) is type(b) and isinstance(a, (TImplicit, TPackage)):
        mapping = {PIdent(b.param): PIdent(a.param)}
        bsig = reroot_modtype(b.sig, mapping)
        sig_unify(a.sig, bsig, subst, flexible)
        unify(a.body, reroot_type(b.body, mapping), subst, flexible)
        return
    if isinstance(a, TMember) or isinstance(b, TMember):
        raise UnifyError("rigid member", a, b)
    raise UnifyError("type clash", a, b)


def _bind(v: TVar, t: Type, subst: Subst) -> None:
    if isinstance(t, TVar) and t.id == v.id:
        return
    if occurs(v.id, t, subst):
        raise UnifyError("occurs check", v, t)
    subst.bind(v.id, t)


def sig_unify(a: Sig, b: Sig, subst: Subst, flexible=None) -> None:
    """Structural equality of two signatures with the same self path."""
    if len(a.items) != len(b.items):
        raise UnifyError("signature shapes differ")
    for x, y in zip(a.items, b.items):
        if type(x) is not type(y) or x.name != y.name:
            raise UnifyError("signature shapes differ")
        if isinstance(x, TypeItem):
            if len(x.params) != len(y.params) or (x.manifest is None) != (y.manifest is None):
                raise UnifyError("signature shapes differ")
            if x.manifest is not None:
                args = tuple(fresh_rigid() for _ in x.params)
                unify(
                    substitute_vars(x.manifest, dict(zip(x.params, args))),
                    substitute_vars(y.manifest, dict(zip(y.params, args))),
                    subst,
                    flexible,
                )
        elif isinstance(x, ValItem):
            if len(x.scheme.quantified) != len(y.scheme.quantified):
                raise UnifyError("signature shapes differ")
            rig = tuple(fresh_rigid() for _ in x.scheme.quantified)
            unify(
                substitute_vars(x.scheme.body, dict(zip(x.scheme.quantified, rig))),
                substitute_vars(y.scheme.body, dict(zip(y.scheme.quantified, rig))),
                subst,
                flexible,
            )
        else:
            if isinstance(x.mty, Sig) and isinstance(y.mty, Sig):
                sig_unify(x.mty, reroot_modtype(y.mty, {y.mty.self: x.mty.self}), subst, flexible)
            elif x.mty != y.mty:
                raise UnifyError("signature shapes differ")


def instantiate(s: Scheme) -> Type:
    if not s.quantified:
        return s.body
    return substitute_vars(s.body, {v: fresh_var() for v in s.quantified})


def generalize(t: Type, subst: Subst, exclude: set) -> Scheme:
    t = subst.zonk(t)
    qs = [v for v in _ordered_vars(t) if v not in exclude]
    return Scheme(tuple(qs), t)


def _ordered_vars(t: Type) -> list:
    seen = []
    for n in type_nodes(t):
        if isinstance(n, TVar) and n.id not in seen:
            seen.append(n.id)
    return seen


# ---------------------------------------------------------------- sizes


def constraint_size(t: Type) -> int:
    """Node count: constructor applications, member applications and
    variables each count one."""
    if isinstance(t, (TCon, TMember)):
        return 1 + sum(constraint_size(a) for a in t.args)
    if isinstance(t, TArrow):
        return 1 + constraint_size(t.dom) + constraint_size(t.cod)
    if isinstance(t, (TImplicit, TPackage)):
        return 1 + constraint_size(t.body)
    return 1


# ---------------------------------------------------------------- manifests


def expand_manifest(sig: Sig, member: str, args: tuple) -> Type:
    """The manifest of `member` in `sig` applied to `args`; an abstract
    member comes back as the rigid member type at the signature's path."""
    item = sig.type_item(member)
    if item is None:
        raise KeyError(member)
    if item.manifest is None:
        return TMember(sig.self, member, tuple(args))
    return substitute_vars(item.manifest, dict(zip(item.params, args)))


def is_abstract(sig: Sig, member: str) -> bool:
    item = sig.type_item(member)
    return item is not None and item.manifest is None


# ---------------------------------------------------------------- printing


class VarNamer:
    """Canonical names 'a, 'b, ... in order of first appearance."""

    def __init__(self):
        self.names = {}

    def name(self, key) -> str:
        if key not in self.names:
            i = len(self.names)
            letter = chr(ord("a") + i % 26)
            self.names[key] = letter + (str(i // 26) if i >= 26 else "")
        return self.names[key]


def show_type(t: Type, namer: Optional[VarNamer] = None, ctx: int = 0) -> str:
    namer = namer or VarNamer()
    if isinstance(t, TVar):
        return "'" + namer.name(("v", t.id))
    if isinstance(t, TRigid):
        return "'" + namer.name(("r", t.id))
    if isinstance(t, TCon):
        if t.name == "tuple":
            text = " * ".join(show_type(a, namer, 2) for a in t.args)
            return f"({text})" if ctx >= 2 else text
        return _applied(t.name, t.args, namer)
    if isinstance(t, TMember):
        return _applied(f"{path_str(t.path)}.{t.name}", t.args, namer)
    if isinstance(t, TArrow):
        text = f"{show_type(t.dom, namer, 1)} -> {show_type(t.cod, namer, 0)}"
        return f"({text})" if ctx >= 1 else text
    if isinstance(t, TImplicit):
        text = "{" + f"{t.param.name} : {show_sig_name(t.sig, namer)}" + "} -> " + show_type(t.body, namer)
        return f"({text})" if ctx >= 1 else text
    if isinstance(t, TPackage):
        return (f"(module functor ({t.param.name} : {show_sig_name(t.sig, namer)}) -> "
                f"sig val value : {show_type(t.body, namer)} end)")
    raise TypeError(t)


def _applied(name: str, args: tuple, namer: VarNamer) -> str:
    if not args:
        return name
    if len(args) == 1:
        return f"{show_type(args[0], namer, 2)} {name}"
    return "(" + ", ".join(show_type(a, namer) for a in args) + f") {name}"


def show_sig_name(s: Sig, namer: Optional[VarNamer] = None) -> str:
    if s.name:
        return s.name
    return show_modtype(s, namer)


def show_modtype(m: ModType, namer: Optional[VarNamer] = None) -> str:
    namer = namer or VarNamer()
    if isinstance(m, FunctorSig):
        return f"functor ({m.param.name} : {show_sig_name(m.param_sig, namer)}) -> {show_modtype(m.result, namer)}"
    parts = []
    for i in m.items:
        if isinstance(i, TypeItem):
            ps = _tparams(i.params, namer)
            text = f"type {ps}{i.name}"
            if i.manifest is not None:
                text += f" = {show_type(i.manifest, namer)}"
            parts.append(text)
        elif isinstance(i, ValItem):
            parts.append(f"val {i.name} : {show_type(i.scheme.body, namer)}")
        elif i.alias is not None:
            parts.append(f"module {i.name} = {path_str(i.alias)}")
        else:
            kw = "implicit module" if i.implicit else "module"
            parts.append(f"{kw} {i.name} : {show_modtype(i.mty, namer)}")
    return "sig " + "".join(p + " " for p in parts) + "end"


def _tparams(params, namer) -> str:
    if not params:
        return ""
    names = ["'" + namer.name(("v", p)) for p in params]
    if len(names) == 1:
        return names[0] + " "
    return "(" + ", ".join(names) + ") "


# ---------------------------------------------------------------- s-expressions


def sexpr_type(t: Type, namer: Optional[VarNamer] = None) -> str:
    """Debug serialization, e.g. `(arrow (var a) (con list (con int)))`."""
    namer = namer or VarNamer()
    if isinstance(t, TVar):
        return f"(var {namer.name(('v', t.id))})"
    if isinstance(t, TRigid):
        return f"(rigid {namer.name(('r', t.id))})"
    if isinstance(t, TCon):
        return "(con " + " ".join([t.name] + [sexpr_type(a, namer) for a in t.args]) + ")"
    if isinstance(t, TArrow):
        return f"(arrow {sexpr_type(t.dom, namer)} {sexpr_type(t.cod, namer)})"
    if isinstance(t, TMember):
        parts = [sexpr_path(t.path), t.name] + [sexpr_type(a, namer) for a in t.args]
        return "(member " + " ".join(parts) + ")"
    tag = "implicit" if isinstance(t, TImplicit) else "package"
    return f"({tag} {t.param.name} {sexpr_modtype(t.sig, namer)} {sexpr_type(t.body, namer)})"


def sexpr_path(p: Path) -> str:
    if isinstance(p, PIdent):
        return p.ident.name
    if isinstance(p, PDot):
        return f"(dot {sexpr_path(p.parent)} {p.name})"
    return f"(apply {sexpr_path(p.fn)} {sexpr_path(p.arg)})"


def sexpr_modtype(m: ModType, namer: Optional[VarNamer] = None) -> str:
    namer = namer or VarNamer()
    if isinstance(m, FunctorSig):
        return f"(functor {m.param.name} {sexpr_modtype(m.param_sig, namer)} {sexpr_modtype(m.result, namer)})"
    parts = []
    for i in m.items:
        if isinstance(i, TypeItem):
            ps = " ".join(namer.name(("v", p)) for p in i.params)
            head = f"(type {i.name} ({ps})"
            parts.append(head + (f" {sexpr_type(i.manifest, namer)})" if i.manifest is not None else ")"))
        elif isinstance(i, ValItem):
            qs = " ".join(namer.name(("v", q)) for q in i.scheme.quantified)
            parts.append(f"(val {i.name} (forall ({qs}) {sexpr_type(i.scheme.body, namer)}))")
        elif i.alias is not None:
            parts.append(f"(alias {i.name} {sexpr_path(i.alias)})")
        else:
            kw = "implicit-module" if i.implicit else "module"
            parts.append(f"({kw} {i.name} {sexpr_modtype(i.mty, namer)})")
    return "(sig" + "".join(" " + p for p in parts) + ")"
