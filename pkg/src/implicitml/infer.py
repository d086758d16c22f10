"""Type inference with implicit obligations.

Hindley-Milner inference extended with implicit arrows.  Using a value
whose type starts with `{M : S} -> t` opens an *obligation*: the abstract
members of `M` in `t` become fresh variables and the obligation records
the equations they must satisfy.  Obligations are resolved, in the order
they were created, whenever a binding is about to be generalized.

`Checker(implicits=False)` rejects every implicit construct; it is used
to re-check elaborated programs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from . import builtins
from .diagnostics import CompileError, Diagnostic
from .modules import AliasCycle, InclusionError, Registry, UnknownPath
from .resolve import (
    Ambiguous, Candidate, Constraint, DEFAULT_MAX_DEPTH, NoSolution, Obligation,
    Resolver, ScopeEntry, TerminationFailure, Unique, member_subpath, show_constraints,
)
from .surface import syntax as S
from .surface.parser import parse_modtype, parse_type
from .surface.pretty import pretty_modtype, value_name
from .types import (
    BOOL, BUILTIN_ARITY, FLOAT, INT, STRING, UNIT, FunctorSig, ModItem, ModType, PApply,
    PDot, PIdent, Path, Scheme, Sig, Subst, TArrow, TCon, TImplicit, TMember, TPackage,
    TVar, Type, TypeItem, UnifyError, ValItem, VarNamer, free_vars, fresh_ident,
    fresh_var, functor_params, generalize, instantiate, list_of, map_sig, map_type, mono,
    option_of, path_str, reroot_modtype, reroot_type, show_modtype, show_type,
    substitute_vars, tuple_of, type_nodes, unify,
)


def fail(code: str, span, message: str, **payload):
    raise CompileError(Diagnostic(code, span, message, payload))


@dataclass(frozen=True)
class ValueInfo:
    scheme: Scheme
    param_span: Optional[S.Span] = None  # unannotated lambda parameter
    closed: bool = False


@dataclass(frozen=True)
class TypeDef:
    params: tuple  # TVar ids
    manifest: Optional[Type]
    owner: Optional[Path]  # path of the signature declaring an abstract type

    def apply(self, args: tuple, name: str) -> Type:
        if self.manifest is None:
            return TMember(self.owner, name, args)
        return substitute_vars(self.manifest, dict(zip(self.params, args)))


class Env:
    """Immutable typing environment."""

    __slots__ = ("values", "modules", "modtypes", "types", "scope", "tyvars")

    def __init__(self, values=None, modules=None, modtypes=None, types=None, scope=(), tyvars=None):
        self.values = values or {}
        self.modules = modules or {}
        self.modtypes = modtypes or {}
        self.types = types or {}
        self.scope = scope
        self.tyvars = tyvars if tyvars is not None else {}

    def _with(self, **kw) -> "Env":
        fields = {k: getattr(self, k) for k in self.__slots__}
        fields.update(kw)
        return Env(**fields)

    def with_value(self, name: str, info: ValueInfo) -> "Env":
        return self._with(values={**self.values, name: info})

    def with_values(self, pairs) -> "Env":
        return self._with(values={**self.values, **dict(pairs)})

    def with_module(self, name: str, path: Path) -> "Env":
        scope = tuple(e for e in self.scope if e.name != name)
        return self._with(modules={**self.modules, name: path}, scope=scope)

    def with_modtype(self, name: str, sig) -> "Env":
        return self._with(modtypes={**self.modtypes, name: sig})

    def with_type(self, name: str, td: TypeDef) -> "Env":
        return self._with(types={**self.types, name: td})

    def with_entry(self, entry: ScopeEntry) -> "Env":
        scope = tuple(e for e in self.scope if e.name != entry.name) + (entry,)
        return self._with(scope=scope)

    def with_tyvars(self, tyvars: dict) -> "Env":
        return self._with(tyvars=tyvars)


class Checker:
    def __init__(self, max_depth: int = DEFAULT_MAX_DEPTH, trace=None, implicits: bool = True):
        self.registry = Registry()
        self.subst = Subst()
        self.implicits = implicits
        self.resolver = Resolver(self.registry, max_depth, trace)
        self.obligations: dict = {}
        self.frames: list = []
        self.resolutions: dict = {}  # obligation id -> Candidate
        self.elided: dict = {}  # id(App or Binop node) -> [(arg position, obligation id)]
        self.toplevel: list = []  # (name, Scheme)
        self._keep: list = []
        self._ob_ids = itertools.count(1)
        self.env = self._initial_env()

    # ------------------------------------------------------------ setup

    def _initial_env(self) -> Env:
        env = Env()
        for mod, entries in builtins.library().items():
            items = []
            for name, text, _ in entries:
                t = self.convert_type(parse_type(text), env.with_tyvars({}))
                items.append(ValItem(name, generalize(t, self.subst, set())))
            ident = fresh_ident(mod)
            self.registry.add(ident, Sig(PIdent(ident), tuple(items), mod))
            env = env.with_module(mod, PIdent(ident))
            if mod == "Pervasives":
                env = env.with_values((i.name, ValueInfo(i.scheme, closed=True)) for i in items)
        return env

    # ------------------------------------------------------------ helpers

    def zonk(self, t: Type) -> Type:
        return self.subst.zonk(t)

    def unify_at(self, span, actual: Type, expected: Type, what: str = "This expression") -> None:
        try:
            unify(actual, expected, self.subst)
        except UnifyError as e:
            n = VarNamer()
            a, b = show_type(self.zonk(actual), n), show_type(self.zonk(expected), n)
            extra = " (the type would be cyclic)" if str(e) == "occurs check" else ""
            fail("E-TYPE", span, f"{what} has type {a} but an expression was expected of type {b}{extra}")

    def require_implicits(self, node) -> None:
        if not self.implicits:
            fail("E-TYPE", node.span, "implicit constructs are not allowed here")

    def include_at(self, span, cand: ModType, target: ModType, what: str) -> None:
        try:
            self.registry.include(cand, target, self.subst)
        except InclusionError as e:
            fail("E-SIG-MISMATCH", span, f"{what} does not match the expected signature: {e}")

    def lookup_module(self, names: tuple, env: Env, span) -> Path:
        head = names[0]
        if head not in env.modules:
            fail("E-UNBOUND", span, f"unbound module {head}")
        p = env.modules[head]
        for n in names[1:]:
            p = PDot(p, n)
        try:
            self.registry.sig_of(p)
        except UnknownPath:
            fail("E-UNBOUND", span, f"unbound module {'.'.join(names)}")
        except AliasCycle as e:
            fail("E-ALIAS-CYCLE", span, str(e))
        return p

    def sig_at(self, p: Path, span) -> ModType:
        try:
            return self.registry.sig_of(p)
        except UnknownPath as e:
            fail("E-UNBOUND", span, f"unbound module {e}")
        except AliasCycle as e:
            fail("E-ALIAS-CYCLE", span, str(e))
        except InclusionError as e:
            fail("E-SIG-MISMATCH", span, str(e))

    def normalize_at(self, p: Path, span) -> Path:
        try:
            return self.registry.normalize(p)
        except AliasCycle as e:
            fail("E-ALIAS-CYCLE", span, str(e))

    # ------------------------------------------------------------ types

    def convert_type(self, ty, env: Env) -> Type:
        if isinstance(ty, S.TyVar):
            if ty.name not in env.tyvars:
                env.tyvars[ty.name] = fresh_var()
            return env.tyvars[ty.name]
        if isinstance(ty, S.TyArrow):
            return TArrow(self.convert_type(ty.dom, env), self.convert_type(ty.cod, env))
        if isinstance(ty, S.TyTuple):
            return tuple_of(*(self.convert_type(t, env) for t in ty.items))
        if isinstance(ty, S.TyCon):
            args = tuple(self.convert_type(a, env) for a in ty.args)
            return self.type_constructor(ty, args, env)
        if isinstance(ty, S.TyImplicit):
            self.require_implicits(ty)
            ident, sig, inner = self.bind_param(ty.name, ty.mtype, env)
            return TImplicit(ident, sig, self.convert_type(ty.body, inner))
        if isinstance(ty, S.TyPackage):
            return self.package_type(ty, env)
        raise TypeError(ty)

    def type_constructor(self, ty: S.TyCon, args: tuple, env: Env) -> Type:
        name = ty.name
        if ty.path:
            p = self.lookup_module(ty.path, env, ty.span)
            sig = self.sig_at(p, ty.span)
            item = sig.type_item(name) if isinstance(sig, Sig) else None
            if item is None:
                fail("E-UNBOUND", ty.span, f"unbound type {'.'.join(ty.path)}.{name}")
            self.check_arity(ty, len(item.params), len(args))
            return self.registry.expand_member(p, name, args)
        if name in env.types:
            td = env.types[name]
            self.check_arity(ty, len(td.params), len(args))
            return td.apply(args, name)
        if name in BUILTIN_ARITY:
            self.check_arity(ty, BUILTIN_ARITY[name], len(args))
            return TCon(name, args)
        fail("E-UNBOUND", ty.span, f"unbound type constructor {name}")

    def check_arity(self, ty, want: int, got: int) -> None:
        if want != got:
            fail("E-TYPE", ty.span, f"type {ty.name} expects {want} argument(s) but is given {got}")

    def package_type(self, ty: S.TyPackage, env: Env) -> Type:
        mt = ty.mtype
        if (isinstance(mt, S.MTFunctor) and isinstance(mt.result, S.MTSig)
                and len(mt.result.items) == 1 and isinstance(mt.result.items[0], S.SVal)
                and mt.result.items[0].name == "value"):
            ident, sig, inner = self.bind_param(mt.param, mt.param_type, env)
            return TPackage(ident, sig, self.convert_type(mt.result.items[0].ty, inner))
        fail("E-TYPE", ty.span, "only packages of the form (module functor (M : S) -> sig val value : t end) are supported")

    def bind_param(self, name: str, mtype, env: Env):
        """Register a module parameter; returns (ident, sig, env with it bound)."""
        ident = fresh_ident(name)
        sig = self.eval_modtype(mtype, env, PIdent(ident))
        if not isinstance(sig, Sig):
            fail("E-TYPE", mtype.span, "implicit parameters must have a structure signature")
        self.registry.add(ident, sig)
        return ident, sig, env.with_module(name, PIdent(ident))

    # ------------------------------------------------------------ module types

    def eval_modtype(self, mt, env: Env, self_path: Path) -> ModType:
        if isinstance(mt, S.MTName):
            if mt.name not in env.modtypes:
                fail("E-UNBOUND", mt.span, f"unbound module type {mt.name}")
            tmpl = env.modtypes[mt.name]
            if isinstance(tmpl, Sig):
                out = reroot_modtype(tmpl, {tmpl.self: self_path})
                return Sig(out.self, out.items, mt.name)
            return tmpl
        if isinstance(mt, S.MTSig):
            sig = self.eval_sig(mt.items, env, self_path)
            return sig
        if isinstance(mt, S.MTWith):
            base = self.eval_modtype(mt.base, env, self_path)
            if not isinstance(base, Sig):
                fail("E-SIG-MISMATCH", mt.span, "with type applies to structure signatures only")
            for c in mt.constraints:
                base = self.with_type(base, c, env)
            return Sig(base.self, base.items, pretty_modtype(mt))
        if isinstance(mt, S.MTFunctor):
            ident, psig, inner = self.bind_param(mt.param, mt.param_type, env)
            result = self.eval_modtype(mt.result, inner, PIdent(fresh_ident("R")))
            return FunctorSig(ident, psig, result, None, pretty_modtype(mt))
        raise TypeError(mt)

    def eval_sig(self, items, env: Env, self_path: Path) -> Sig:
        out = []
        subs = {}
        local = env
        for it in items:
            if isinstance(it, S.SType):
                tv = {}
                params = tuple(fresh_var() for _ in it.params)
                for n, v in zip(it.params, params):
                    tv[n] = v
                manifest = None
                if it.manifest is not None:
                    manifest = self.convert_type(it.manifest, local.with_tyvars(tv))
                ids = tuple(v.id for v in params)
                out = [i for i in out if not (isinstance(i, TypeItem) and i.name == it.name)]
                out.append(TypeItem(it.name, ids, manifest))
                local = local.with_type(it.name, TypeDef(ids, manifest, self_path))
            elif isinstance(it, S.SVal):
                t = self.convert_type(it.ty, local.with_tyvars({}))
                out.append(ValItem(it.name, generalize(t, Subst(), set())))
            elif isinstance(it, S.SModule):
                sub = fresh_ident(it.name)
                mty = self.eval_modtype(it.mtype, local, PIdent(sub))
                self.registry.add(sub, mty)
                subs[PIdent(sub)] = PDot(self_path, it.name)
                out.append(ModItem(it.name, mty))
                local = local.with_module(it.name, PIdent(sub))
            elif isinstance(it, S.SModuleAlias):
                p = self.lookup_module(it.path, local, it.span)
                out.append(ModItem(it.name, self.sig_at(p, it.span), self.normalize_at(p, it.span)))
                local = local.with_module(it.name, p)
            elif isinstance(it, S.SImplicitModule):
                self.require_implicits(it)
                out.append(self.implicit_sig_item(it, local))
            else:
                raise TypeError(it)
        sig = Sig(self_path, tuple(out))
        if subs:
            sig = reroot_modtype(sig, subs)
        return sig

    def implicit_sig_item(self, it: S.SImplicitModule, env: Env) -> ModItem:
        inner = env
        params = []
        for ip in it.iparams:
            ident, psig, inner = self.bind_param(ip.name, ip.mtype, inner)
            params.append((ident, psig))
        alias = None
        if it.alias is not None:
            p = self.modexpr_path(it.alias, inner)
            alias = p
            result = self.sig_at(p, it.alias.span)
        else:
            result = self.eval_modtype(it.mtype, inner, PIdent(fresh_ident(it.name)))
        mty = result
        for i, (ident, psig) in enumerate(reversed(params)):
            mty = FunctorSig(ident, psig, mty, alias if i == 0 else None)
        return ModItem(it.name, mty, alias if not params else None, implicit=True)

    def with_type(self, base: Sig, c: S.WithType, env: Env) -> Sig:
        def update(sig: Sig, path: tuple) -> Sig:
            if path:
                item = sig.mod_item(path[0])
                if item is None or not isinstance(item.mty, Sig):
                    fail("E-SIG-MISMATCH", c.span, f"the signature has no submodule {path[0]}")
                new = update(item.mty, path[1:])
                items = tuple(ModItem(i.name, new, i.alias, i.implicit) if i is item else i for i in sig.items)
                return Sig(sig.self, items, sig.name)
            item = sig.type_item(c.name)
            if item is None:
                fail("E-SIG-MISMATCH", c.span, f"the signature has no type {c.name}")
            if item.manifest is not None:
                fail("E-SIG-MISMATCH", c.span, f"type {c.name} already has a definition")
            if len(item.params) != len(c.params):
                fail("E-SIG-MISMATCH", c.span,
                     f"type {c.name} expects {len(item.params)} parameter(s) but is given {len(c.params)}")
            tv = dict(env.tyvars)
            for n, v in zip(c.params, item.params):
                tv[n] = TVar(v)
            manifest = self.convert_type(c.ty, env.with_tyvars(tv))
            env.tyvars.update({k: v for k, v in tv.items() if k not in c.params})
            new = TypeItem(item.name, item.params, manifest)
            return Sig(sig.self, tuple(new if i is item else i for i in sig.items), sig.name)

        sig = update(base, c.path)
        return self.refresh(sig)

    def refresh(self, sig: Sig) -> Sig:
        """Unfold references to the signature's own manifest types."""

        def lookup(p: Path):
            sub = member_subpath(p, sig.self)
            if sub is None:
                return None
            s = sig
            for n in sub:
                item = s.mod_item(n)
                if item is None or not isinstance(item.mty, Sig) or item.alias is not None:
                    return None
                s = item.mty
            return s

        def f(n):
            if isinstance(n, TMember):
                s = lookup(n.path)
                if s is not None:
                    item = s.type_item(n.name)
                    if item is not None and item.manifest is not None:
                        return substitute_vars(item.manifest, dict(zip(item.params, n.args)))
            return None

        for _ in range(8):
            new = map_sig(sig, f)
            if new == sig:
                break
            sig = new
        return sig

    def modexpr_path(self, me, env: Env) -> Path:
        """The path denoted by a module expression made of names and applications."""
        if isinstance(me, S.MPath):
            return self.lookup_module(me.path, env, me.span)
        if isinstance(me, S.MApply):
            if me.implicit:
                self.require_implicits(me)
            fn = self.modexpr_path(me.fn, env)
            arg = self.modexpr_path(me.arg, env)
            fs = self.sig_at(fn, me.fn.span)
            if not isinstance(fs, FunctorSig):
                fail("E-TYPE", me.fn.span, f"{path_str(fn)} is not a functor")
            self.include_at(me.arg.span, self.sig_at(arg, me.arg.span),
                            self.registry.apply_functor_param(fs, arg), "this module argument")
            return PApply(fn, arg)
        fail("E-TYPE", me.span, "functor arguments must be module paths")

    # ------------------------------------------------------------ obligations

    def instantiate_implicit(self, t: TImplicit, span, env: Env):
        """Open an obligation for `t`; returns (remaining type, obligation)."""
        root = PIdent(t.param)
        constraints = []
        shared = {}

        def f(n):
            if not isinstance(n, TMember):
                return None
            sub = member_subpath(n.path, root)
            if sub is None:
                return None
            if not n.args:
                key = (sub, n.name)
                if key not in shared:
                    shared[key] = fresh_var()
                    constraints.append(Constraint(sub, n.name, (), shared[key]))
                return shared[key]
            v = fresh_var()
            constraints.append(Constraint(sub, n.name, n.args, v))
            return v

        body = map_type(t.body, f)
        ob = Obligation(next(self._ob_ids), t.param.name, t.sig, constraints, span, env.scope)
        self.obligations[ob.id] = ob
        if not self.frames:
            self.frames.append([])
        self.frames[-1].append(ob.id)
        return body, ob

    def flush(self, frame) -> None:
        for ob_id in frame:
            ob = self.obligations[ob_id]
            out = self.resolver.resolve(ob, self.subst)
            if isinstance(out, Unique):
                self.subst.table = out.subst.table
                self.resolutions[ob_id] = out.candidate
            else:
                self.report(ob, out)

    def describe(self, ob: Obligation) -> tuple:
        namer = VarNamer()
        sig = ob.target.name or show_modtype(ob.target, namer)
        cs = [Constraint(c.sub, c.member, tuple(self.zonk(a) for a in c.args), self.zonk(c.rhs))
              for c in ob.constraints]
        text = show_constraints(cs, namer)
        goal = f"{ob.param} : {sig}" + (f" with {text}" if cs else "")
        return goal, [p.strip() for p in text[1:-1].split(",") if p.strip()]

    def report(self, ob: Obligation, out) -> None:
        goal, cs = self.describe(ob)
        if isinstance(out, Ambiguous):
            cands = [{"normal_form": nf, "expr": ex} for nf, ex in out.solutions]
            fail("E-AMBIGUOUS", ob.span, f"ambiguous implicit argument for {goal}",
                 candidates=cands, constraints=cs)
        if isinstance(out, NoSolution):
            fail("E-NO-SOLUTION", ob.span, f"no implicit module in scope matches {goal}",
                 constraints=cs, explored=out.explored)
        assert isinstance(out, TerminationFailure)
        if out.depth_cap:
            fail("E-DEPTH-CAP", ob.span,
                 f"implicit search for {goal} exceeded the depth cap of {self.resolver.max_depth}",
                 functor=out.functor, incoming=out.incoming, max_depth=self.resolver.max_depth,
                 partial_solutions=out.partial, constraints=cs)
        fail("E-TERMINATION", ob.span,
             f"implicit search for {goal} may not terminate: {out.functor} is applied again "
             f"without its constraints getting smaller",
             functor=out.functor, previous=out.previous, incoming=out.incoming,
             partial_solutions=out.partial, constraints=cs)

    # ------------------------------------------------------------ generalization

    def env_vars(self, env: Env) -> set:
        out = set()
        for info in env.values.values():
            if not info.closed:
                out |= free_vars(self.zonk(info.scheme.body)) - set(info.scheme.quantified)
        for frame in self.frames:
            for ob_id in frame:
                for c in self.obligations[ob_id].constraints:
                    out |= free_vars(self.zonk(c.rhs))
                    for a in c.args:
                        out |= free_vars(self.zonk(a))
        return out

    def value_info(self, scheme: Scheme, param_span=None) -> ValueInfo:
        closed = free_vars(scheme.body) <= set(scheme.quantified)
        return ValueInfo(scheme, param_span, closed)

    def generalization_point(self, infer_fn, env: Env):
        """Run `infer_fn` in a fresh obligation frame and resolve what it opened."""
        self.frames.append([])
        try:
            result = infer_fn()
        finally:
            frame = self.frames.pop()
        self.flush(frame)
        return result

    # ------------------------------------------------------------ patterns

    def infer_pattern(self, p, env: Env, binds: dict) -> Type:
        if isinstance(p, S.PVar):
            if p.name in binds:
                fail("E-TYPE", p.span, f"variable {p.name} is bound several times in this pattern")
            binds[p.name] = (fresh_var(), p.span)
            return binds[p.name][0]
        if isinstance(p, S.PWild):
            return fresh_var()
        if isinstance(p, S.PConst):
            return self.const_type(p.value)
        if isinstance(p, S.PTuple):
            return tuple_of(*(self.infer_pattern(i, env, binds) for i in p.items))
        if isinstance(p, S.PList):
            elem = fresh_var()
            for i in p.items:
                self.unify_at(i.span, self.infer_pattern(i, env, binds), elem, "This pattern")
            return list_of(elem)
        if isinstance(p, S.PConstruct):
            if p.name == "None":
                return option_of(fresh_var())
            if p.name == "Some":
                return option_of(self.infer_pattern(p.args[0], env, binds))
            if p.name == "::":
                head = self.infer_pattern(p.args[0], env, binds)
                tail = self.infer_pattern(p.args[1], env, binds)
                self.unify_at(p.args[1].span, tail, list_of(head), "This pattern")
                return tail
            fail("E-UNBOUND", p.span, f"unbound constructor {p.name}")
        if isinstance(p, S.PAnnot):
            t = self.infer_pattern(p.pat, env, binds)
            self.unify_at(p.pat.span, t, self.convert_type(p.ty, env), "This pattern")
            if isinstance(p.pat, S.PVar):
                binds[p.pat.name] = (binds[p.pat.name][0], None)
            return t
        raise TypeError(p)

    def bind_pattern_vars(self, env: Env, binds: dict, generalize_with=None) -> Env:
        pairs = []
        for name, (t, span) in binds.items():
            if generalize_with is None:
                pairs.append((name, ValueInfo(mono(t), span)))
            else:
                pairs.append((name, self.value_info(generalize(t, self.subst, generalize_with))))
        return env.with_values(pairs)

    @staticmethod
    def const_type(c: S.Const) -> Type:
        return {"int": INT, "float": FLOAT, "string": STRING, "bool": BOOL, "unit": UNIT}[c.kind]

    # ------------------------------------------------------------ expressions

    def infer(self, e, env: Env) -> Type:
        return getattr(self, "infer_" + type(e).__name__)(e, env)

    def infer_Const(self, e, env):
        return self.const_type(e)

    def infer_Var(self, e, env):
        if e.path:
            p = self.lookup_module(e.path, env, e.span)
            sig = self.sig_at(p, e.span)
            item = sig.val_item(e.name) if isinstance(sig, Sig) else None
            if item is None:
                fail("E-UNBOUND", e.span, f"unbound value {'.'.join(e.path)}.{e.name}")
            return instantiate(item.scheme)
        info = env.values.get(e.name)
        if info is None:
            fail("E-UNBOUND", e.span, f"unbound value {e.name}")
        return instantiate(info.scheme)

    def infer_Construct(self, e, env):
        if e.name == "None":
            return option_of(fresh_var())
        if e.name == "Some":
            if not e.args:
                v = fresh_var()
                return TArrow(v, option_of(v))
            return option_of(self.infer(e.args[0], env))
        if e.name == "::":
            head = self.infer(e.args[0], env)
            tail = self.infer(e.args[1], env)
            self.unify_at(e.args[1].span, tail, list_of(head))
            return tail
        fail("E-UNBOUND", e.span, f"unbound constructor {e.name}")

    def infer_ListLit(self, e, env):
        elem = fresh_var()
        for i in e.items:
            self.unify_at(i.span, self.infer(i, env), elem)
        return list_of(elem)

    def infer_Tuple(self, e, env):
        return tuple_of(*(self.infer(i, env) for i in e.items))

    def infer_Lambda(self, e, env):
        return self.infer_fun(e.params, e.body, None, env)

    def infer_fun(self, params, body, annot, env: Env) -> Type:
        if not params:
            t = self.infer(body, env)
            if annot is not None:
                self.unify_at(body.span, t, self.convert_type(annot, env))
            return t
        p = params[0]
        if isinstance(p, S.ImplicitParam):
            self.require_implicits(p)
            ident, sig, inner = self.bind_param(p.name, p.mtype, env)
            inner = inner.with_entry(ScopeEntry(p.name, (p.name,), PIdent(ident), "param"))
            return TImplicit(ident, sig, self.infer_fun(params[1:], body, annot, inner))
        binds = {}
        t = self.infer_pattern(p.pat, env, binds)
        inner = self.bind_pattern_vars(env, binds)
        return TArrow(t, self.infer_fun(params[1:], body, annot, inner))

    def infer_cases(self, cases, scrutinee: Type, env: Env) -> Type:
        result = fresh_var()
        for c in cases:
            binds = {}
            pt = self.infer_pattern(c.pat, env, binds)
            self.unify_at(c.pat.span, pt, scrutinee, "This pattern")
            self.unify_at(c.body.span, self.infer(c.body, self.bind_pattern_vars(env, binds)), result)
        return result

    def infer_Function(self, e, env):
        arg = fresh_var()
        return TArrow(arg, self.infer_cases(e.cases, arg, env))

    def infer_Match(self, e, env):
        return self.infer_cases(e.cases, self.infer(e.scrutinee, env), env)

    def infer_App(self, e, env):
        return self.apply(e, e.fn, e.args, env)

    def infer_Binop(self, e, env):
        fn = S.Var((), e.op, span=e.span)
        return self.apply(e, fn, (e.left, e.right), env)

    def apply(self, node, fn, args, env: Env) -> Type:
        cur = self.infer(fn, env)
        pending = []
        elided = []
        for i, a in enumerate(args):
            if isinstance(a, S.ModArg):
                cur = self.module_arg(cur, a, fn, env)
                continue
            cur = self.subst.shallow(cur)
            while isinstance(cur, TImplicit):
                cur, ob = self.instantiate_implicit(cur, node.span, env)
                elided.append((i, ob.id))
                cur = self.subst.shallow(cur)
            if isinstance(cur, TArrow):
                dom, cur = cur.dom, cur.cod
            else:
                dom, cod = fresh_var(), fresh_var()
                self.unify_at(fn.span, cur, TArrow(dom, cod), "This function")
                cur = cod
            pending.append((a, dom))
        if elided:
            self.elided[id(node)] = elided
            self._keep.append(node)
        for a, dom in pending:
            self.unify_at(a.span, self.infer(a, env), dom)
        return cur

    def module_arg(self, cur: Type, a: S.ModArg, fn, env: Env) -> Type:
        self.require_implicits(a)
        cur = self.subst.shallow(cur)
        if not isinstance(cur, TImplicit):
            if isinstance(cur, TVar) and isinstance(fn, S.Var) and not fn.path:
                info = env.values.get(fn.name)
                if info is not None and info.param_span is not None:
                    fail("E-MISSING-ANNOT", info.param_span,
                         f"{fn.name} is given an explicit module argument, so its type must be "
                         f"annotated with an implicit arrow",
                         note="write the parameter as (name : {M : S} -> ...)")
            n = VarNamer()
            fail("E-TYPE", a.span,
                 f"this function has type {show_type(self.zonk(cur), n)}; it does not take an implicit module argument")
        p = self.modexpr_path(a.mexpr, env)
        mapping = {PIdent(cur.param): p}
        target = reroot_modtype(cur.sig, mapping, self.registry.expand)
        self.include_at(a.span, self.sig_at(p, a.span), target, "this module argument")
        return reroot_type(cur.body, mapping, self.registry.expand)

    def infer_Unop(self, e, env):
        t = INT if e.op == "-" else FLOAT
        self.unify_at(e.operand.span, self.infer(e.operand, env), t)
        return t

    def infer_Let(self, e, env):
        return self.infer(e.body, self.let_binding(e.rec, e.binding, env)[0])

    def infer_LetModule(self, e, env):
        inner, _ = self.declare_module(e.name, (), None, e.mexpr, env, False, e.span)
        return self.infer(e.body, inner)

    def infer_LetImplicitModule(self, e, env):
        self.require_implicits(e)
        inner, _ = self.declare_module(e.name, e.iparams, None, e.mexpr, env, True, e.span)
        return self.infer(e.body, inner)

    def infer_LetOpenImplicit(self, e, env):
        self.require_implicits(e)
        return self.infer(e.body, self.open_implicit(e.path, env, e.span))

    def infer_If(self, e, env):
        self.unify_at(e.cond.span, self.infer(e.cond, env), BOOL)
        t = self.infer(e.then, env)
        if e.else_ is None:
            self.unify_at(e.then.span, t, UNIT)
            return UNIT
        self.unify_at(e.else_.span, self.infer(e.else_, env), t)
        return t

    def infer_Seq(self, e, env):
        self.infer(e.first, env)
        return self.infer(e.second, env)

    def infer_Annot(self, e, env):
        t = self.infer(e.expr, env)
        self.unify_at(e.expr.span, t, self.convert_type(e.ty, env))
        return t

    def infer_Pack(self, e, env):
        mty, _ = self.infer_modexpr(e.mexpr, env, PIdent(fresh_ident("P")))
        if isinstance(mty, FunctorSig) and isinstance(mty.result, Sig):
            items = mty.result.items
            if len(items) == 1 and isinstance(items[0], ValItem) and items[0].name == "value":
                body = instantiate(items[0].scheme)
                return TPackage(mty.param, mty.param_sig, body)
        fail("E-TYPE", e.span, "only functors with a single value member can be packed")

    # ------------------------------------------------------------ bindings

    def let_binding(self, rec: bool, b: S.Binding, env: Env):
        """Infer, resolve and generalize one binding; returns (env, [(name, scheme)])."""
        simple = isinstance(b.pat, S.PVar)
        if (rec or b.params) and not simple:
            fail("E-SYNTAX", b.pat.span, "only a variable can be bound to a function")
        if rec:
            for p in b.params:
                if isinstance(p, S.ImplicitParam) and not self.fully_annotated(b):
                    fail("E-MISSING-ANNOT", b.span,
                         f"recursive function {b.pat.name} takes an implicit parameter, so all its "
                         f"parameters and its result must be annotated")

        def run():
            if simple:
                inner = env
                self_t = None
                if rec:
                    self_t = self.declared_type(b, env) if self.fully_annotated(b) else fresh_var()
                    inner = env.with_value(b.pat.name, ValueInfo(mono(self_t)))
                t = self.infer_fun(b.params, b.expr, b.annot, inner)
                if self_t is not None:
                    self.unify_at(b.span, t, self_t, f"The recursive function {b.pat.name}")
                return {b.pat.name: (t, None)}
            t = self.infer(b.expr, env)
            if b.annot is not None:
                self.unify_at(b.expr.span, t, self.convert_type(b.annot, env))
            binds = {}
            self.unify_at(b.pat.span, self.infer_pattern(b.pat, env, binds), t, "This pattern")
            return binds

        binds = self.generalization_point(run, env)
        exclude = self.env_vars(env)
        bound = [(n, generalize(t, self.subst, exclude)) for n, (t, _) in binds.items()]
        return env.with_values((n, self.value_info(s)) for n, s in bound), bound

    @staticmethod
    def fully_annotated(b: S.Binding) -> bool:
        if b.annot is None:
            return False
        return all(isinstance(p, S.ImplicitParam) or isinstance(p.pat, S.PAnnot) for p in b.params)

    def declared_type(self, b: S.Binding, env: Env) -> Type:
        def go(params, env):
            if not params:
                return self.convert_type(b.annot, env)
            p = params[0]
            if isinstance(p, S.ImplicitParam):
                ident, sig, inner = self.bind_param(p.name, p.mtype, env)
                return TImplicit(ident, sig, go(params[1:], inner))
            return TArrow(self.convert_type(p.pat.ty, env), go(params[1:], env))

        return go(b.params, env)

    # ------------------------------------------------------------ modules

    def infer_modexpr(self, me, env: Env, self_path: Path):
        """Returns (module type, alias path or None)."""
        if isinstance(me, (S.MPath, S.MApply)):
            p = self.modexpr_path(me, env)
            return self.sig_at(p, me.span), self.normalize_at(p, me.span)
        if isinstance(me, S.MStruct):
            return self.infer_struct(me.items, env, self_path), None
        if isinstance(me, S.MFunctor):
            ident, psig, inner = self.bind_param(me.param, me.param_type, env)
            res, alias = self.infer_modexpr(me.body, inner, PIdent(fresh_ident("R")))
            return FunctorSig(ident, psig, res, alias), None
        if isinstance(me, S.MUnpack):
            t = self.subst.shallow(self.infer(me.expr, env))
            if not isinstance(t, TPackage):
                n = VarNamer()
                fail("E-TYPE", me.expr.span,
                     f"this expression has type {show_type(self.zonk(t), n)}; "
                     f"the type of an unpacked module must be a known package type")
            res = Sig(PIdent(fresh_ident("R")), (ValItem("value", mono(t.body)),))
            return FunctorSig(t.param, t.sig, res), None
        raise TypeError(me)

    def infer_struct(self, items, env: Env, self_path: Path) -> Sig:
        out = []
        subs = {}
        local = env
        for d in items:
            local, new = self.decl(d, local.with_tyvars({}), False, subs)
            for item in new:
                out = [i for i in out if not (type(i) is type(item) and i.name == item.name)]
                out.append(item)
        sig = Sig(self_path, tuple(out))
        for ident, name in subs.items():
            sig = reroot_modtype(sig, {PIdent(ident): PDot(self_path, name)})
        return sig

    def declare_module(self, name, params, mtype, mexpr, env: Env, implicit: bool, span, subs=None):
        """Check a (possibly functor) module binding; returns (env, ModItem)."""
        ident = fresh_ident(name)
        inner = env
        ps = []
        for p in params:
            pid, psig, inner = self.bind_param(p.name, p.mtype, inner)
            if implicit:
                inner = inner.with_entry(ScopeEntry(p.name, (p.name,), PIdent(pid), "param"))
            ps.append((pid, psig))
        self_path = PIdent(fresh_ident(name)) if ps else PIdent(ident)
        if mexpr is None:
            if mtype is None:
                fail("E-SYNTAX", span, f"module {name} needs a signature or a definition")
            res, alias = self.eval_modtype(mtype, inner, self_path), None
        else:
            if implicit and ps:
                self.check_functor_purity(mexpr)

            def run():
                return self.infer_modexpr(mexpr, inner, self_path)

            res, alias = self.generalization_point(run, inner)
            if mtype is not None:
                # A separate root lets the declared abstract types unfold
                # to the implementation's during inclusion.
                root = PIdent(fresh_ident(name))
                declared = self.eval_modtype(mtype, inner, root)
                self.include_at(span, res, declared, f"module {name}")
                res, alias = reroot_modtype(declared, {root: self_path}), None
        mty = res
        for i, (pid, psig) in enumerate(reversed(ps)):
            mty = FunctorSig(pid, psig, mty, alias if i == 0 else None)
        item_alias = None if ps else alias
        self.registry.add(ident, mty, item_alias)
        if subs is not None:
            subs[ident] = name
        out = env.with_module(name, PIdent(ident))
        if implicit:
            kind = "functor" if ps else "module"
            out = out.with_entry(ScopeEntry(name, (name,), PIdent(ident), kind))
        return out, ModItem(name, mty, item_alias, implicit)

    def check_functor_purity(self, me) -> None:
        """Bodies of implicit functors may only bind syntactic values."""
        if not isinstance(me, S.MStruct):
            return
        for d in me.items:
            if isinstance(d, S.DLet) and not d.binding.params and not is_value(d.binding.expr):
                fail("E-IMPURE-FUNCTOR", d.binding.expr.span,
                     "an implicit functor body may only bind syntactic values; "
                     "this binding performs a computation",
                     note="wrap the computation in a function")
            if isinstance(d, (S.DModule, S.DImplicitModule)) and d.mexpr is not None and not d.params \
                    and not getattr(d, "iparams", ()):
                self.check_functor_purity(d.mexpr)

    def open_implicit(self, names: tuple, env: Env, span) -> Env:
        p = self.lookup_module(names, env, span)
        sig = self.sig_at(p, span)
        if not isinstance(sig, Sig):
            fail("E-TYPE", span, f"{'.'.join(names)} is a functor and cannot be opened")
        for item in sig.items:
            if isinstance(item, ModItem) and item.implicit:
                kind = "functor" if isinstance(item.mty, FunctorSig) else "module"
                full = tuple(names) + (item.name,)
                env = env.with_entry(ScopeEntry(".".join(full), full, PDot(p, item.name), kind))
        return env

    # ------------------------------------------------------------ declarations

    def decl(self, d, env: Env, top: bool, subs=None):
        """Check one declaration; returns (env, signature items it adds)."""
        if isinstance(d, S.DLet):
            env, bound = self.let_binding(d.rec, d.binding, env)
            if top:
                self.toplevel.extend(bound)
            return env, [ValItem(n, s) for n, s in bound]
        if isinstance(d, S.DType):
            tv = {n: fresh_var() for n in d.params}
            manifest = self.convert_type(d.manifest, env.with_tyvars(dict(tv)))
            ids = tuple(v.id for v in tv.values())
            return env.with_type(d.name, TypeDef(ids, manifest, None)), [TypeItem(d.name, ids, manifest)]
        if isinstance(d, S.DModuleType):
            tmpl = PIdent(fresh_ident(d.name))
            mty = self.eval_modtype(d.mtype, env, tmpl)
            if isinstance(mty, Sig):
                mty = Sig(mty.self, mty.items, d.name)
            return env.with_modtype(d.name, mty), []
        if isinstance(d, S.DModule):
            env, item = self.declare_module(d.name, d.params, d.mtype, d.mexpr, env, False, d.span, subs)
            return env, [item]
        if isinstance(d, S.DImplicitModule):
            self.require_implicits(d)
            env, item = self.declare_module(d.name, d.iparams, d.mtype, d.mexpr, env, True, d.span, subs)
            return env, [item]
        if isinstance(d, S.DOpenImplicit):
            self.require_implicits(d)
            return self.open_implicit(d.path, env, d.span), []
        if isinstance(d, S.DExpr):
            if not top:
                fail("E-SYNTAX", d.span, "expressions are only allowed at top level")
            self.generalization_point(lambda: self.infer(d.expr, env), env)
            return env, []
        raise TypeError(d)

    def check_program(self, prog: S.Program) -> Env:
        env = self.env
        for d in prog.decls:
            env, _ = self.decl(d, env.with_tyvars({}), True)
        return env

    def query(self, env: Env, goal: str, scope: Optional[tuple] = None):
        """Resolve `goal`, a module type such as `Show with type t = int list`,
        against the implicit scope of `env` (or `scope`)."""
        return self.resolver.resolve(self.goal_obligation(env, goal, scope), self.subst)

    def goal_obligation(self, env: Env, goal: str, scope: Optional[tuple] = None) -> Obligation:
        """An obligation for `goal`: the signature without its `with type`
        refinements is the target, and the refined manifests that the
        target leaves abstract become constraints."""
        root = PIdent(fresh_ident("M"))
        mt = parse_modtype(goal)
        base = mt
        while isinstance(base, S.MTWith):
            base = base.base
        local = env.with_tyvars({})
        target = self.eval_modtype(base, local, root)
        refined = self.eval_modtype(mt, local, root)
        constraints = []
        for it in refined.items:
            abstract = target.type_item(it.name) if isinstance(it, TypeItem) else None
            if abstract is not None and abstract.manifest is None and it.manifest is not None:
                args = tuple(fresh_var() for _ in it.params)
                rhs = substitute_vars(it.manifest, dict(zip(it.params, args)))
                constraints.append(Constraint((), it.name, args, rhs))
        return Obligation(next(self._ob_ids), root.ident.name, target, constraints, None,
                          env.scope if scope is None else tuple(scope))

    def signatures(self) -> list:
        """`val name : type` lines for the top-level bindings, in order."""
        return [f"val {value_name(n)} : {show_type(self.zonk(s.body))}" for n, s in self.toplevel]


def is_value(e) -> bool:
    if isinstance(e, (S.Const, S.Var, S.Lambda, S.Function, S.Pack)):
        return True
    if isinstance(e, S.Construct):
        return all(is_value(a) for a in e.args)
    if isinstance(e, (S.ListLit, S.Tuple)):
        return all(is_value(a) for a in e.items)
    if isinstance(e, S.Annot):
        return is_value(e.expr)
    return False
