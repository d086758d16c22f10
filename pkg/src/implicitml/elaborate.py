"""Translation of checked programs into the implicit-free core.

An implicit function `fun {M : S} -> e` becomes a first-class functor
`(module functor (M : S) -> struct let value = e end)` and each module
argument, written or resolved, becomes an unpack-apply-project sequence:

    let module F_1 = (val f) in let module R_1 = F_1(Arg) in R_1.value

The translation reads the resolutions recorded by a `Checker`; it never
searches again.
"""
from __future__ import annotations

import dataclasses
import itertools

from .diagnostics import CompileError, Diagnostic
from .surface import syntax as S


def collect_names(node) -> set:
    """Every identifier that occurs in `node`."""
    out = set()
    for n in S.walk(node):
        for f in dataclasses.fields(n):
            v = getattr(n, f.name)
            if isinstance(v, str) and f.name in ("name", "param", "op"):
                out.add(v)
            elif isinstance(v, tuple) and f.name in ("path", "params") and all(isinstance(x, str) for x in v):
                out.update(v)
    return out


def candidate_modexpr(cand) -> S.MPath:
    me = S.MPath(tuple(cand.entry.names))
    for a in cand.args:
        me = S.MApply(me, candidate_modexpr(a), False)
    return me


class Elaborator:
    def __init__(self, checker, program: S.Program):
        self.checker = checker
        self.taken = collect_names(program)
        self.counter = itertools.count(1)

    def fresh_pair(self):
        while True:
            n = next(self.counter)
            f, r = f"F_{n}", f"R_{n}"
            if f not in self.taken and r not in self.taken:
                self.taken.update((f, r))
                return f, r

    # ------------------------------------------------------------ program

    def program(self, p: S.Program) -> S.Program:
        decls = []
        for d in p.decls:
            decls.extend(self.decl(d))
        return S.Program(tuple(decls), span=p.span)

    def decl(self, d) -> list:
        if isinstance(d, S.DLet):
            return [S.DLet(d.rec, self.binding(d.binding, d.rec), span=d.span)]
        if isinstance(d, S.DModule):
            params = tuple(S.ModParam(p.name, self.modtype(p.mtype), span=p.span) for p in d.params)
            return [S.DModule(d.name, params, self.opt_modtype(d.mtype), self.opt_modexpr(d.mexpr), span=d.span)]
        if isinstance(d, S.DImplicitModule):
            params = tuple(S.ModParam(p.name, self.modtype(p.mtype), span=p.span) for p in d.iparams)
            return [S.DModule(d.name, params, self.opt_modtype(d.mtype), self.opt_modexpr(d.mexpr), span=d.span)]
        if isinstance(d, S.DModuleType):
            return [S.DModuleType(d.name, self.modtype(d.mtype), span=d.span)]
        if isinstance(d, S.DOpenImplicit):
            return []
        if isinstance(d, S.DType):
            return [S.DType(d.params, d.name, self.type(d.manifest), span=d.span)]
        if isinstance(d, S.DExpr):
            return [S.DExpr(self.expr(d.expr), span=d.span)]
        raise TypeError(d)

    # ------------------------------------------------------------ types

    def type(self, t):
        if isinstance(t, S.TyVar):
            return t
        if isinstance(t, S.TyCon):
            return S.TyCon(tuple(self.type(a) for a in t.args), t.path, t.name, span=t.span)
        if isinstance(t, S.TyArrow):
            return S.TyArrow(self.type(t.dom), self.type(t.cod), span=t.span)
        if isinstance(t, S.TyTuple):
            return S.TyTuple(tuple(self.type(i) for i in t.items), span=t.span)
        if isinstance(t, S.TyImplicit):
            sig = S.MTSig((S.SVal("value", self.type(t.body), span=t.span),), span=t.span)
            return S.TyPackage(S.MTFunctor(t.name, self.modtype(t.mtype), sig, span=t.span), span=t.span)
        if isinstance(t, S.TyPackage):
            return S.TyPackage(self.modtype(t.mtype), span=t.span)
        raise TypeError(t)

    def opt_modtype(self, m):
        return None if m is None else self.modtype(m)

    def modtype(self, m):
        if isinstance(m, S.MTName):
            return m
        if isinstance(m, S.MTSig):
            return S.MTSig(tuple(self.sig_item(i) for i in m.items), span=m.span)
        if isinstance(m, S.MTWith):
            cs = tuple(S.WithType(c.params, c.path, c.name, self.type(c.ty), span=c.span) for c in m.constraints)
            return S.MTWith(self.modtype(m.base), cs, span=m.span)
        if isinstance(m, S.MTFunctor):
            return S.MTFunctor(m.param, self.modtype(m.param_type), self.modtype(m.result), span=m.span)
        raise TypeError(m)

    def sig_item(self, i):
        if isinstance(i, S.SType):
            manifest = None if i.manifest is None else self.type(i.manifest)
            return S.SType(i.params, i.name, manifest, span=i.span)
        if isinstance(i, S.SVal):
            return S.SVal(i.name, self.type(i.ty), span=i.span)
        if isinstance(i, S.SModule):
            return S.SModule(i.name, self.modtype(i.mtype), span=i.span)
        if isinstance(i, S.SModuleAlias):
            return i
        if isinstance(i, S.SImplicitModule):
            if i.alias is None:
                mt = self.modtype(i.mtype)
                for p in reversed(i.iparams):
                    mt = S.MTFunctor(p.name, self.modtype(p.mtype), mt, span=i.span)
                return S.SModule(i.name, mt, span=i.span)
            if not i.iparams and isinstance(i.alias, S.MPath):
                return S.SModuleAlias(i.name, i.alias.path, span=i.span)
            raise CompileError(Diagnostic(
                "E-TYPE", i.span, "an implicit functor alias in a signature has no core equivalent"))
        raise TypeError(i)

    # ------------------------------------------------------------ module expressions

    def opt_modexpr(self, m):
        return None if m is None else self.modexpr(m)

    def modexpr(self, m):
        if isinstance(m, S.MPath):
            return m
        if isinstance(m, S.MStruct):
            items = []
            for d in m.items:
                items.extend(self.decl(d))
            return S.MStruct(tuple(items), span=m.span)
        if isinstance(m, S.MApply):
            return S.MApply(self.modexpr(m.fn), self.modexpr(m.arg), False, span=m.span)
        if isinstance(m, S.MFunctor):
            return S.MFunctor(m.param, self.modtype(m.param_type), self.modexpr(m.body), span=m.span)
        if isinstance(m, S.MUnpack):
            return S.MUnpack(self.expr(m.expr), span=m.span)
        raise TypeError(m)

    # ------------------------------------------------------------ bindings and functions

    def binding(self, b: S.Binding, rec: bool = False) -> S.Binding:
        pat = self.pattern(b.pat)
        if not any(isinstance(p, S.ImplicitParam) for p in b.params):
            annot = None if b.annot is None else self.type(b.annot)
            return S.Binding(pat, self.params(b.params), annot, self.expr(b.expr), span=b.span)
        lead = []
        for p in b.params:
            if isinstance(p, S.ImplicitParam):
                break
            lead.append(p)
        rest = b.params[len(lead):]
        body = self.expr(b.expr)
        if b.annot is not None:
            body = S.Annot(body, self.type(b.annot), span=b.expr.span)
        expr = self.function(rest, body, b.span)
        annot = None
        if rec:
            annot = self.declared_type(rest, b.annot, b.span)
        return S.Binding(pat, self.params(tuple(lead)), annot, expr, span=b.span)

    def declared_type(self, params, result, span):
        """The core type of a fully annotated recursive implicit function."""
        if not params:
            return self.type(result)
        p = params[0]
        rest = self.declared_type(params[1:], result, span)
        if isinstance(p, S.ImplicitParam):
            sig = S.MTSig((S.SVal("value", rest, span=span),), span=span)
            return S.TyPackage(S.MTFunctor(p.name, self.modtype(p.mtype), sig, span=span), span=span)
        return S.TyArrow(self.type(p.pat.ty), rest, span=span)

    def params(self, params) -> tuple:
        return tuple(S.PatParam(self.pattern(p.pat), span=p.span) for p in params)

    def function(self, params, body, span):
        """`fun params -> body` with implicit parameters turned into packed functors."""
        if not params:
            return body
        plain = []
        for p in params:
            if isinstance(p, S.ImplicitParam):
                break
            plain.append(S.PatParam(self.pattern(p.pat), span=p.span))
        if plain:
            inner = self.function(params[len(plain):], body, span)
            return S.Lambda(tuple(plain), inner, span=span)
        p = params[0]
        inner = self.function(params[1:], body, span)
        value = S.DLet(False, S.Binding(S.PVar("value", span=span), (), None, inner, span=span), span=span)
        functor = S.MFunctor(p.name, self.modtype(p.mtype), S.MStruct((value,), span=span), span=span)
        return S.Pack(functor, span=span)

    # ------------------------------------------------------------ patterns

    def pattern(self, p):
        if isinstance(p, S.PAnnot):
            return S.PAnnot(self.pattern(p.pat), self.type(p.ty), span=p.span)
        if isinstance(p, S.PTuple):
            return S.PTuple(tuple(self.pattern(i) for i in p.items), span=p.span)
        if isinstance(p, S.PList):
            return S.PList(tuple(self.pattern(i) for i in p.items), span=p.span)
        if isinstance(p, S.PConstruct):
            return S.PConstruct(p.name, tuple(self.pattern(i) for i in p.args), span=p.span)
        return p

    # ------------------------------------------------------------ expressions

    def expr(self, e):
        return getattr(self, "expr_" + type(e).__name__)(e)

    def expr_Const(self, e):
        return e

    def expr_Var(self, e):
        return e

    def expr_Construct(self, e):
        return S.Construct(e.name, tuple(self.expr(a) for a in e.args), span=e.span)

    def expr_ListLit(self, e):
        return S.ListLit(tuple(self.expr(a) for a in e.items), span=e.span)

    def expr_Tuple(self, e):
        return S.Tuple(tuple(self.expr(a) for a in e.items), span=e.span)

    def expr_Lambda(self, e):
        return self.function(e.params, self.expr(e.body), e.span)

    def cases(self, cases):
        return tuple(S.Case(self.pattern(c.pat), self.expr(c.body), span=c.span) for c in cases)

    def expr_Function(self, e):
        return S.Function(self.cases(e.cases), span=e.span)

    def expr_Match(self, e):
        return S.Match(self.expr(e.scrutinee), self.cases(e.cases), span=e.span)

    def module_args(self, node, args):
        """`args` with resolved implicit arguments spliced in as ModArg markers."""
        elided = {}
        for pos, ob_id in self.checker.elided.get(id(node), ()):
            elided.setdefault(pos, []).append(ob_id)
        out = []
        for i, a in enumerate(args):
            for ob_id in elided.get(i, ()):
                cand = self.checker.resolutions[ob_id]
                out.append(S.ModArg(candidate_modexpr(cand), span=node.span))
            out.append(a)
        return out

    def applied(self, fn, args, span):
        cur = fn
        plain = []
        for a in args:
            if isinstance(a, S.ModArg):
                if plain:
                    cur = S.App(cur, tuple(plain), span=span)
                    plain = []
                cur = self.unpack_apply(cur, self.modexpr(a.mexpr), span)
            else:
                plain.append(self.expr(a))
        if plain:
            cur = S.App(cur, tuple(plain), span=span)
        return cur

    def unpack_apply(self, f, arg, span):
        fname, rname = self.fresh_pair()
        project = S.Var((rname,), "value", span=span)
        inner = S.LetModule(rname, S.MApply(S.MPath((fname,), span=span), arg, False, span=span), project, span=span)
        return S.LetModule(fname, S.MUnpack(f, span=span), inner, span=span)

    def expr_App(self, e):
        return self.applied(self.expr(e.fn), self.module_args(e, e.args), e.span)

    def expr_Binop(self, e):
        args = self.module_args(e, (e.left, e.right))
        if len(args) == 2:
            return S.Binop(e.op, self.expr(e.left), self.expr(e.right), span=e.span)
        return self.applied(S.Var((), e.op, span=e.span), args, e.span)

    def expr_Unop(self, e):
        return S.Unop(e.op, self.expr(e.operand), span=e.span)

    def expr_Let(self, e):
        return S.Let(e.rec, self.binding(e.binding, e.rec), self.expr(e.body), span=e.span)

    def expr_LetModule(self, e):
        return S.LetModule(e.name, self.modexpr(e.mexpr), self.expr(e.body), span=e.span)

    def expr_LetImplicitModule(self, e):
        me = self.modexpr(e.mexpr)
        for p in reversed(e.iparams):
            me = S.MFunctor(p.name, self.modtype(p.mtype), me, span=e.span)
        return S.LetModule(e.name, me, self.expr(e.body), span=e.span)

    def expr_LetOpenImplicit(self, e):
        return self.expr(e.body)

    def expr_If(self, e):
        else_ = None if e.else_ is None else self.expr(e.else_)
        return S.If(self.expr(e.cond), self.expr(e.then), else_, span=e.span)

    def expr_Seq(self, e):
        return S.Seq(self.expr(e.first), self.expr(e.second), span=e.span)

    def expr_Annot(self, e):
        return S.Annot(self.expr(e.expr), self.type(e.ty), span=e.span)

    def expr_Pack(self, e):
        return S.Pack(self.modexpr(e.mexpr), span=e.span)


def elaborate(checker, program: S.Program) -> S.Program:
    return Elaborator(checker, program).program(program)


# ---------------------------------------------------------------- explicit variants


def make_explicit(checker, program: S.Program) -> S.Program:
    """Rewrite `program` so that every elided implicit argument is explicit."""
    return _ExplicitRewriter(checker).rewrite(program)


class _ExplicitRewriter:
    def __init__(self, checker):
        self.checker = checker

    def rewrite(self, node):
        if isinstance(node, (S.App, S.Binop)):
            elided = {}
            for pos, ob_id in self.checker.elided.get(id(node), ()):
                elided.setdefault(pos, []).append(ob_id)
            if isinstance(node, S.App):
                fn, args = self.rewrite(node.fn), node.args
            else:
                fn, args = S.Var((), node.op, span=node.span), (node.left, node.right)
            out = []
            for i, a in enumerate(args):
                for ob_id in elided.get(i, ()):
                    out.append(S.ModArg(candidate_modexpr(self.checker.resolutions[ob_id]), span=node.span))
                out.append(self.rewrite(a))
            if isinstance(node, S.Binop) and not elided:
                return S.Binop(node.op, out[0], out[1], span=node.span)
            return S.App(fn, tuple(out), span=node.span)
        if not isinstance(node, S.Node):
            return node
        changes = {}
        for f in dataclasses.fields(node):
            if f.name == "span":
                continue
            v = getattr(node, f.name)
            if isinstance(v, S.Node):
                changes[f.name] = self.rewrite(v)
            elif isinstance(v, tuple):
                changes[f.name] = tuple(self.rewrite(x) if isinstance(x, S.Node) else x for x in v)
        return dataclasses.replace(node, **changes)
