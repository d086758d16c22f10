"""Call-by-value interpreter for core (implicit-free) programs."""
from __future__ import annotations

import sys
from dataclasses import dataclass

from .builtins import (
    NONE, Builtin, Closure, DeclaredV, FunctorV, Machine, PackV, RuntimeFailure, SomeV,
    StructV, runtime_modules, show_float,
)
from .surface import syntax as S


class Scope:
    __slots__ = ("values", "modules", "parent")

    def __init__(self, parent=None, values=None, modules=None):
        self.parent = parent
        self.values = values or {}
        self.modules = modules or {}

    def value(self, name: str):
        s = self
        while s is not None:
            if name in s.values:
                return s.values[name]
            s = s.parent
        raise RuntimeFailure(f"unbound value {name}")

    def module(self, name: str):
        s = self
        while s is not None:
            if name in s.modules:
                return s.modules[name]
            s = s.parent
        raise RuntimeFailure(f"unbound module {name}")


@dataclass
class CasesV:
    """A `function | p -> e ...` closure."""

    cases: tuple
    env: Scope


def _struct(m, what: str) -> StructV:
    if isinstance(m, DeclaredV):
        raise RuntimeFailure(f"module {m.name} was declared without an implementation")
    if not isinstance(m, StructV):
        raise RuntimeFailure(f"{what} is not a structure")
    return m


class Evaluator(Machine):
    def __init__(self):
        self.output: list = []
        mods = runtime_modules()
        self.globals = Scope(None, dict(mods["Pervasives"].values), mods)

    def write(self, text: str) -> None:
        self.output.append(text)

    @property
    def stdout(self) -> str:
        return "".join(self.output)

    # ------------------------------------------------------------ programs

    def run(self, program: S.Program):
        """Evaluate every declaration; returns the value of the last top-level expression."""
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 20000))
        try:
            scope, last = self.globals, None
            for d in program.decls:
                scope, v = self.decl(d, scope, None)
                if isinstance(d, S.DExpr):
                    last = v
            return last
        except RecursionError:
            raise RuntimeFailure("stack overflow") from None
        finally:
            sys.setrecursionlimit(old)

    def decl(self, d, scope: Scope, exports):
        if isinstance(d, S.DLet):
            scope = self.bind(d.rec, d.binding, scope)
            if exports is not None:
                exports.values.update(scope.values)
            return scope, None
        if isinstance(d, S.DModule):
            m = self.module_decl(d, scope)
            if exports is not None:
                exports.modules[d.name] = m
            return Scope(scope, modules={d.name: m}), None
        if isinstance(d, (S.DModuleType, S.DType)):
            return scope, None
        if isinstance(d, S.DExpr):
            return scope, self.eval(d.expr, scope)
        raise RuntimeFailure(f"cannot evaluate {type(d).__name__}")

    def module_decl(self, d: S.DModule, scope: Scope):
        if d.mexpr is None:
            return DeclaredV(d.name)
        body = d.mexpr
        for p in reversed(d.params[1:]):
            body = S.MFunctor(p.name, p.mtype, body)
        if d.params:
            return FunctorV(d.params[0].name, body, scope)
        return self.eval_module(body, scope)

    # ------------------------------------------------------------ modules

    def eval_module(self, me, scope: Scope):
        if isinstance(me, S.MPath):
            return self.module_path(me.path, scope)
        if isinstance(me, S.MStruct):
            exports = StructV()
            inner = scope
            for d in me.items:
                inner, _ = self.decl(d, inner, exports)
            return exports
        if isinstance(me, S.MApply):
            f = self.eval_module(me.fn, scope)
            return self.apply_functor(f, self.eval_module(me.arg, scope))
        if isinstance(me, S.MFunctor):
            return FunctorV(me.param, me.body, scope)
        if isinstance(me, S.MUnpack):
            v = self.eval(me.expr, scope)
            if not isinstance(v, PackV):
                raise RuntimeFailure("unpacking a value that is not a package")
            return v.module
        raise RuntimeFailure(f"cannot evaluate {type(me).__name__}")

    def apply_functor(self, f, arg):
        if isinstance(f, DeclaredV):
            raise RuntimeFailure(f"module {f.name} was declared without an implementation")
        if not isinstance(f, FunctorV):
            raise RuntimeFailure("applying a module that is not a functor")
        return self.eval_module(f.body, Scope(f.env, modules={f.param: arg}))

    def module_path(self, names: tuple, scope: Scope):
        m = scope.module(names[0])
        for n in names[1:]:
            m = _struct(m, names[0]).modules[n]
        return m

    # ------------------------------------------------------------ bindings

    def bind(self, rec: bool, b: S.Binding, scope: Scope) -> Scope:
        if rec:
            inner = Scope(scope)
            inner.values[b.pat.name] = self.binding_value(b, inner)
            return inner
        v = self.binding_value(b, scope)
        binds = {}
        if not self.match(b.pat, v, binds):
            raise RuntimeFailure("pattern match failure in let binding")
        return Scope(scope, binds)

    def binding_value(self, b: S.Binding, scope: Scope):
        if b.params:
            return Closure(tuple(p.pat for p in b.params), b.expr, scope)
        return self.eval(b.expr, scope)

    def match(self, p, v, binds: dict) -> bool:
        if isinstance(p, S.PVar):
            binds[p.name] = v
            return True
        if isinstance(p, S.PWild):
            return True
        if isinstance(p, S.PConst):
            return v == self.const(p.value)
        if isinstance(p, S.PTuple):
            return all(self.match(q, x, binds) for q, x in zip(p.items, v))
        if isinstance(p, S.PList):
            return len(v) == len(p.items) and all(self.match(q, x, binds) for q, x in zip(p.items, v))
        if isinstance(p, S.PConstruct):
            if p.name == "None":
                return v is NONE
            if p.name == "Some":
                return isinstance(v, SomeV) and self.match(p.args[0], v.value, binds)
            if p.name == "::":
                return bool(v) and self.match(p.args[0], v[0], binds) and self.match(p.args[1], v[1:], binds)
        if isinstance(p, S.PAnnot):
            return self.match(p.pat, v, binds)
        raise RuntimeFailure(f"cannot match {type(p).__name__}")

    # ------------------------------------------------------------ application

    def apply(self, f, arg):
        if isinstance(f, Closure):
            binds = {}
            if not self.match(f.params[0], arg, binds):
                raise RuntimeFailure("pattern match failure in function argument")
            scope = Scope(f.env, binds)
            if len(f.params) > 1:
                return Closure(f.params[1:], f.body, scope)
            return self.eval(f.body, scope)
        if isinstance(f, Builtin):
            args = f.args + (arg,)
            if len(args) == f.arity:
                return f.fn(self, *args)
            return Builtin(f.name, f.arity, f.fn, args)
        if isinstance(f, CasesV):
            return self.run_cases(f.cases, arg, f.env)
        raise RuntimeFailure("applying a value that is not a function")

    def run_cases(self, cases, v, scope: Scope):
        for c in cases:
            binds = {}
            if self.match(c.pat, v, binds):
                return self.eval(c.body, Scope(scope, binds))
        raise RuntimeFailure("match failure")

    # ------------------------------------------------------------ expressions

    @staticmethod
    def const(c: S.Const):
        return () if c.kind == "unit" else c.value

    def eval(self, e, scope: Scope):
        return getattr(self, "eval_" + type(e).__name__)(e, scope)

    def eval_Const(self, e, scope):
        return self.const(e)

    def eval_Var(self, e, scope):
        if not e.path:
            return scope.value(e.name)
        m = _struct(self.module_path(e.path, scope), ".".join(e.path))
        if e.name not in m.values:
            raise RuntimeFailure(f"unbound value {'.'.join(e.path)}.{e.name}")
        return m.values[e.name]

    def eval_Construct(self, e, scope):
        if e.name == "None":
            return NONE
        if e.name == "Some":
            if not e.args:
                return Builtin("Some", 1, lambda m, x: SomeV(x))
            return SomeV(self.eval(e.args[0], scope))
        if e.name == "::":
            head = self.eval(e.args[0], scope)
            return [head] + self.eval(e.args[1], scope)
        raise RuntimeFailure(f"unknown constructor {e.name}")

    def eval_ListLit(self, e, scope):
        return [self.eval(x, scope) for x in e.items]

    def eval_Tuple(self, e, scope):
        return tuple(self.eval(x, scope) for x in e.items)

    def eval_Lambda(self, e, scope):
        return Closure(tuple(p.pat for p in e.params), e.body, scope)

    def eval_Function(self, e, scope):
        return CasesV(e.cases, scope)

    def eval_Match(self, e, scope):
        return self.run_cases(e.cases, self.eval(e.scrutinee, scope), scope)

    def eval_App(self, e, scope):
        f = self.eval(e.fn, scope)
        for a in e.args:
            f = self.apply(f, self.eval(a, scope))
        return f

    def eval_Binop(self, e, scope):
        if e.op == "&&":
            return bool(self.eval(e.left, scope)) and bool(self.eval(e.right, scope))
        if e.op == "||":
            return bool(self.eval(e.left, scope)) or bool(self.eval(e.right, scope))
        f = scope.value(e.op)
        left = self.eval(e.left, scope)
        return self.apply(self.apply(f, left), self.eval(e.right, scope))

    def eval_Unop(self, e, scope):
        return -self.eval(e.operand, scope)

    def eval_Let(self, e, scope):
        return self.eval(e.body, self.bind(e.rec, e.binding, scope))

    def eval_LetModule(self, e, scope):
        m = self.eval_module(e.mexpr, scope)
        return self.eval(e.body, Scope(scope, modules={e.name: m}))

    def eval_If(self, e, scope):
        if self.eval(e.cond, scope):
            return self.eval(e.then, scope)
        if e.else_ is None:
            return ()
        return self.eval(e.else_, scope)

    def eval_Seq(self, e, scope):
        self.eval(e.first, scope)
        return self.eval(e.second, scope)

    def eval_Annot(self, e, scope):
        return self.eval(e.expr, scope)

    def eval_Pack(self, e, scope):
        return PackV(self.eval_module(e.mexpr, scope))


def show_value(v) -> str:
    """OCaml-like rendering of a runtime value."""
    if v == () and isinstance(v, tuple):
        return "()"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return show_float(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, list):
        return "[" + "; ".join(show_value(x) for x in v) + "]"
    if isinstance(v, tuple):
        return "(" + ", ".join(show_value(x) for x in v) + ")"
    if v is NONE:
        return "None"
    if isinstance(v, SomeV):
        inner = show_value(v.value)
        if isinstance(v.value, SomeV) or (isinstance(v.value, (int, float)) and not isinstance(v.value, bool) and v.value < 0):
            inner = f"({inner})"
        return f"Some {inner}"
    if isinstance(v, (StructV, FunctorV, DeclaredV)):
        return "<module>"
    if isinstance(v, PackV):
        return "<package>"
    return "<fun>"
