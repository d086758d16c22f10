"""Canonical concrete syntax for programs, types and module types.

The printer adds parentheses from precedence alone, so that parsing the
output yields a structurally equal tree.  Constructs that extend as far
right as possible (``let``, ``fun``, ``function``, ``match``, ``if``) are
parenthesized everywhere except in tail positions.
"""
from __future__ import annotations

from . import syntax as S

# Expression precedences; a child printed in context `ctx` is parenthesized
# when its own precedence is lower.
SEQ, OPEN, TUPLE, APP, ATOM = 0, 1, 2, 80, 90
UNARY = 70
CONS = 40

INDENT = "  "


def op_prec(op: str) -> tuple[int, bool]:
    """Precedence and right-associativity of a binary operator."""
    if op in ("||", "or"):
        return 10, True
    if op in ("&&", "&"):
        return 20, True
    c = op[0]
    if op == "mod" or c in "*/%":
        return 60, False
    if c in "+-":
        return 50, False
    if c in "@^":
        return 30, True
    return 25, False


def is_operator(name: str) -> bool:
    return not (name[0].isalpha() or name[0] == "_")


def value_name(name: str) -> str:
    return f"( {name} )" if is_operator(name) else name


def prec(e) -> int:
    if isinstance(e, (S.Let, S.LetModule, S.LetImplicitModule, S.LetOpenImplicit,
                      S.Lambda, S.Function, S.Match, S.If)):
        return OPEN
    if isinstance(e, S.Seq):
        return SEQ
    if isinstance(e, S.Binop):
        return op_prec(e.op)[0]
    if isinstance(e, S.Construct):
        if e.name == "::":
            return CONS
        return APP if e.args else ATOM
    if isinstance(e, S.Unop):
        return UNARY
    if isinstance(e, S.App):
        return APP
    return ATOM


class Printer:
    # ------------------------------------------------------------ literals

    def const(self, c: S.Const) -> str:
        if c.kind == "unit":
            return "()"
        if c.kind == "bool":
            return "true" if c.value else "false"
        if c.kind == "string":
            return string_literal(c.value)
        if c.kind == "float":
            text = repr(float(c.value))
        else:
            text = str(c.value)
        if text.startswith("-"):
            return f"({text})"
        return text

    # ------------------------------------------------------------ expressions

    def expr(self, e, ctx: int = SEQ, ind: str = "") -> str:
        text = self._expr(e, ind)
        if prec(e) < ctx:
            return f"({text})"
        return text

    def _expr(self, e, ind: str) -> str:
        nxt = ind + INDENT
        if isinstance(e, S.Const):
            return self.const(e)
        if isinstance(e, S.Var):
            return "".join(p + "." for p in e.path) + value_name(e.name)
        if isinstance(e, S.Construct):
            if e.name == "::":
                hd, tl = e.args
                return f"{self.expr(hd, CONS + 1, ind)} :: {self.expr(tl, CONS, ind)}"
            if not e.args:
                return e.name
            return f"{e.name} {self.expr(e.args[0], ATOM, ind)}"
        if isinstance(e, S.ListLit):
            return "[" + "; ".join(self.expr(x, TUPLE, ind) for x in e.items) + "]"
        if isinstance(e, S.Tuple):
            return "(" + ", ".join(self.expr(x, TUPLE + 1, ind) for x in e.items) + ")"
        if isinstance(e, S.Lambda):
            return f"fun {self.params(e.params)} -> {self.expr(e.body, SEQ, ind)}"
        if isinstance(e, S.Function):
            return "function" + self.cases(e.cases, ind)
        if isinstance(e, S.Match):
            return f"match {self.expr(e.scrutinee, SEQ, ind)} with" + self.cases(e.cases, ind)
        if isinstance(e, S.App):
            fn = self.expr(e.fn, ATOM, ind)
            args = " ".join(self.arg(a, ind) for a in e.args)
            return f"{fn} {args}"
        if isinstance(e, S.Binop):
            level, right = op_prec(e.op)
            lctx, rctx = (level + 1, level) if right else (level, level + 1)
            # open constructs on the right are parenthesized by `prec`
            left = self.expr(e.left, lctx, ind)
            rhs = self.expr(e.right, max(rctx, TUPLE), ind)
            return f"{left} {e.op} {rhs}"
        if isinstance(e, S.Unop):
            operand = e.operand
            text = self.expr(operand, UNARY, ind)
            if isinstance(operand, S.Const) and operand.kind in ("int", "float") and not text.startswith("("):
                text = f"({text})"
            return f"{e.op}{text}" if not text.startswith("-") else f"{e.op} {text}"
        if isinstance(e, S.Let):
            rec = "rec " if e.rec else ""
            return f"let {rec}{self.binding(e.binding, nxt)} in\n{ind}{self.expr(e.body, SEQ, ind)}"
        if isinstance(e, S.LetModule):
            return (f"let module {e.name} = {self.modexpr(e.mexpr, nxt)} in\n"
                    f"{ind}{self.expr(e.body, SEQ, ind)}")
        if isinstance(e, S.LetImplicitModule):
            ip = "".join(" " + self.iparam(p) for p in e.iparams)
            return (f"let implicit module {e.name}{ip} = {self.modexpr(e.mexpr, nxt)} in\n"
                    f"{ind}{self.expr(e.body, SEQ, ind)}")
        if isinstance(e, S.LetOpenImplicit):
            return f"let open implicit {'.'.join(e.path)} in\n{ind}{self.expr(e.body, SEQ, ind)}"
        if isinstance(e, S.If):
            then_ctx = TUPLE if e.else_ is not None else OPEN
            text = f"if {self.expr(e.cond, SEQ, ind)} then {self.expr(e.then, then_ctx, nxt)}"
            if e.else_ is not None:
                text += f" else {self.expr(e.else_, OPEN, nxt)}"
            return text
        if isinstance(e, S.Seq):
            return f"{self.expr(e.first, TUPLE, ind)};\n{ind}{self.expr(e.second, SEQ, ind)}"
        if isinstance(e, S.Annot):
            return f"({self.expr(e.expr, SEQ, ind)} : {self.type(e.ty)})"
        if isinstance(e, S.Pack):
            return f"(module {self.modexpr(e.mexpr, ind)})"
        raise TypeError(f"not an expression: {e!r}")

    def arg(self, a, ind: str) -> str:
        if isinstance(a, S.ModArg):
            return "{" + self.modexpr(a.mexpr, ind) + "}"
        return self.expr(a, ATOM, ind)

    def cases(self, cases, ind: str) -> str:
        out = []
        for i, c in enumerate(cases):
            last = i == len(cases) - 1
            body = self.expr(c.body, SEQ if last else TUPLE, ind + INDENT)
            out.append(f"\n{ind}| {self.pattern(c.pat)} -> {body}")
        return "".join(out)

    def iparam(self, p: S.ImplicitParam) -> str:
        return "{" + f"{p.name} : {self.modtype(p.mtype)}" + "}"

    def params(self, params) -> str:
        out = []
        for p in params:
            if isinstance(p, S.ImplicitParam):
                out.append(self.iparam(p))
            else:
                out.append(self.simple_pattern(p.pat))
        return " ".join(out)

    def binding(self, b: S.Binding, ind: str) -> str:
        if isinstance(b.pat, S.PVar):
            head = value_name(b.pat.name)
        else:
            head = self.simple_pattern(b.pat)
        if b.params:
            head += " " + self.params(b.params)
        if b.annot is not None:
            head += f" : {self.type(b.annot)}"
        if isinstance(b.expr, (S.Seq, S.Let, S.LetModule, S.LetImplicitModule, S.LetOpenImplicit)):
            return f"{head} =\n{ind}{self.expr(b.expr, SEQ, ind)}"
        return f"{head} = {self.expr(b.expr, SEQ, ind)}"

    # ------------------------------------------------------------ patterns

    def pattern(self, p) -> str:
        if isinstance(p, S.PTuple):
            return ", ".join(self.cons_pattern(x) for x in p.items)
        return self.cons_pattern(p)

    def cons_pattern(self, p) -> str:
        if isinstance(p, S.PConstruct) and p.name == "::":
            hd, tl = p.args
            return f"{self.app_pattern(hd)} :: {self.cons_pattern(tl)}"
        if isinstance(p, S.PTuple):
            return f"({self.pattern(p)})"
        return self.app_pattern(p)

    def app_pattern(self, p) -> str:
        if isinstance(p, S.PConstruct) and p.name == "Some":
            return f"Some {self.simple_pattern(p.args[0])}"
        return self.simple_pattern(p)

    def simple_pattern(self, p) -> str:
        if isinstance(p, S.PVar):
            return value_name(p.name) if not is_operator(p.name) else f"( {p.name} )"
        if isinstance(p, S.PWild):
            return "_"
        if isinstance(p, S.PConst):
            return self.const(p.value)
        if isinstance(p, S.PList):
            return "[" + "; ".join(self.cons_pattern(x) for x in p.items) + "]"
        if isinstance(p, S.PAnnot):
            return f"({self.pattern(p.pat)} : {self.type(p.ty)})"
        if isinstance(p, S.PConstruct) and p.name == "None":
            return "None"
        return f"({self.pattern(p)})"

    # ------------------------------------------------------------ types

    def type(self, t, ctx: int = 0) -> str:
        # ctx: 0 arrow, 1 tuple item, 2 constructor argument
        if isinstance(t, S.TyVar):
            return f"'{t.name}"
        if isinstance(t, S.TyCon):
            name = "".join(p + "." for p in t.path) + t.name
            if not t.args:
                return name
            if len(t.args) == 1:
                return f"{self.type(t.args[0], 2)} {name}"
            return "(" + ", ".join(self.type(a) for a in t.args) + f") {name}"
        if isinstance(t, S.TyTuple):
            text = " * ".join(self.type(x, 2) for x in t.items)
            return f"({text})" if ctx >= 2 else text
        if isinstance(t, S.TyArrow):
            text = f"{self.type(t.dom, 1)} -> {self.type(t.cod)}"
            return f"({text})" if ctx >= 1 else text
        if isinstance(t, S.TyImplicit):
            text = "{" + f"{t.name} : {self.modtype(t.mtype)}" + "} -> " + self.type(t.body)
            return f"({text})" if ctx >= 1 else text
        if isinstance(t, S.TyPackage):
            return f"(module {self.modtype(t.mtype)})"
        raise TypeError(f"not a type: {t!r}")

    # ------------------------------------------------------------ modules

    def modtype(self, m, ind: str = "") -> str:
        if isinstance(m, S.MTName):
            return m.name
        if isinstance(m, S.MTSig):
            if not m.items:
                return "sig end"
            inner = ind + INDENT
            body = "".join(f"\n{inner}{self.sig_item(i, inner)}" for i in m.items)
            return f"sig{body}\n{ind}end"
        if isinstance(m, S.MTWith):
            base = self.modtype(m.base, ind)
            if isinstance(m.base, S.MTFunctor):
                base = f"({base})"
            cons = " and ".join(self.with_type(c) for c in m.constraints)
            return f"{base} with {cons}"
        if isinstance(m, S.MTFunctor):
            return f"functor ({m.param} : {self.modtype(m.param_type, ind)}) -> {self.modtype(m.result, ind)}"
        raise TypeError(f"not a module type: {m!r}")

    def tparams(self, params) -> str:
        if not params:
            return ""
        if len(params) == 1:
            return f"'{params[0]} "
        return "(" + ", ".join("'" + p for p in params) + ") "

    def with_type(self, w: S.WithType) -> str:
        name = "".join(p + "." for p in w.path) + w.name
        return f"type {self.tparams(w.params)}{name} = {self.type(w.ty)}"

    def sig_item(self, i, ind: str) -> str:
        if isinstance(i, S.SType):
            text = f"type {self.tparams(i.params)}{i.name}"
            if i.manifest is not None:
                text += f" = {self.type(i.manifest)}"
            return text
        if isinstance(i, S.SVal):
            return f"val {value_name(i.name)} : {self.type(i.ty)}"
        if isinstance(i, S.SModule):
            return f"module {i.name} : {self.modtype(i.mtype, ind)}"
        if isinstance(i, S.SModuleAlias):
            return f"module {i.name} = {'.'.join(i.path)}"
        if isinstance(i, S.SImplicitModule):
            ip = "".join(" " + self.iparam(p) for p in i.iparams)
            if i.alias is not None:
                return f"implicit module {i.name}{ip} = {self.modexpr(i.alias, ind)}"
            return f"implicit module {i.name}{ip} : {self.modtype(i.mtype, ind)}"
        raise TypeError(f"not a signature item: {i!r}")

    def modexpr(self, m, ind: str = "") -> str:
        if isinstance(m, S.MPath):
            return ".".join(m.path)
        if isinstance(m, S.MStruct):
            if not m.items:
                return "struct end"
            inner = ind + INDENT
            body = "".join(f"\n{inner}{self.decl(d, inner)}" for d in m.items)
            return f"struct{body}\n{ind}end"
        if isinstance(m, S.MApply):
            fn = self.modexpr(m.fn, ind)
            if isinstance(m.fn, S.MFunctor):
                fn = f"({fn})"
            arg = self.modexpr(m.arg, ind)
            return f"{fn}{{{arg}}}" if m.implicit else f"{fn}({arg})"
        if isinstance(m, S.MFunctor):
            return (f"functor ({m.param} : {self.modtype(m.param_type, ind)}) -> "
                    f"{self.modexpr(m.body, ind)}")
        if isinstance(m, S.MUnpack):
            return f"(val {self.expr(m.expr, SEQ, ind)})"
        raise TypeError(f"not a module expression: {m!r}")

    # ------------------------------------------------------------ declarations

    def decl(self, d, ind: str = "") -> str:
        nxt = ind + INDENT
        if isinstance(d, S.DLet):
            rec = "rec " if d.rec else ""
            return f"let {rec}{self.binding(d.binding, nxt)}"
        if isinstance(d, S.DModule):
            text = f"module {d.name}"
            for p in d.params:
                text += f" ({p.name} : {self.modtype(p.mtype, ind)})"
            if d.mtype is not None:
                text += f" : {self.modtype(d.mtype, ind)}"
            if d.mexpr is not None:
                text += f" = {self.modexpr(d.mexpr, ind)}"
            return text
        if isinstance(d, S.DImplicitModule):
            text = f"implicit module {d.name}" + "".join(" " + self.iparam(p) for p in d.iparams)
            if d.mtype is not None:
                text += f" : {self.modtype(d.mtype, ind)}"
            if d.mexpr is not None:
                text += f" = {self.modexpr(d.mexpr, ind)}"
            return text
        if isinstance(d, S.DModuleType):
            return f"module type {d.name} = {self.modtype(d.mtype, ind)}"
        if isinstance(d, S.DOpenImplicit):
            return f"open implicit {'.'.join(d.path)}"
        if isinstance(d, S.DType):
            return f"type {self.tparams(d.params)}{d.name} = {self.type(d.manifest)}"
        if isinstance(d, S.DExpr):
            return self.expr(d.expr, SEQ, ind)
        raise TypeError(f"not a declaration: {d!r}")

    def program(self, p: S.Program) -> str:
        out = []
        for i, d in enumerate(p.decls):
            text = self.decl(d)
            if isinstance(d, S.DExpr) and i > 0:
                text = ";;\n" + text
            out.append(text)
        return "\n\n".join(out) + ("\n" if out else "")


def string_literal(s: str) -> str:
    body = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
    return f'"{body}"'


def pretty(p: S.Program) -> str:
    return Printer().program(p)


def pretty_expr(e) -> str:
    return Printer().expr(e)


def pretty_type(t) -> str:
    return Printer().type(t)


def pretty_modtype(m) -> str:
    return Printer().modtype(m)


def pretty_modexpr(m) -> str:
    return Printer().modexpr(m)
