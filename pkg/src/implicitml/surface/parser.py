"""Recursive-descent parser for the implicitml dialect.

Operator precedence, loosest first::

    e1; e2                 sequence (right)
    let/fun/function/match/if   extend as far right as possible
    e1, e2                 tuple
    ||  &&                 (right)
    = < > | & $ ...        comparisons, incl. >>= (left)
    @ ^                    (right)
    ::                     (right)
    + -                    (left)
    * / % mod              (left)
    -e  -.e                prefix minus
    f a {M}                application
"""
from __future__ import annotations

from . import syntax as S
from .lexer import Token, syntax_error, tokenize

BUILTIN_CONSTRUCTORS = {"Some", "None"}
DECL_KEYWORDS = {"module", "implicit", "open", "type"}
# Tokens after which a trailing `;` simply ends a sequence.
SEQ_TERMINATORS = {")", "]", ";;", "|", "}", ","}
SEQ_TERMINATOR_KWS = {"end", "in", "then", "else", "with", "and"} | DECL_KEYWORDS


def _level(op: str) -> int:
    if op in ("||", "or"):
        return 1
    if op in ("&&", "&"):
        return 2
    c = op[0]
    if op == "mod" or c in "*/%":
        return 6
    if c in "+-":
        return 5
    if c in "@^":
        return 3
    if c in "=<>|&$!?~":
        return 2.5
    return 2.5


_RIGHT = {1, 2, 3}
# `::` sits between @^ (3) and +- (5)
_CONS_LEVEL = 4


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    # ------------------------------------------------------------ plumbing

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    @property
    def prev_span(self) -> S.Span:
        return self.toks[self.i - 1].span if self.i else self.tok.span

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def at(self, kind: str, value=None) -> bool:
        return self.tok.is_(kind, value)

    def at_kw(self, *words) -> bool:
        return self.tok.kind == "KW" and self.tok.value in words

    def at_punct(self, *ps) -> bool:
        return self.tok.kind == "PUNCT" and self.tok.value in ps

    def accept(self, kind: str, value=None):
        if self.at(kind, value):
            return self.advance()
        return None

    def expect(self, kind: str, value=None, what: str | None = None) -> Token:
        if self.at(kind, value):
            return self.advance()
        want = what or (repr(value) if value is not None else kind.lower())
        raise syntax_error(
            f"expected {want} but found {self.tok}", self.tok.span, [want]
        )

    def error(self, what: str, expected=()):
        return syntax_error(
            f"expected {what} but found {self.tok}", self.tok.span, expected or [what]
        )

    def mk(self, cls, start: S.Span, *args):
        return cls(*args, span=start.to(self.prev_span))

    # ------------------------------------------------------------ program

    def parse_program(self) -> S.Program:
        start = self.tok.span
        decls = []
        while True:
            while self.accept("PUNCT", ";;"):
                pass
            if self.at("EOF"):
                break
            decls.append(self.parse_decl(top=True))
        return S.Program(tuple(decls), span=start.to(self.prev_span))

    def parse_decl(self, top: bool):
        start = self.tok.span
        if self.at_kw("let"):
            save = self.i
            self.advance()
            if self.at_kw("module", "implicit", "open"):
                if not top:
                    raise self.error("a structure item")
                self.i = save
                return self.mk(S.DExpr, start, self.parse_expr())
            rec = bool(self.accept("KW", "rec"))
            binding = self.parse_binding(rec)
            if self.at_kw("in"):
                if not top:
                    raise self.error("a structure item")
                self.advance()
                body = self.parse_expr()
                let = self.mk(S.Let, start, rec, binding, body)
                return self.mk(S.DExpr, start, self._continue_seq(let, start))
            return self.mk(S.DLet, start, rec, binding)
        if self.at_kw("module"):
            self.advance()
            if self.accept("KW", "type"):
                name = self.expect("UIDENT", what="module type name").value
                self.expect("PUNCT", "=")
                return self.mk(S.DModuleType, start, name, self.parse_modtype())
            name = self.expect("UIDENT", what="module name").value
            params = []
            while self.at_punct("("):
                pstart = self.advance().span
                pname = self.expect("UIDENT", what="functor parameter").value
                self.expect("PUNCT", ":")
                pty = self.parse_modtype()
                self.expect("PUNCT", ")")
                params.append(self.mk(S.ModParam, pstart, pname, pty))
            mty = self.parse_modtype() if self.accept("PUNCT", ":") else None
            mexpr = None
            if self.accept("PUNCT", "="):
                mexpr = self.parse_modexpr()
            elif mty is None:
                raise self.error("'=' or ':'", ["=", ":"])
            return self.mk(S.DModule, start, name, tuple(params), mty, mexpr)
        if self.at_kw("implicit"):
            self.advance()
            self.expect("KW", "module")
            name = self.expect("UIDENT", what="module name").value
            iparams = self.parse_iparams()
            mty = self.parse_modtype() if self.accept("PUNCT", ":") else None
            mexpr = None
            if self.accept("PUNCT", "="):
                mexpr = self.parse_modexpr()
            elif mty is None:
                raise self.error("'=' or ':'", ["=", ":"])
            return self.mk(S.DImplicitModule, start, name, iparams, mty, mexpr)
        if self.at_kw("open"):
            self.advance()
            self.expect("KW", "implicit")
            return self.mk(S.DOpenImplicit, start, self.parse_modpath())
        if self.at_kw("type"):
            self.advance()
            params = self.parse_tparams()
            name = self.expect("LIDENT", what="type name").value
            self.expect("PUNCT", "=")
            return self.mk(S.DType, start, params, name, self.parse_type())
        if not top:
            raise self.error("a structure item", ["let", "module", "implicit", "open", "type"])
        return self.mk(S.DExpr, start, self.parse_expr())

    def parse_iparams(self) -> tuple:
        out = []
        while self.at_punct("{"):
            out.append(self.parse_iparam())
        return tuple(out)

    def parse_iparam(self) -> S.ImplicitParam:
        start = self.expect("PUNCT", "{").span
        name = self.expect("UIDENT", what="module parameter name").value
        self.expect("PUNCT", ":")
        mty = self.parse_modtype()
        self.expect("PUNCT", "}")
        return self.mk(S.ImplicitParam, start, name, mty)

    def parse_modpath(self) -> tuple:
        names = [self.expect("UIDENT", what="module path").value]
        while self.at_punct(".") and self.peek().kind == "UIDENT":
            self.advance()
            names.append(self.advance().value)
        return tuple(names)

    def parse_tparams(self) -> tuple:
        if self.at("TYVAR"):
            return (self.advance().value,)
        if self.at_punct("(") and self.peek().kind in ("TYVAR", "OP"):
            self.advance()
            names = [self._tparam()]
            while self.accept("PUNCT", ","):
                names.append(self._tparam())
            self.expect("PUNCT", ")")
            return tuple(names)
        if self.at("OP") and self.tok.value in ("+", "-") and self.peek().kind == "TYVAR":
            self.advance()
            return (self.advance().value,)
        return ()

    def _tparam(self) -> str:
        if self.at("OP") and self.tok.value in ("+", "-"):
            self.advance()
        return self.expect("TYVAR", what="type parameter").value

    # ------------------------------------------------------------ bindings

    def parse_binding(self, rec: bool) -> S.Binding:
        start = self.tok.span
        params = ()
        if self.at("LIDENT"):
            t = self.advance()
            pat = S.PVar(t.value, span=t.span)
            params = self.parse_params()
        elif self.at_punct("(") and self._at_op_name(1) and self.peek(2).is_("PUNCT", ")"):
            self.advance()
            op = self.advance().value
            self.advance()
            pat = self.mk(S.PVar, start, op)
            params = self.parse_params()
        else:
            pat = self.parse_pattern()
        annot = self.parse_type() if self.accept("PUNCT", ":") else None
        self.expect("PUNCT", "=")
        expr = self.parse_expr()
        return self.mk(S.Binding, start, pat, params, annot, expr)

    def parse_params(self) -> tuple:
        params = []
        while True:
            if self.at_punct("{"):
                params.append(self.parse_iparam())
            elif self._at_simple_pattern():
                start = self.tok.span
                params.append(self.mk(S.PatParam, start, self.parse_simple_pattern()))
            else:
                return tuple(params)

    def _at_simple_pattern(self) -> bool:
        t = self.tok
        if t.kind in ("LIDENT", "INT", "FLOAT", "STRING"):
            return True
        if t.kind == "UIDENT":
            return t.value in BUILTIN_CONSTRUCTORS
        if t.kind == "KW":
            return t.value in ("true", "false")
        return t.kind == "PUNCT" and t.value in ("(", "[", "_")

    # ------------------------------------------------------------ patterns

    def parse_pattern(self):
        start = self.tok.span
        first = self.parse_cons_pattern()
        if self.at_punct(","):
            items = [first]
            while self.accept("PUNCT", ","):
                items.append(self.parse_cons_pattern())
            return self.mk(S.PTuple, start, tuple(items))
        return first

    def parse_cons_pattern(self):
        start = self.tok.span
        head = self.parse_app_pattern()
        if self.accept("PUNCT", "::"):
            tail = self.parse_cons_pattern()
            return self.mk(S.PConstruct, start, "::", (head, tail))
        return head

    def parse_app_pattern(self):
        start = self.tok.span
        if self.at("UIDENT", "Some"):
            self.advance()
            return self.mk(S.PConstruct, start, "Some", (self.parse_simple_pattern(),))
        return self.parse_simple_pattern()

    def parse_simple_pattern(self):
        start = self.tok.span
        t = self.tok
        if t.kind == "LIDENT":
            self.advance()
            return self.mk(S.PVar, start, t.value)
        if t.is_("PUNCT", "_"):
            self.advance()
            return self.mk(S.PWild, start)
        if t.kind in ("INT", "FLOAT", "STRING") or self.at_kw("true", "false"):
            return self.mk(S.PConst, start, self.parse_const())
        if t.kind == "OP" and t.value in ("-", "-.") and self.peek().kind in ("INT", "FLOAT"):
            self.advance()
            c = self.advance()
            kind = "int" if c.kind == "INT" else "float"
            return self.mk(S.PConst, start, self.mk(S.Const, start, kind, -c.value))
        if t.kind == "UIDENT":
            if t.value == "None":
                self.advance()
                return self.mk(S.PConstruct, start, "None", ())
            if t.value == "Some":
                return self.parse_app_pattern()
            raise self.error("a pattern")
        if t.is_("PUNCT", "["):
            self.advance()
            items = []
            while not self.at_punct("]"):
                items.append(self.parse_cons_pattern())
                if not self.accept("PUNCT", ";"):
                    break
            self.expect("PUNCT", "]")
            return self.mk(S.PList, start, tuple(items))
        if t.is_("PUNCT", "("):
            self.advance()
            if self.accept("PUNCT", ")"):
                return self.mk(S.PConst, start, self.mk(S.Const, start, "unit", None))
            p = self.parse_pattern()
            if self.accept("PUNCT", ":"):
                ty = self.parse_type()
                self.expect("PUNCT", ")")
                return self.mk(S.PAnnot, start, p, ty)
            self.expect("PUNCT", ")")
            return p
        raise self.error("a pattern")

    def parse_const(self) -> S.Const:
        t = self.advance()
        kinds = {"INT": "int", "FLOAT": "float", "STRING": "string"}
        if t.kind in kinds:
            return S.Const(kinds[t.kind], t.value, span=t.span)
        if t.is_("KW", "true") or t.is_("KW", "false"):
            return S.Const("bool", t.value == "true", span=t.span)
        raise syntax_error(f"expected a literal but found {t}", t.span, ["literal"])

    # ------------------------------------------------------------ expressions

    def parse_expr(self):
        """Full expression including `;` sequences."""
        start = self.tok.span
        first = self.parse_expr_noseq()
        return self._continue_seq(first, start)

    def _continue_seq(self, first, start):
        if not self.at_punct(";"):
            return first
        save = self.i
        self.advance()
        if self._at_seq_end():
            return first
        if self.at_kw("let"):
            # `e; let f x = ...` at top level is a trailing `;` before a
            # declaration, not a sequence.
            try:
                second = self.parse_expr()
            except Exception:
                self.i = save + 1
                return first
            return self.mk(S.Seq, start, first, second)
        second = self.parse_expr()
        return self.mk(S.Seq, start, first, second)

    def _at_seq_end(self) -> bool:
        t = self.tok
        if t.kind == "EOF":
            return True
        if t.kind == "PUNCT" and t.value in SEQ_TERMINATORS:
            return True
        return t.kind == "KW" and t.value in SEQ_TERMINATOR_KWS

    def parse_expr_noseq(self):
        if self.at_kw("let", "fun", "function", "match", "if"):
            return self.parse_open()
        start = self.tok.span
        first = self.parse_binary(0)
        if self.at_punct(","):
            items = [first]
            while self.accept("PUNCT", ","):
                if self.at_kw("let", "fun", "function", "match", "if"):
                    items.append(self.parse_open())
                    break
                items.append(self.parse_binary(0))
            return self.mk(S.Tuple, start, tuple(items))
        return first

    def parse_open(self):
        """let / fun / function / match / if."""
        start = self.tok.span
        if self.accept("KW", "fun"):
            params = self.parse_params()
            if not params:
                raise self.error("a parameter")
            self.expect("PUNCT", "->")
            return self.mk(S.Lambda, start, params, self.parse_expr())
        if self.accept("KW", "function"):
            return self.mk(S.Function, start, self.parse_cases())
        if self.accept("KW", "match"):
            scrut = self.parse_expr()
            self.expect("KW", "with")
            return self.mk(S.Match, start, scrut, self.parse_cases())
        if self.accept("KW", "if"):
            cond = self.parse_expr()
            self.expect("KW", "then")
            then = self.parse_expr_noseq()
            else_ = None
            if self.accept("KW", "else"):
                else_ = self.parse_expr_noseq()
            return self.mk(S.If, start, cond, then, else_)
        self.expect("KW", "let")
        if self.accept("KW", "module"):
            name = self.expect("UIDENT", what="module name").value
            self.expect("PUNCT", "=")
            me = self.parse_modexpr()
            self.expect("KW", "in")
            return self.mk(S.LetModule, start, name, me, self.parse_expr())
        if self.accept("KW", "implicit"):
            self.expect("KW", "module")
            name = self.expect("UIDENT", what="module name").value
            iparams = self.parse_iparams()
            self.expect("PUNCT", "=")
            me = self.parse_modexpr()
            self.expect("KW", "in")
            return self.mk(S.LetImplicitModule, start, name, iparams, me, self.parse_expr())
        if self.accept("KW", "open"):
            self.expect("KW", "implicit")
            path = self.parse_modpath()
            self.expect("KW", "in")
            return self.mk(S.LetOpenImplicit, start, path, self.parse_expr())
        rec = bool(self.accept("KW", "rec"))
        binding = self.parse_binding(rec)
        self.expect("KW", "in")
        return self.mk(S.Let, start, rec, binding, self.parse_expr())

    def parse_cases(self) -> tuple:
        self.accept("PUNCT", "|")
        cases = []
        while True:
            start = self.tok.span
            pat = self.parse_pattern()
            self.expect("PUNCT", "->")
            body = self.parse_expr()
            cases.append(self.mk(S.Case, start, pat, body))
            if not self.accept("PUNCT", "|"):
                return tuple(cases)

    def _binop_token(self):
        t = self.tok
        if t.kind == "OP":
            return t.value
        if t.kind == "PUNCT" and t.value in ("=", "*", "|", "::"):
            # `|` only as an operator inside expressions is never valid alone
            return None if t.value == "|" else t.value
        return None

    def parse_binary(self, min_level: float):
        start = self.tok.span
        left = self.parse_unary()
        while True:
            op = self._binop_token()
            if op is None:
                return left
            level = _CONS_LEVEL if op == "::" else _level(op)
            if level < min_level:
                return left
            self.advance()
            right_assoc = op == "::" or level in _RIGHT
            next_min = level if right_assoc else level + 0.1
            if self.at_kw("let", "fun", "function", "match", "if"):
                right = self.parse_open()
            else:
                right = self.parse_binary(next_min)
            if op == "::":
                left = self.mk(S.Construct, start, "::", (left, right))
            else:
                left = self.mk(S.Binop, start, op, left, right)

    def parse_unary(self):
        start = self.tok.span
        if self.at("OP") and self.tok.value in ("-", "-."):
            op = self.advance().value
            if self.at("INT") or self.at("FLOAT"):
                t = self.advance()
                kind = "int" if t.kind == "INT" else "float"
                return self.mk(S.Const, start, kind, -t.value)
            return self.mk(S.Unop, start, op, self.parse_unary())
        return self.parse_app()

    def _at_arg_start(self) -> bool:
        t = self.tok
        if t.kind in ("INT", "FLOAT", "STRING", "LIDENT", "UIDENT"):
            return True
        if t.kind == "KW":
            return t.value in ("true", "false", "begin")
        return t.kind == "PUNCT" and t.value in ("(", "[", "{")

    def parse_app(self):
        start = self.tok.span
        fn = self.parse_atom()
        if isinstance(fn, S.Construct) and fn.name == "Some" and not fn.args:
            arg = self.parse_atom()
            fn = self.mk(S.Construct, start, "Some", (arg,))
        args = []
        while self._at_arg_start():
            if self.at_punct("{"):
                astart = self.advance().span
                me = self.parse_modexpr()
                self.expect("PUNCT", "}")
                args.append(self.mk(S.ModArg, astart, me))
            else:
                args.append(self.parse_atom())
        if args:
            return self.mk(S.App, start, fn, tuple(args))
        return fn

    def parse_atom(self):
        start = self.tok.span
        t = self.tok
        if t.kind in ("INT", "FLOAT", "STRING") or self.at_kw("true", "false"):
            return self.parse_const()
        if t.kind == "LIDENT":
            self.advance()
            return self.mk(S.Var, start, (), t.value)
        if t.kind == "UIDENT":
            if self.peek().is_("PUNCT", "."):
                path = [self.advance().value]
                while self.at_punct(".") and self.peek().kind == "UIDENT" and self.peek(2).is_("PUNCT", "."):
                    self.advance()
                    path.append(self.advance().value)
                self.expect("PUNCT", ".")
                if self.at("LIDENT"):
                    return self.mk(S.Var, start, tuple(path), self.advance().value)
                if self.at_punct("("):
                    self.advance()
                    op = self._op_name()
                    self.expect("PUNCT", ")")
                    return self.mk(S.Var, start, tuple(path), op)
                raise self.error("a value name")
            self.advance()
            return self.mk(S.Construct, start, t.value, ())
        if self.accept("KW", "begin"):
            e = self.parse_expr()
            self.expect("KW", "end")
            return e
        if t.is_("PUNCT", "["):
            self.advance()
            items = []
            while not self.at_punct("]"):
                items.append(self.parse_expr_noseq())
                if not self.accept("PUNCT", ";"):
                    break
            self.expect("PUNCT", "]")
            return self.mk(S.ListLit, start, tuple(items))
        if t.is_("PUNCT", "("):
            self.advance()
            if self.accept("PUNCT", ")"):
                return self.mk(S.Const, start, "unit", None)
            if self._at_op_name() and self.peek().is_("PUNCT", ")"):
                op = self._op_name()
                self.advance()
                return self.mk(S.Var, start, (), op)
            if self.at_kw("module"):
                self.advance()
                me = self.parse_modexpr()
                self.expect("PUNCT", ")")
                return self.mk(S.Pack, start, me)
            e = self.parse_expr()
            if self.accept("PUNCT", ":"):
                ty = self.parse_type()
                self.expect("PUNCT", ")")
                return self.mk(S.Annot, start, e, ty)
            self.expect("PUNCT", ")")
            return e
        raise self.error("an expression")

    def _at_op_name(self, k: int = 0) -> bool:
        t = self.peek(k) if k else self.tok
        return t.kind == "OP" or (t.kind == "PUNCT" and t.value in ("*", "=", "::"))

    def _op_name(self) -> str:
        t = self.tok
        if t.kind == "OP" or (t.kind == "PUNCT" and t.value in ("*", "=", "::")):
            self.advance()
            return t.value
        raise self.error("an operator")

    # ------------------------------------------------------------ types

    def parse_type(self):
        start = self.tok.span
        if self.at_punct("{"):
            self.advance()
            name = self.expect("UIDENT", what="module parameter name").value
            self.expect("PUNCT", ":")
            mty = self.parse_modtype()
            self.expect("PUNCT", "}")
            self.expect("PUNCT", "->")
            return self.mk(S.TyImplicit, start, name, mty, self.parse_type())
        dom = self.parse_tuple_type()
        if self.accept("PUNCT", "->"):
            return self.mk(S.TyArrow, start, dom, self.parse_type())
        return dom

    def parse_tuple_type(self):
        start = self.tok.span
        first = self.parse_app_type()
        if not self.at_punct("*"):
            return first
        items = [first]
        while self.accept("PUNCT", "*"):
            items.append(self.parse_app_type())
        return self.mk(S.TyTuple, start, tuple(items))

    def _at_tycon(self) -> bool:
        return self.at("LIDENT") or (self.at("UIDENT") and self.peek().is_("PUNCT", "."))

    def _parse_tycon_name(self):
        path = []
        while self.at("UIDENT"):
            path.append(self.advance().value)
            self.expect("PUNCT", ".")
        name = self.expect("LIDENT", what="type constructor").value
        return tuple(path), name

    def parse_app_type(self):
        start = self.tok.span
        t = self.parse_atom_type()
        while isinstance(t, tuple) or self._at_tycon():
            args = t if isinstance(t, tuple) else (t,)
            path, name = self._parse_tycon_name()
            t = self.mk(S.TyCon, start, args, path, name)
        return t

    def parse_atom_type(self):
        start = self.tok.span
        if self.at("TYVAR"):
            return self.mk(S.TyVar, start, self.advance().value)
        if self._at_tycon():
            path, name = self._parse_tycon_name()
            return self.mk(S.TyCon, start, (), path, name)
        if self.accept("PUNCT", "("):
            if self.accept("KW", "module"):
                mty = self.parse_modtype()
                self.expect("PUNCT", ")")
                return self.mk(S.TyPackage, start, mty)
            first = self.parse_type()
            if self.at_punct(","):
                items = [first]
                while self.accept("PUNCT", ","):
                    items.append(self.parse_type())
                self.expect("PUNCT", ")")
                if not self._at_tycon():
                    raise self.error("a type constructor")
                return tuple(items)
            self.expect("PUNCT", ")")
            return first
        raise self.error("a type")

    # ------------------------------------------------------------ module types

    def parse_modtype(self):
        start = self.tok.span
        if self.accept("KW", "functor"):
            self.expect("PUNCT", "(")
            name = self.expect("UIDENT", what="functor parameter").value
            self.expect("PUNCT", ":")
            pty = self.parse_modtype()
            self.expect("PUNCT", ")")
            self.expect("PUNCT", "->")
            return self.mk(S.MTFunctor, start, name, pty, self.parse_modtype())
        base = self.parse_atom_modtype()
        while self.at_kw("with"):
            self.advance()
            cons = [self.parse_with_type()]
            while self.accept("KW", "and"):
                cons.append(self.parse_with_type())
            base = self.mk(S.MTWith, start, base, tuple(cons))
        return base

    def parse_with_type(self) -> S.WithType:
        start = self.expect("KW", "type").span
        params = self.parse_tparams()
        path, name = self._parse_tycon_name()
        self.expect("PUNCT", "=")
        return self.mk(S.WithType, start, params, path, name, self.parse_type())

    def parse_atom_modtype(self):
        start = self.tok.span
        if self.at("UIDENT"):
            return self.mk(S.MTName, start, self.advance().value)
        if self.accept("KW", "sig"):
            items = []
            while not self.at_kw("end"):
                while self.accept("PUNCT", ";;"):
                    pass
                if self.at_kw("end"):
                    break
                items.append(self.parse_sig_item())
            self.expect("KW", "end")
            return self.mk(S.MTSig, start, tuple(items))
        if self.accept("PUNCT", "("):
            mt = self.parse_modtype()
            self.expect("PUNCT", ")")
            return mt
        raise self.error("a module type")

    def parse_sig_item(self):
        start = self.tok.span
        if self.accept("KW", "type"):
            params = self.parse_tparams()
            name = self.expect("LIDENT", what="type name").value
            manifest = self.parse_type() if self.accept("PUNCT", "=") else None
            return self.mk(S.SType, start, params, name, manifest)
        if self.accept("KW", "val"):
            if self.accept("PUNCT", "("):
                name = self._op_name()
                self.expect("PUNCT", ")")
            else:
                name = self.expect("LIDENT", what="value name").value
            self.expect("PUNCT", ":")
            return self.mk(S.SVal, start, name, self.parse_type())
        if self.accept("KW", "module"):
            name = self.expect("UIDENT", what="module name").value
            if self.accept("PUNCT", "="):
                return self.mk(S.SModuleAlias, start, name, self.parse_modpath())
            self.expect("PUNCT", ":")
            return self.mk(S.SModule, start, name, self.parse_modtype())
        if self.accept("KW", "implicit"):
            self.expect("KW", "module")
            name = self.expect("UIDENT", what="module name").value
            iparams = self.parse_iparams()
            if self.accept("PUNCT", "="):
                return self.mk(S.SImplicitModule, start, name, iparams, None, self.parse_modexpr())
            self.expect("PUNCT", ":")
            return self.mk(S.SImplicitModule, start, name, iparams, self.parse_modtype(), None)
        raise self.error("a signature item", ["type", "val", "module", "implicit", "end"])

    # ------------------------------------------------------------ module expressions

    def parse_modexpr(self):
        start = self.tok.span
        if self.accept("KW", "functor"):
            self.expect("PUNCT", "(")
            name = self.expect("UIDENT", what="functor parameter").value
            self.expect("PUNCT", ":")
            pty = self.parse_modtype()
            self.expect("PUNCT", ")")
            self.expect("PUNCT", "->")
            return self.mk(S.MFunctor, start, name, pty, self.parse_modexpr())
        me = self.parse_atom_modexpr()
        while self.at_punct("(", "{"):
            implicit = self.advance().value == "{"
            arg = self.parse_modexpr()
            self.expect("PUNCT", "}" if implicit else ")")
            me = self.mk(S.MApply, start, me, arg, implicit)
        return me

    def parse_atom_modexpr(self):
        start = self.tok.span
        if self.at("UIDENT"):
            return self.mk(S.MPath, start, self.parse_modpath())
        if self.accept("KW", "struct"):
            items = []
            while not self.at_kw("end"):
                while self.accept("PUNCT", ";;"):
                    pass
                if self.at_kw("end"):
                    break
                items.append(self.parse_decl(top=False))
            self.expect("KW", "end")
            return self.mk(S.MStruct, start, tuple(items))
        if self.accept("PUNCT", "("):
            if self.accept("KW", "val"):
                e = self.parse_expr()
                self.expect("PUNCT", ")")
                return self.mk(S.MUnpack, start, e)
            me = self.parse_modexpr()
            self.expect("PUNCT", ")")
            return me
        raise self.error("a module expression")


def parse(source: str) -> S.Program:
    return Parser(source).parse_program()


def parse_expr(source: str):
    p = Parser(source)
    e = p.parse_expr()
    p.expect("EOF", what="end of input")
    return e


def parse_type(source: str):
    p = Parser(source)
    t = p.parse_type()
    p.expect("EOF", what="end of input")
    return t


def parse_modtype(source: str):
    p = Parser(source)
    t = p.parse_modtype()
    p.expect("EOF", what="end of input")
    return t
