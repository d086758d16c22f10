from __future__ import annotations

from dataclasses import dataclass

from ..diagnostics import CompileError, Diagnostic
from .syntax import Span

KEYWORDS = {
    "let", "rec", "in", "fun", "function", "match", "with", "if", "then",
    "else", "module", "implicit", "open", "type", "sig", "struct", "end", "val",
    "functor", "true", "false", "and", "begin", "mod", "or",
}

OP_CHARS = set("!$%&*+-./:<=>?@^|~")

# Operator tokens that are punctuation rather than infix operators.
PUNCT_OPS = {"->", ":", "::", "=", "|", ".", "*"}


@dataclass(frozen=True)
class Token:
    kind: str  # INT FLOAT STRING LIDENT UIDENT TYVAR KW OP PUNCT EOF
    value: object
    span: Span

    def is_(self, kind: str, value=None) -> bool:
        return self.kind == kind and (value is None or self.value == value)

    def __str__(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "STRING":
            return repr(self.value)
        return str(self.value)


def syntax_error(message: str, span: Span, expected=()) -> CompileError:
    return CompileError(
        Diagnostic("E-SYNTAX", span, message, {"expected": sorted(set(expected))})
    )


class Lexer:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos >= len(self.src):
                return
            if self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.src[i] if i < len(self.src) else "\0"

    def _skip_trivia(self) -> None:
        while self.pos < len(self.src):
            c = self._peek()
            if c in " \t\r\n\f":
                self._advance()
            elif c == "(" and self._peek(1) == "*" and self._peek(2) != ")":
                self._skip_comment()
            else:
                return

    def _skip_comment(self) -> None:
        start = (self.line, self.col)
        depth = 0
        while self.pos < len(self.src):
            if self._peek() == "(" and self._peek(1) == "*":
                depth += 1
                self._advance(2)
            elif self._peek() == "*" and self._peek(1) == ")":
                depth -= 1
                self._advance(2)
                if depth == 0:
                    return
            elif self._peek() == '"':
                self._read_string()
            else:
                self._advance()
        raise syntax_error(
            "unterminated comment", Span(*start, self.line, self.col), ["*)"]
        )

    def _read_string(self) -> str:
        start = (self.line, self.col)
        self._advance()
        out = []
        escapes = {"n": "\n", "t": "\t", "\\": "\\", '"': '"', "'": "'", "r": "\r"}
        while True:
            c = self._peek()
            if c == "\0" and self.pos >= len(self.src):
                raise syntax_error(
                    "unterminated string literal",
                    Span(*start, self.line, self.col),
                    ['"'],
                )
            if c == '"':
                self._advance()
                return "".join(out)
            if c == "\\":
                e = self._peek(1)
                if e not in escapes:
                    raise syntax_error(
                        f"invalid escape \\{e}",
                        Span(self.line, self.col, self.line, self.col + 2),
                    )
                out.append(escapes[e])
                self._advance(2)
                continue
            out.append(c)
            self._advance()

    def tokens(self) -> list[Token]:
        toks = []
        while True:
            self._skip_trivia()
            if self.pos >= len(self.src):
                toks.append(Token("EOF", None, Span(self.line, self.col, self.line, self.col)))
                return toks
            toks.append(self._next())

    def _next(self) -> Token:
        sl, sc = self.line, self.col
        c = self._peek()

        def tok(kind, value):
            return Token(kind, value, Span(sl, sc, self.line, self.col))

        if c.isdigit():
            start = self.pos
            while self._peek().isdigit() or self._peek() == "_":
                self._advance()
            is_float = False
            if self._peek() == "." and not (self._peek(1) in OP_CHARS and self._peek(1) != "."):
                is_float = True
                self._advance()
                while self._peek().isdigit() or self._peek() == "_":
                    self._advance()
            if self._peek() in ("e", "E") and (
                self._peek(1).isdigit()
                or (self._peek(1) in "+-" and self._peek(2).isdigit())
            ):
                is_float = True
                self._advance(2)
                while self._peek().isdigit():
                    self._advance()
            text = self.src[start:self.pos].replace("_", "")
            if is_float:
                return tok("FLOAT", float(text))
            return tok("INT", int(text))
        if c == '"':
            return tok("STRING", self._read_string())
        if c == "'" and (self._peek(1).isalpha() or self._peek(1) == "_"):
            self._advance()
            start = self.pos
            while self._peek().isalnum() or self._peek() in "_'":
                self._advance()
            return tok("TYVAR", self.src[start:self.pos])
        if c.isalpha() or c == "_":
            start = self.pos
            while self._peek().isalnum() or self._peek() in "_'":
                self._advance()
            word = self.src[start:self.pos]
            if word in KEYWORDS:
                if word == "mod":
                    return tok("OP", "mod")
                if word == "or":
                    return tok("OP", "||")
                return tok("KW", word)
            if word == "_":
                return tok("PUNCT", "_")
            if word[0].isupper():
                return tok("UIDENT", word)
            return tok("LIDENT", word)
        if c in OP_CHARS:
            start = self.pos
            while self._peek() in OP_CHARS:
                # `*)` closes a comment, never part of an operator
                if self._peek() == "*" and self._peek(1) == ")" and self.pos > start:
                    break
                self._advance()
            op = self.src[start:self.pos]
            if op in PUNCT_OPS:
                return tok("PUNCT", op)
            return tok("OP", op)
        if c == ";" and self._peek(1) == ";":
            self._advance(2)
            return tok("PUNCT", ";;")
        if c in "()[]{},;":
            self._advance()
            return tok("PUNCT", c)
        self._advance()
        raise syntax_error(
            f"unexpected character {c!r}", Span(sl, sc, self.line, self.col)
        )


def tokenize(source: str) -> list[Token]:
    return Lexer(source).tokens()
