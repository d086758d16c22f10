"""Abstract syntax for the implicitml dialect.

One tree type serves both the surface language (with implicit parameters,
explicit module arguments, implicit modules and ``open implicit``) and the
implicit-free core that elaboration produces (packages, ``let module``,
``(val e)`` and functor expressions).  Every node carries a source span that
is excluded from structural equality, so ``parse(pretty(p)) == p`` compares
shape only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}-{self.end_line}:{self.end_col}"

    def contains(self, other: "Span") -> bool:
        return (self.line, self.col) <= (other.line, other.col) and (
            other.end_line,
            other.end_col,
        ) <= (self.end_line, self.end_col)

    def to(self, other: Optional["Span"]) -> "Span":
        if other is None:
            return self
        return Span(self.line, self.col, other.end_line, other.end_col)


NOWHERE = Span(0, 0, 0, 0)


@dataclass(frozen=True)
class Node:
    span: Optional[Span] = field(
        default=None, compare=False, repr=False, kw_only=True, hash=False
    )


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class TyVar(Node):
    name: str


@dataclass(frozen=True)
class TyCon(Node):
    """``args path.name`` -- builtin (``int list``) or member (``'a M.t``)."""

    args: tuple
    path: tuple  # module names, possibly empty
    name: str


@dataclass(frozen=True)
class TyArrow(Node):
    dom: "TyExpr"
    cod: "TyExpr"


@dataclass(frozen=True)
class TyTuple(Node):
    items: tuple


@dataclass(frozen=True)
class TyImplicit(Node):
    """``{M : T} -> t``"""

    name: str
    mtype: "ModType"
    body: "TyExpr"


@dataclass(frozen=True)
class TyPackage(Node):
    """``(module T)`` -- core-only package type."""

    mtype: "ModType"


TyExpr = Union[TyVar, TyCon, TyArrow, TyTuple, TyImplicit, TyPackage]


# ---------------------------------------------------------------- module types


@dataclass(frozen=True)
class MTName(Node):
    name: str


@dataclass(frozen=True)
class MTSig(Node):
    items: tuple


@dataclass(frozen=True)
class WithType(Node):
    params: tuple  # type variable names
    path: tuple  # submodule names leading to the type
    name: str
    ty: TyExpr


@dataclass(frozen=True)
class MTWith(Node):
    base: "ModType"
    constraints: tuple  # of WithType


@dataclass(frozen=True)
class MTFunctor(Node):
    param: str
    param_type: "ModType"
    result: "ModType"


ModType = Union[MTName, MTSig, MTWith, MTFunctor]


@dataclass(frozen=True)
class SType(Node):
    params: tuple
    name: str
    manifest: Optional[TyExpr]


@dataclass(frozen=True)
class SVal(Node):
    name: str
    ty: TyExpr


@dataclass(frozen=True)
class SModule(Node):
    name: str
    mtype: ModType


@dataclass(frozen=True)
class SModuleAlias(Node):
    name: str
    path: tuple


@dataclass(frozen=True)
class SImplicitModule(Node):
    """``implicit module M {A : T} : T'`` or ``implicit module M {A : T} = P``."""

    name: str
    iparams: tuple  # of ImplicitParam
    mtype: Optional[ModType]
    alias: Optional["ModExpr"]


# ---------------------------------------------------------------- patterns


@dataclass(frozen=True)
class PVar(Node):
    name: str


@dataclass(frozen=True)
class PWild(Node):
    pass


@dataclass(frozen=True)
class PConst(Node):
    value: "Const"


@dataclass(frozen=True)
class PTuple(Node):
    items: tuple


@dataclass(frozen=True)
class PConstruct(Node):
    """``None``, ``Some p``, ``[]``, ``p :: q``."""

    name: str
    args: tuple


@dataclass(frozen=True)
class PList(Node):
    items: tuple


@dataclass(frozen=True)
class PAnnot(Node):
    pat: "Pattern"
    ty: TyExpr


Pattern = Union[PVar, PWild, PConst, PTuple, PConstruct, PList, PAnnot]


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Const(Node):
    kind: str  # int | float | string | bool | unit
    value: object


@dataclass(frozen=True)
class Var(Node):
    path: tuple  # qualifying module names
    name: str


@dataclass(frozen=True)
class Construct(Node):
    name: str  # Some | None | [] | ::
    args: tuple


@dataclass(frozen=True)
class ListLit(Node):
    items: tuple


@dataclass(frozen=True)
class Tuple(Node):
    items: tuple


@dataclass(frozen=True)
class ImplicitParam(Node):
    name: str
    mtype: ModType


@dataclass(frozen=True)
class PatParam(Node):
    pat: Pattern


Param = Union[ImplicitParam, PatParam]


@dataclass(frozen=True)
class Lambda(Node):
    params: tuple
    body: "Expr"


@dataclass(frozen=True)
class Case(Node):
    pat: Pattern
    body: "Expr"


@dataclass(frozen=True)
class Function(Node):
    cases: tuple


@dataclass(frozen=True)
class Match(Node):
    scrutinee: "Expr"
    cases: tuple


@dataclass(frozen=True)
class ModArg(Node):
    """Explicit module argument ``{M}`` at a call site."""

    mexpr: "ModExpr"


@dataclass(frozen=True)
class App(Node):
    fn: "Expr"
    args: tuple  # of Expr | ModArg


@dataclass(frozen=True)
class Binop(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Unop(Node):
    op: str  # - or -.
    operand: "Expr"


@dataclass(frozen=True)
class Binding(Node):
    pat: Pattern
    params: tuple
    annot: Optional[TyExpr]
    expr: "Expr"


@dataclass(frozen=True)
class Let(Node):
    rec: bool
    binding: Binding
    body: "Expr"


@dataclass(frozen=True)
class LetModule(Node):
    name: str
    mexpr: "ModExpr"
    body: "Expr"


@dataclass(frozen=True)
class LetImplicitModule(Node):
    name: str
    iparams: tuple
    mexpr: "ModExpr"
    body: "Expr"


@dataclass(frozen=True)
class LetOpenImplicit(Node):
    path: tuple
    body: "Expr"


@dataclass(frozen=True)
class If(Node):
    cond: "Expr"
    then: "Expr"
    else_: Optional["Expr"]


@dataclass(frozen=True)
class Seq(Node):
    first: "Expr"
    second: "Expr"


@dataclass(frozen=True)
class Annot(Node):
    expr: "Expr"
    ty: TyExpr


@dataclass(frozen=True)
class Pack(Node):
    """``(module M)`` -- core-only first-class package."""

    mexpr: "ModExpr"


Expr = Union[
    Const, Var, Construct, ListLit, Tuple, Lambda, Function, Match, App, Binop,
    Unop, Let, LetModule, LetImplicitModule, LetOpenImplicit, If, Seq, Annot, Pack,
]


# ---------------------------------------------------------------- module expressions


@dataclass(frozen=True)
class MPath(Node):
    path: tuple


@dataclass(frozen=True)
class MStruct(Node):
    items: tuple


@dataclass(frozen=True)
class MApply(Node):
    fn: "ModExpr"
    arg: "ModExpr"
    implicit: bool = False  # written F{M} rather than F(M)


@dataclass(frozen=True)
class MFunctor(Node):
    param: str
    param_type: ModType
    body: "ModExpr"


@dataclass(frozen=True)
class MUnpack(Node):
    """``(val e)``"""

    expr: Expr


ModExpr = Union[MPath, MStruct, MApply, MFunctor, MUnpack]


# ---------------------------------------------------------------- declarations


@dataclass(frozen=True)
class DLet(Node):
    rec: bool
    binding: Binding


@dataclass(frozen=True)
class ModParam(Node):
    """Explicit functor parameter ``(X : T)``."""

    name: str
    mtype: ModType


@dataclass(frozen=True)
class DModule(Node):
    name: str
    params: tuple  # of ModParam
    mtype: Optional[ModType]
    mexpr: Optional[ModExpr]  # None for a bare declaration


@dataclass(frozen=True)
class DImplicitModule(Node):
    name: str
    iparams: tuple  # of ImplicitParam
    mtype: Optional[ModType]
    mexpr: Optional[ModExpr]


@dataclass(frozen=True)
class DModuleType(Node):
    name: str
    mtype: ModType


@dataclass(frozen=True)
class DOpenImplicit(Node):
    path: tuple


@dataclass(frozen=True)
class DType(Node):
    params: tuple
    name: str
    manifest: TyExpr


@dataclass(frozen=True)
class DExpr(Node):
    expr: Expr


Decl = Union[DLet, DModule, DImplicitModule, DModuleType, DOpenImplicit, DType, DExpr]


@dataclass(frozen=True)
class Program(Node):
    decls: tuple


# Elaborated programs use the same tree restricted to the implicit-free subset.
CoreProgram = Program


def children(node: Node):
    """Yield the direct sub-nodes of ``node`` in source order."""
    for name in node.__dataclass_fields__:
        if name == "span":
            continue
        value = getattr(node, name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Node):
                    yield item


def walk(node: Node):
    yield node
    for child in children(node):
        yield from walk(child)


IMPLICIT_CONSTRUCTS = (
    TyImplicit, SImplicitModule, ImplicitParam, ModArg, LetImplicitModule,
    LetOpenImplicit, DImplicitModule, DOpenImplicit,
)


def implicit_constructs(node: Node) -> list:
    """All implicit-only constructs inside ``node``; empty for core programs."""
    found = [n for n in walk(node) if isinstance(n, IMPLICIT_CONSTRUCTS)]
    found += [n for n in walk(node) if isinstance(n, MApply) and n.implicit]
    return found
