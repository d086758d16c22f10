"""Implicit-argument search.

`Resolver.resolve` enumerates every way to build a module from the
implicit scope that matches an obligation: leaves are modules and
implicit parameters in scope, inner nodes are implicit functors whose
arguments are found recursively, left to right, depth first.  The
solutions are compared after alias normalization; exactly one distinct
normal form means success.

Each functor application records a snapshot of the constraint sizes it
had to satisfy.  Applying the same functor again deeper in the search is
allowed only if the new snapshot is point-wise no larger and strictly
smaller somewhere; otherwise the whole search stops with a termination
error.  A depth cap backs this up.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .modules import InclusionError, Registry, UnknownPath
from .types import (
    PApply, PDot, PIdent, Path, Sig, Subst, TMember, Type, UnifyError, VarNamer,
    constraint_size, expand_manifest, fresh_ident, fresh_var, functor_params, map_sig,
    map_type, path_str, reroot_modtype, show_sig_name, show_type, unify,
)

DEFAULT_MAX_DEPTH = 64


@dataclass(frozen=True)
class ScopeEntry:
    name: str  # how the entry is displayed, e.g. Show_int or List.Show_x
    names: tuple  # surface path used when elaborating
    path: Path
    kind: str  # module | functor | param


@dataclass(frozen=True)
class Constraint:
    """`args P.sub.member = rhs` where P is the obligation's parameter."""

    sub: tuple
    member: str
    args: tuple
    rhs: Type

    @property
    def label(self) -> str:
        return ".".join(self.sub + (self.member,))


def show_constraints(cs, namer: Optional[VarNamer] = None) -> str:
    namer = namer or VarNamer()
    parts = []
    for c in cs:
        lhs = c.label
        if len(c.args) == 1:
            lhs = f"{show_type(c.args[0], namer, 2)} {lhs}"
        elif c.args:
            lhs = "(" + ", ".join(show_type(a, namer) for a in c.args) + f") {lhs}"
        parts.append(f"{lhs} = {show_type(c.rhs, namer)}")
    return "{" + ", ".join(parts) + "}"


@dataclass
class Obligation:
    id: int
    param: str
    target: Sig
    constraints: list
    span: object
    scope: tuple
    label: str = ""

    def __post_init__(self):
        self.label = self.label or f"#{self.id}"


@dataclass(frozen=True)
class Candidate:
    entry: ScopeEntry
    args: tuple = ()

    def path(self) -> Path:
        p = self.entry.path
        for a in self.args:
            p = PApply(p, a.path())
        return p

    def text(self) -> str:
        out = self.entry.name
        for a in self.args:
            out += f"({a.text()})"
        return out


# ---------------------------------------------------------------- outcomes


@dataclass
class Unique:
    candidate: Candidate
    normal_form: str
    subst: Subst

    variant = "Unique"


@dataclass
class Ambiguous:
    solutions: list  # of (normal form, candidate text), deduplicated

    variant = "Ambiguous"


@dataclass
class NoSolution:
    explored: int

    variant = "NoSolution"


@dataclass
class TerminationFailure:
    functor: str
    previous: dict
    incoming: dict
    partial: list = field(default_factory=list)
    depth_cap: bool = False

    variant = "TerminationError"


class _Abort(Exception):
    def __init__(self, functor, previous, incoming, depth_cap=False):
        super().__init__(functor)
        self.functor = functor
        self.previous = previous
        self.incoming = incoming
        self.depth_cap = depth_cap


@dataclass(frozen=True)
class Snapshot:
    sizes: dict
    shown: dict


def snapshot(constraints, subst: Subst) -> Snapshot:
    sizes, shown = {}, {}
    namer = VarNamer()
    for c in constraints:
        rhs = subst.zonk(c.rhs)
        sizes[c.label] = sizes.get(c.label, 0) + constraint_size(rhs)
        text = show_type(rhs, namer)
        shown[c.label] = text if c.label not in shown else f"{shown[c.label]}; {text}"
    return Snapshot(sizes, shown)


def decreases(incoming: Snapshot, previous: Snapshot) -> bool:
    """Point-wise order on the members both snapshots mention."""
    common = [k for k in incoming.sizes if k in previous.sizes]
    if not all(incoming.sizes[k] <= previous.sizes[k] for k in common):
        return False
    return any(incoming.sizes[k] < previous.sizes[k] for k in common)


def subpath(p: Path, names: tuple) -> Path:
    for n in names:
        p = PDot(p, n)
    return p


def member_subpath(p: Path, root: Path):
    if p == root:
        return ()
    if isinstance(p, PDot):
        s = member_subpath(p.parent, root)
        return None if s is None else s + (p.name,)
    return None


class Resolver:
    def __init__(self, registry: Registry, max_depth: int = DEFAULT_MAX_DEPTH,
                 trace: Optional[Callable[[str], None]] = None):
        self.registry = registry
        self.max_depth = max_depth
        self.trace = trace
        self.explored = 0

    def emit(self, line: str) -> None:
        if self.trace is not None:
            self.trace(line)

    # ------------------------------------------------------------ entry point

    def resolve(self, ob: Obligation, subst: Subst):
        self.explored = 0
        found = []
        seen = {}
        try:
            for cand, s in self.solve(ob.target, ob.constraints, ob.scope, subst, 0, (), ob.label):
                nf = path_str(self.registry.normalize(cand.path()))
                self.emit(f"SOLUTION {nf} FOR {ob.label}")
                if nf not in seen:
                    seen[nf] = (cand, s)
                    found.append((nf, cand.text()))
        except _Abort as a:
            outcome = TerminationFailure(
                a.functor, a.previous, a.incoming, [nf for nf, _ in found], a.depth_cap
            )
            self.emit(f"OUTCOME {outcome.variant} {a.functor} FOR {ob.label}")
            return outcome
        if len(found) == 1:
            nf = found[0][0]
            cand, s = seen[nf]
            self.emit(f"OUTCOME Unique {nf} FOR {ob.label}")
            return Unique(cand, nf, s)
        if not found:
            self.emit(f"OUTCOME NoSolution FOR {ob.label}")
            return NoSolution(self.explored)
        found.sort()
        self.emit(f"OUTCOME Ambiguous {' '.join(nf for nf, _ in found)} FOR {ob.label}")
        return Ambiguous(found)

    # ------------------------------------------------------------ search

    def solve(self, target: Sig, constraints, scope, subst: Subst, depth: int, frames, label: str):
        for entry in scope:
            self.explored += 1
            try:
                mty = self.registry.sig_of(entry.path)
            except (UnknownPath, InclusionError):
                continue
            params, result = functor_params(mty)
            self.emit(f"TRY {entry.name} FOR {label}")
            if not params:
                s = subst.copy()
                try:
                    self.match_leaf(entry.path, result, target, constraints, s)
                except (UnifyError, InclusionError) as e:
                    self.emit(f"PRUNE {entry.name} FOR {label}: {reason(e)}")
                    continue
                yield Candidate(entry), s
            else:
                yield from self.expand_functor(
                    entry, params, target, constraints, scope, subst, depth, frames, label
                )

    def match_leaf(self, path: Path, sig, target: Sig, constraints, s: Subst) -> None:
        if not isinstance(sig, Sig):
            raise InclusionError("not a structure")
        for c in constraints:
            lhs = self.registry.expand_member(subpath(path, c.sub), c.member, c.args)
            try:
                unify(lhs, c.rhs, s)
            except UnifyError:
                raise UnifyError(_clash(c, lhs, s)) from None
        self.registry.include(sig, target, s)

    def expand_functor(self, entry, params, target, constraints, scope, subst, depth, frames, label):
        reg = self.registry
        ys = [fresh_ident(x.name) for x, _ in params]
        ren = {PIdent(x): PIdent(y) for (x, _), y in zip(params, ys)}
        psigs = []
        for (x, psig), y in zip(params, ys):
            ps = reroot_modtype(psig, ren, reg.expand)
            reg.add(y, ps)
            psigs.append(ps)
        app = entry.path
        for y in ys:
            app = PApply(app, PIdent(y))
        try:
            result = reg.sig_of(app)
        except (UnknownPath, InclusionError) as e:
            self.emit(f"PRUNE {entry.name} FOR {label}: {reason(e)}")
            return
        if not isinstance(result, Sig):
            self.emit(f"PRUNE {entry.name} FOR {label}: result is a functor")
            return

        # Abstract members of the unknown arguments become fresh variables;
        # the equations they must satisfy become sub-goal constraints.
        subcons = [[] for _ in ys]
        shared = {}
        roots = [PIdent(y) for y in ys]

        def abstracting(skip=None):
            def f(n):
                if not isinstance(n, TMember):
                    return None
                for i, root in enumerate(roots):
                    if i == skip:
                        continue
                    sub = member_subpath(n.path, root)
                    if sub is None:
                        continue
                    key = (i, sub, n.name)
                    if not n.args:
                        if key not in shared:
                            shared[key] = fresh_var()
                            subcons[i].append(Constraint(sub, n.name, (), shared[key]))
                        return shared[key]
                    v = fresh_var()
                    subcons[i].append(Constraint(sub, n.name, n.args, v))
                    return v
                return None
            return f

        result = map_sig(result, abstracting())
        psigs = [map_sig(ps, abstracting(skip=i)) for i, ps in enumerate(psigs)]

        incoming = snapshot(constraints, subst)
        s = subst.copy()
        try:
            for c in constraints:
                lhs = _local_member(reg, result, c)
                try:
                    unify(lhs, c.rhs, s)
                except UnifyError:
                    raise UnifyError(_clash(c, lhs, s)) from None
            reg.include(result, target, s)
        except (UnifyError, InclusionError) as e:
            self.emit(f"PRUNE {entry.name} FOR {label}: {reason(e)}")
            return

        # Only a functor whose result matches is checked for termination:
        # a branch that is pruned anyway cannot make the search diverge.
        for name, snap in reversed(frames):
            if name == entry.name:
                if not decreases(incoming, snap):
                    self.emit(f"PRUNE {entry.name} FOR {label}: termination")
                    raise _Abort(entry.name, snap.shown, incoming.shown)
                break
        if depth + 1 > self.max_depth:
            self.emit(f"PRUNE {entry.name} FOR {label}: depth cap {self.max_depth}")
            raise _Abort(entry.name, {}, incoming.shown, depth_cap=True)

        inner = frames + ((entry.name, incoming),)

        def args_from(i, s, chosen):
            if i == len(ys):
                yield Candidate(entry, tuple(chosen)), s
                return
            sub_label = f"{label}.{i + 1}"
            namer = VarNamer()
            self.emit(
                f"SUBGOAL {sub_label} : {params[i][0].name} : {show_sig_name(psigs[i], namer)} "
                f"{show_constraints([_zonked(c, s) for c in subcons[i]], namer)}"
            )
            for cand, s2 in self.solve(psigs[i], subcons[i], scope, s, depth + 1, inner, sub_label):
                yield from args_from(i + 1, s2, chosen + [cand])

        yield from args_from(0, s, [])


def _zonked(c: Constraint, s: Subst) -> Constraint:
    return Constraint(c.sub, c.member, tuple(s.zonk(a) for a in c.args), s.zonk(c.rhs))


def _local_member(reg: Registry, sig: Sig, c: Constraint):
    if not c.sub:
        if sig.type_item(c.member) is None:
            raise InclusionError(f"missing type {c.member}")
        return expand_manifest(sig, c.member, c.args)
    return reg.expand_member(subpath(sig.self, c.sub), c.member, c.args)


def _clash(c: Constraint, lhs, s: Subst) -> str:
    namer = VarNamer()
    return (f"constraint {c.label} = {show_type(s.zonk(c.rhs), namer)} "
            f"but found {show_type(s.zonk(lhs), namer)}")


def reason(e: Exception) -> str:
    text = str(e)
    if isinstance(e, UnifyError) and text in ("type clash", "rigid member", "constructor clash"):
        return "signature mismatch"
    return text
