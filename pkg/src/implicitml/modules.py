"""Module registry: signatures of paths, alias normalization, functor
application and structural signature inclusion."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .types import (
    FunctorSig, ModItem, ModType, PApply, PDot, PIdent, Path, Scheme, Sig, Subst,
    TMember, TypeItem, UnifyError, ValItem, expand_manifest, fresh_rigid, instantiate,
    path_str, replace_path, reroot_modtype, show_type, substitute_vars, unify, VarNamer,
)

ALIAS_DEPTH_LIMIT = 256


class UnknownPath(Exception):
    pass


class AliasCycle(Exception):
    def __init__(self, path):
        super().__init__(f"alias cycle through {path_str(path)}")
        self.path = path


class InclusionError(Exception):
    pass


@dataclass
class ModInfo:
    mty: ModType
    alias: Optional[Path] = None


class Registry:
    def __init__(self):
        self.mods: dict = {}
        self._cache: dict = {}

    def add(self, ident, mty: ModType, alias: Optional[Path] = None) -> None:
        self.mods[ident] = ModInfo(mty, alias)

    def knows(self, p: Path) -> bool:
        try:
            self.sig_of(p)
            return True
        except (UnknownPath, InclusionError):
            return False

    # ------------------------------------------------------------ aliases

    def normalize(self, p: Path, _depth: int = 0) -> Path:
        """Expand alias heads, alias items and alias functors to a fixpoint."""
        if _depth > ALIAS_DEPTH_LIMIT:
            raise AliasCycle(p)
        d = _depth + 1
        if isinstance(p, PIdent):
            info = self.mods.get(p.ident)
            if info is not None and info.alias is not None:
                return self.normalize(info.alias, d)
            return p
        if isinstance(p, PDot):
            parent = self.normalize(p.parent, d)
            try:
                psig = self._sig_of_normal(parent)
            except UnknownPath:
                return PDot(parent, p.name)
            item = psig.mod_item(p.name) if isinstance(psig, Sig) else None
            if item is not None and item.alias is not None:
                return self.normalize(item.alias, d)
            return PDot(parent, p.name)
        fn = self.normalize(p.fn, d)
        arg = self.normalize(p.arg, d)
        try:
            fs = self._sig_of_normal(fn)
        except UnknownPath:
            return PApply(fn, arg)
        if isinstance(fs, FunctorSig) and fs.alias is not None:
            return self.normalize(replace_path(fs.alias, {PIdent(fs.param): arg}), d)
        return PApply(fn, arg)

    # ------------------------------------------------------------ signatures

    def sig_of(self, p: Path) -> ModType:
        return self._sig_of_normal(self.normalize(p))

    def _sig_of_normal(self, p: Path) -> ModType:
        if p in self._cache:
            return self._cache[p]
        if isinstance(p, PIdent):
            info = self.mods.get(p.ident)
            if info is None:
                raise UnknownPath(path_str(p))
            result = info.mty
        elif isinstance(p, PDot):
            parent = self._sig_of_normal(p.parent)
            item = parent.mod_item(p.name) if isinstance(parent, Sig) else None
            if item is None:
                raise UnknownPath(path_str(p))
            if item.alias is not None:
                return self.sig_of(item.alias)
            result = item.mty
            if isinstance(result, Sig):
                result = reroot_modtype(result, {result.self: p})
        else:
            fs = self._sig_of_normal(p.fn)
            if not isinstance(fs, FunctorSig):
                raise InclusionError(f"{path_str(p.fn)} is not a functor")
            result = self.apply_functor(fs, p.arg, p)
        self._cache[p] = result
        return result

    def apply_functor(self, fs: FunctorSig, arg: Path, self_path: Optional[Path] = None) -> ModType:
        result = reroot_modtype(fs.result, {PIdent(fs.param): arg}, self.expand)
        if isinstance(result, Sig) and self_path is not None:
            result = reroot_modtype(result, {result.self: self_path})
        return result

    def apply_functor_param(self, fs: FunctorSig, arg: Path) -> Sig:
        """The parameter signature of `fs` as seen by the argument `arg`."""
        return reroot_modtype(fs.param_sig, {PIdent(fs.param): arg}, self.expand)

    def expand(self, m: TMember):
        return self.expand_member(m.path, m.name, m.args)

    def expand_member(self, p: Path, name: str, args: tuple):
        """`args p.name` with the manifest unfolded when one is known."""
        try:
            np = self.normalize(p)
            s = self._sig_of_normal(np)
        except (UnknownPath, InclusionError):
            return TMember(p, name, tuple(args))
        if not isinstance(s, Sig) or s.type_item(name) is None:
            return TMember(np, name, tuple(args))
        return expand_manifest(s, name, tuple(args))

    # ------------------------------------------------------------ inclusion

    def include(self, cand: ModType, target: ModType, subst: Subst) -> None:
        """Check that `cand` matches `target`, extending `subst`.

        Raises InclusionError with a short reason on failure."""
        if isinstance(cand, Sig) and isinstance(target, Sig):
            return self._include_sig(cand, target, subst)
        if isinstance(cand, FunctorSig) and isinstance(target, FunctorSig):
            p = PIdent(target.param)
            self.add(target.param, target.param_sig)
            cparam = reroot_modtype(cand.param_sig, {PIdent(cand.param): p}, self.expand)
            self.include(target.param_sig, cparam, subst)
            cres = reroot_modtype(cand.result, {PIdent(cand.param): p}, self.expand)
            return self.include(cres, target.result, subst)
        kinds = {Sig: "a structure", FunctorSig: "a functor"}
        raise InclusionError(f"expected {kinds[type(target)]} but found {kinds[type(cand)]}")

    def _include_sig(self, cand: Sig, target: Sig, subst: Subst) -> None:
        c = cand.self

        def local_expand(m: TMember):
            if m.path == c and cand.type_item(m.name) is not None:
                return expand_manifest(cand, m.name, m.args)
            return self.expand(m)

        tgt = reroot_modtype(target, {target.self: c}, local_expand) if target.self != c else target
        for item in tgt.items:
            if isinstance(item, TypeItem):
                have = cand.type_item(item.name)
                if have is None:
                    raise InclusionError(f"missing type {item.name}")
                if len(have.params) != len(item.params):
                    raise InclusionError(
                        f"type {item.name} expects {len(item.params)} parameter(s) "
                        f"but has {len(have.params)}"
                    )
                if item.manifest is not None:
                    rig = tuple(fresh_rigid() for _ in item.params)
                    mine = expand_manifest(cand, item.name, rig)
                    want = substitute_vars(item.manifest, dict(zip(item.params, rig)))
                    try:
                        unify(mine, want, subst)
                    except UnifyError:
                        n = VarNamer()
                        raise InclusionError(
                            f"type {item.name} is {show_type(subst.zonk(mine), n)}, "
                            f"not {show_type(subst.zonk(want), n)}"
                        ) from None
            elif isinstance(item, ValItem):
                have = cand.val_item(item.name)
                if have is None:
                    raise InclusionError(f"missing value {item.name}")
                rig = {q: fresh_rigid() for q in item.scheme.quantified}
                want = substitute_vars(item.scheme.body, rig)
                mine = instantiate(have.scheme)
                try:
                    unify(mine, want, subst)
                except UnifyError:
                    n = VarNamer()
                    raise InclusionError(
                        f"value {item.name} has type {show_type(subst.zonk(mine), n)}, "
                        f"expected {show_type(subst.zonk(want), n)}"
                    ) from None
            else:
                have = cand.mod_item(item.name)
                if have is None:
                    raise InclusionError(f"missing module {item.name}")
                sub_path = PDot(c, item.name)
                if isinstance(have.mty, Sig):
                    sub = have.mty if have.alias is not None else reroot_modtype(have.mty, {have.mty.self: sub_path})
                elif have.alias is not None:
                    sub = self.sig_of(have.alias)
                else:
                    sub = have.mty
                if item.alias is not None:
                    mine = self.normalize(have.alias or sub_path)
                    if mine != self.normalize(item.alias):
                        raise InclusionError(f"module {item.name} is not an alias of {path_str(item.alias)}")
                    continue
                try:
                    self.include(sub, item.mty, subst)
                except InclusionError as e:
                    raise InclusionError(f"in module {item.name}: {e}") from None

