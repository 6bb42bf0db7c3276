"""MiniML: a call-by-value functional language with a heap and ``fork``.

Evaluation is left-to-right. ``alloc`` picks the least free location, and
``load``/``store``/``fai``/``swap`` are each a single atomic step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, fields, replace
from typing import Iterator, Optional, Union

from frozendict import frozendict


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class IntLit:
    n: int


@dataclass(frozen=True)
class BoolLit:
    b: bool


@dataclass(frozen=True)
class UnitLit:
    pass


@dataclass(frozen=True)
class Loc:
    l: int


@dataclass(frozen=True)
class Lam:
    param: str
    body: "TgtExpr"


@dataclass(frozen=True)
class Rec:
    fname: str
    param: str
    body: "TgtExpr"


@dataclass(frozen=True)
class App:
    fn: "TgtExpr"
    arg: "TgtExpr"


@dataclass(frozen=True)
class Pair:
    fst: "TgtExpr"
    snd: "TgtExpr"


@dataclass(frozen=True)
class Fst:
    e: "TgtExpr"


@dataclass(frozen=True)
class Snd:
    e: "TgtExpr"


@dataclass(frozen=True)
class LetPair:
    x: str
    y: str
    bound: "TgtExpr"
    body: "TgtExpr"


@dataclass(frozen=True)
class Let:
    x: str
    bound: "TgtExpr"
    body: "TgtExpr"


@dataclass(frozen=True)
class Seq:
    first: "TgtExpr"
    then: "TgtExpr"


@dataclass(frozen=True)
class If:
    cond: "TgtExpr"
    then: "TgtExpr"
    orelse: "TgtExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" or "=="
    left: "TgtExpr"
    right: "TgtExpr"


@dataclass(frozen=True)
class Inl:
    e: "TgtExpr"


@dataclass(frozen=True)
class Inr:
    e: "TgtExpr"


@dataclass(frozen=True)
class Case:
    scrut: "TgtExpr"
    xl: str
    el: "TgtExpr"
    xr: str
    er: "TgtExpr"


@dataclass(frozen=True)
class NoneLit:
    pass


@dataclass(frozen=True)
class SomeOf:
    e: "TgtExpr"


@dataclass(frozen=True)
class MatchOpt:
    scrut: "TgtExpr"
    if_none: "TgtExpr"
    x: str
    if_some: "TgtExpr"


@dataclass(frozen=True)
class Alloc:
    e: "TgtExpr"


@dataclass(frozen=True)
class Load:
    e: "TgtExpr"


@dataclass(frozen=True)
class Store:
    target: "TgtExpr"
    value: "TgtExpr"


@dataclass(frozen=True)
class Fai:
    e: "TgtExpr"


@dataclass(frozen=True)
class Swap:
    target: "TgtExpr"
    value: "TgtExpr"


@dataclass(frozen=True)
class Fork:
    child: "TgtExpr"


TgtExpr = Union[
    Var, IntLit, BoolLit, UnitLit, Loc, Lam, Rec, App, Pair, Fst, Snd, LetPair, Let, Seq,
    If, BinOp, Inl, Inr, Case, NoneLit, SomeOf, MatchOpt, Alloc, Load, Store, Fai, Swap, Fork,
]

NODE_TYPES = TgtExpr.__args__

Heap = frozendict
EMPTY_HEAP: Heap = frozendict()
UNIT = UnitLit()
WILDCARD = "_"

# node class -> ((binder field, ...), scoped-subterm field) for every binding site
_BINDERS = {
    Lam: ((("param",), "body"),),
    Rec: ((("fname", "param"), "body"),),
    LetPair: ((("x", "y"), "body"),),
    Let: ((("x",), "body"),),
    Case: ((("xl",), "el"), (("xr",), "er")),
    MatchOpt: ((("x",), "if_some"),),
}

# evaluation positions, in evaluation order
_EVAL_FIELDS = {
    App: ("fn", "arg"),
    Pair: ("fst", "snd"),
    Fst: ("e",),
    Snd: ("e",),
    LetPair: ("bound",),
    Let: ("bound",),
    Seq: ("first",),
    If: ("cond",),
    BinOp: ("left", "right"),
    Inl: ("e",),
    Inr: ("e",),
    SomeOf: ("e",),
    Case: ("scrut",),
    MatchOpt: ("scrut",),
    Alloc: ("e",),
    Load: ("e",),
    Store: ("target", "value"),
    Fai: ("e",),
    Swap: ("target", "value"),
}


def children(e) -> Iterator[tuple[str, "TgtExpr"]]:
    for f in fields(e):
        v = getattr(e, f.name)
        if not isinstance(v, (str, int, bool)):
            yield f.name, v


@dataclass(frozen=True)
class TgtConfig:
    threads: tuple
    heap: Heap = EMPTY_HEAP

    @property
    def state(self) -> Heap:
        return self.heap

    @classmethod
    def initial(cls, e: TgtExpr) -> "TgtConfig":
        return cls((e,), EMPTY_HEAP)


@dataclass(frozen=True)
class TgtStepOutcome:
    next: TgtExpr
    heap: Heap
    forked: Optional[TgtExpr] = None


def is_value(e: TgtExpr) -> bool:
    if isinstance(e, (IntLit, BoolLit, UnitLit, Loc, Lam, Rec, NoneLit)):
        return True
    if isinstance(e, Pair):
        return is_value(e.fst) and is_value(e.snd)
    if isinstance(e, (SomeOf, Inl, Inr)):
        return is_value(e.e)
    return False


def free_vars(e: TgtExpr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    scoped = {}
    for names, sub in _BINDERS.get(type(e), ()):
        scoped[sub] = names
    out = set()
    for name, child in children(e):
        fv = free_vars(child)
        if name in scoped:
            fv = fv - {getattr(e, b) for b in scoped[name]}
        out |= fv
    return frozenset(out)


def subst(e: TgtExpr, mapping: dict) -> TgtExpr:
    """Simultaneous capture-avoiding substitution (see ``source.subst``)."""
    if not mapping:
        return e
    danger = set()
    for v in mapping.values():
        danger |= free_vars(v)
    counter = itertools.count(1)

    def go(e, m):
        if isinstance(e, Var):
            return m.get(e.name, e)
        if not m:
            return e
        scoped = {sub: names for names, sub in _BINDERS.get(type(e), ())}
        if not scoped and not any(True for _ in children(e)):
            return e
        changes = {}
        for name, child in children(e):
            if name not in scoped:
                changes[name] = go(child, m)
                continue
            binder_fields = scoped[name]
            bound = [getattr(e, b) for b in binder_fields]
            inner = {k: v for k, v in m.items() if k not in bound}
            if not inner:
                changes[name] = child
                continue
            renaming = {}
            incoming = set()
            if danger & set(bound):
                child_fv = free_vars(child)
                incoming = set().union(*(free_vars(inner[k]) for k in child_fv if k in inner))
            for bf, x in zip(binder_fields, bound):
                if x in incoming:
                    avoid = danger | child_fv | set(inner) | set(bound)
                    while True:
                        x2 = f"{x}_{next(counter)}"
                        if x2 not in avoid:
                            break
                    renaming[x] = Var(x2)
                    changes[bf] = x2
            if renaming:
                child = subst(child, renaming)
            changes[name] = go(child, inner)
        return replace(e, **changes)

    return go(e, mapping)


def decompose(e: TgtExpr) -> Optional[tuple[tuple[str, ...], TgtExpr]]:
    """Evaluation-context path (field names) and the expression in the hole."""
    if is_value(e):
        return None
    path = []
    while True:
        for name in _EVAL_FIELDS.get(type(e), ()):
            child = getattr(e, name)
            if not is_value(child):
                path.append(name)
                e = child
                break
        else:
            return tuple(path), e


def plug(e: TgtExpr, path: tuple[str, ...], filler: TgtExpr) -> TgtExpr:
    if not path:
        return filler
    return replace(e, **{path[0]: plug(getattr(e, path[0]), path[1:], filler)})


def _min_free(keys) -> int:
    c = 0
    while c in keys:
        c += 1
    return c


def _reduce(r: TgtExpr, h: Heap) -> Optional[TgtStepOutcome]:
    match r:
        case App(Lam(x, body), v):
            return TgtStepOutcome(subst(body, {x: v}), h)
        case App(Rec(f, x, body) as fn, v):
            m = {f: fn}
            m[x] = v
            return TgtStepOutcome(subst(body, m), h)
        case Fst(Pair(a, _)):
            return TgtStepOutcome(a, h)
        case Snd(Pair(_, b)):
            return TgtStepOutcome(b, h)
        case LetPair(x, y, Pair(a, b), body):
            m = {x: a}
            m[y] = b
            return TgtStepOutcome(subst(body, m), h)
        case Let(x, v, body):
            return TgtStepOutcome(subst(body, {x: v}), h)
        case Seq(_, then):
            return TgtStepOutcome(then, h)
        case If(BoolLit(b), then, orelse):
            return TgtStepOutcome(then if b else orelse, h)
        case BinOp("+", IntLit(a), IntLit(b)):
            return TgtStepOutcome(IntLit(a + b), h)
        case BinOp("==", IntLit(a), IntLit(b)):
            return TgtStepOutcome(BoolLit(a == b), h)
        case Case(Inl(v), xl, el, _, _):
            return TgtStepOutcome(subst(el, {xl: v}), h)
        case Case(Inr(v), _, _, xr, er):
            return TgtStepOutcome(subst(er, {xr: v}), h)
        case MatchOpt(NoneLit(), if_none, _, _):
            return TgtStepOutcome(if_none, h)
        case MatchOpt(SomeOf(v), _, x, if_some):
            return TgtStepOutcome(subst(if_some, {x: v}), h)
        case Alloc(v):
            loc = _min_free(h)
            return TgtStepOutcome(Loc(loc), h.set(loc, v))
        case Load(Loc(l)) if l in h:
            return TgtStepOutcome(h[l], h)
        case Store(Loc(l), v) if l in h:
            return TgtStepOutcome(UNIT, h.set(l, v))
        case Fai(Loc(l)) if l in h and isinstance(h[l], IntLit):
            return TgtStepOutcome(h[l], h.set(l, IntLit(h[l].n + 1)))
        case Swap(Loc(l), v) if l in h:
            return TgtStepOutcome(h[l], h.set(l, v))
        case Fork(child):
            return TgtStepOutcome(UNIT, h, child)
    return None


def step_thread(e: TgtExpr, h: Heap) -> Optional[TgtStepOutcome]:
    d = decompose(e)
    if d is None:
        return None
    path, redex = d
    out = _reduce(redex, h)
    if out is None:
        return None
    return replace(out, next=plug(e, path, out.next))


def is_stuck(e: TgtExpr, h: Heap) -> bool:
    return not is_value(e) and step_thread(e, h) is None


def step_pool(cfg: TgtConfig, i: int) -> Optional[TgtConfig]:
    if not 0 <= i < len(cfg.threads):
        raise IndexError(f"thread index {i} out of range for {len(cfg.threads)} threads")
    out = step_thread(cfg.threads[i], cfg.heap)
    if out is None:
        return None
    threads = cfg.threads[:i] + (out.next,) + cfg.threads[i + 1:]
    if out.forked is not None:
        threads += (out.forked,)
    return TgtConfig(threads, out.heap)


def successors(cfg: TgtConfig) -> list[tuple[int, TgtConfig]]:
    result = []
    for i in range(len(cfg.threads)):
        nxt = step_pool(cfg, i)
        if nxt is not None:
            result.append((i, nxt))
    return result


# ---------------------------------------------------------------------------
# location traversal, used by canonicalization


def locations(e: TgtExpr) -> Iterator[int]:
    """Heap locations occurring in ``e``, in pre-order."""
    if isinstance(e, Loc):
        yield e.l
        return
    for _, child in children(e):
        yield from locations(child)


def rename_locations(e: TgtExpr, ren: dict) -> TgtExpr:
    if isinstance(e, Loc):
        return Loc(ren.get(e.l, e.l))
    kids = list(children(e))
    if not kids:
        return e
    return replace(e, **{name: rename_locations(c, ren) for name, c in kids})


def cell_values(v) -> Iterator[TgtExpr]:
    yield v


def rename_cell(v, ren: dict):
    return rename_locations(v, ren)


def mentions(e: TgtExpr, cls) -> bool:
    """Whether any subterm of ``e`` is an instance of ``cls``."""
    if isinstance(e, cls):
        return True
    return any(mentions(c, cls) for _, c in children(e))
