"""The session-typed message-passing source language.

Terms are immutable; a configuration is a thread pool plus a map from channel
ids to their two buffers (left-to-right, right-to-left).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterator, Optional, Union

from frozendict import frozendict

if TYPE_CHECKING:
    from sessrc.session_types import SessionTy, Ty


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    def flip(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class IntLit:
    n: int


@dataclass(frozen=True)
class UnitLit:
    pass


@dataclass(frozen=True)
class Endpoint:
    chan: int
    side: Side


@dataclass(frozen=True)
class Lam:
    param: str
    body: "SrcExpr"
    ann: Optional["Ty"] = None


@dataclass(frozen=True)
class App:
    fn: "SrcExpr"
    arg: "SrcExpr"


@dataclass(frozen=True)
class Pair:
    fst: "SrcExpr"
    snd: "SrcExpr"


@dataclass(frozen=True)
class LetPair:
    x: str
    y: str
    bound: "SrcExpr"
    body: "SrcExpr"


@dataclass(frozen=True)
class Fork:
    child: "SrcExpr"


@dataclass(frozen=True)
class NewCh:
    ann: Optional["SessionTy"] = None


@dataclass(frozen=True)
class Send:
    chan: "SrcExpr"
    payload: "SrcExpr"


@dataclass(frozen=True)
class Recv:
    chan: "SrcExpr"


SrcExpr = Union[Var, IntLit, UnitLit, Endpoint, Lam, App, Pair, LetPair, Fork, NewCh, Send, Recv]

# channel id -> (buffer left-to-right, buffer right-to-left)
ChanState = frozendict
EMPTY_STATE: ChanState = frozendict()

UNIT = UnitLit()
WILDCARD = "_"


def seq_fork(child: SrcExpr, rest: SrcExpr) -> SrcExpr:
    """``fork child; rest`` as the core term ``(fun _ -> rest) (fork child)``."""
    return App(Lam(WILDCARD, rest), Fork(child))


def let(x: str, bound: SrcExpr, body: SrcExpr) -> SrcExpr:
    return App(Lam(x, body), bound)


@dataclass(frozen=True)
class SrcConfig:
    threads: tuple
    state: ChanState = EMPTY_STATE

    @classmethod
    def initial(cls, e: SrcExpr) -> "SrcConfig":
        return cls((e,), EMPTY_STATE)


@dataclass(frozen=True)
class SrcStepOutcome:
    next: SrcExpr
    state: ChanState
    forked: Optional[SrcExpr] = None


# ---------------------------------------------------------------------------
# values, free variables, substitution


def is_value(e: SrcExpr) -> bool:
    if isinstance(e, (IntLit, UnitLit, Endpoint, Lam)):
        return True
    if isinstance(e, Pair):
        return is_value(e.fst) and is_value(e.snd)
    return False


def free_vars(e: SrcExpr) -> frozenset:
    match e:
        case Var(name):
            return frozenset((name,))
        case Lam(x, body, _):
            return free_vars(body) - {x}
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Pair(a, b):
            return free_vars(a) | free_vars(b)
        case LetPair(x, y, bound, body):
            return free_vars(bound) | (free_vars(body) - {x, y})
        case Fork(c) | Recv(c):
            return free_vars(c)
        case Send(c, p):
            return free_vars(c) | free_vars(p)
        case _:
            return frozenset()


def _fresh(base: str, avoid: set, counter: Iterator[int]) -> str:
    while True:
        name = f"{base}_{next(counter)}"
        if name not in avoid:
            avoid.add(name)
            return name


def subst(e: SrcExpr, mapping: dict) -> SrcExpr:
    """Simultaneous capture-avoiding substitution of ``mapping`` into ``e``.

    Bound variables are renamed only when they would capture a free variable
    of a substituted term, so closed programs never see renaming.
    """
    if not mapping:
        return e
    danger = set()
    for v in mapping.values():
        danger |= free_vars(v)
    counter = itertools.count(1)

    def binders(names, bodies, m):
        # returns renamed binder names, rewritten bodies
        m = {k: v for k, v in m.items() if k not in names}
        if not m:
            return names, bodies
        if not danger & set(names):
            return names, [go(b, m) for b in bodies]
        body_fv = set().union(*(free_vars(b) for b in bodies))
        # names that substitution would actually carry under these binders
        incoming = set().union(*(free_vars(m[k]) for k in body_fv if k in m))
        out_names = []
        renaming = {}
        for x in names:
            if x in incoming:
                avoid = danger | body_fv | set(m) | set(names)
                x2 = _fresh(x, avoid, counter)
                renaming[x] = Var(x2)
                out_names.append(x2)
            else:
                out_names.append(x)
        if renaming:
            bodies = [subst(b, renaming) for b in bodies]
        return out_names, [go(b, m) for b in bodies]

    def go(e, m):
        match e:
            case Var(name):
                return m.get(name, e)
            case Lam(x, body, ann):
                (x2,), (b2,) = binders([x], [body], m)
                return Lam(x2, b2, ann)
            case App(f, a):
                return App(go(f, m), go(a, m))
            case Pair(a, b):
                return Pair(go(a, m), go(b, m))
            case LetPair(x, y, bound, body):
                (x2, y2), (b2,) = binders([x, y], [body], m)
                return LetPair(x2, y2, go(bound, m), b2)
            case Fork(c):
                return Fork(go(c, m))
            case Send(c, p):
                return Send(go(c, m), go(p, m))
            case Recv(c):
                return Recv(go(c, m))
            case _:
                return e

    return go(e, mapping)


# ---------------------------------------------------------------------------
# evaluation contexts

# path label -> (node class, field name); order within a node is evaluation order
_EVAL_FIELDS = {
    App: (("app-fn", "fn"), ("app-arg", "arg")),
    Pair: (("pair-fst", "fst"), ("pair-snd", "snd")),
    Send: (("send-chan", "chan"), ("send-payload", "payload")),
    Recv: (("recv-chan", "chan"),),
    LetPair: (("letpair-bound", "bound"),),
}
_LABEL_FIELD = {label: name for fields in _EVAL_FIELDS.values() for label, name in fields}


def decompose(e: SrcExpr) -> Optional[tuple[tuple[str, ...], SrcExpr]]:
    """Split ``e`` into an evaluation-context path and the expression in the hole.

    The hole holds the leftmost-innermost non-value whose evaluation positions
    are all values. Returns None for values.
    """
    if is_value(e):
        return None
    path = []
    while True:
        for label, name in _EVAL_FIELDS.get(type(e), ()):
            child = getattr(e, name)
            if not is_value(child):
                path.append(label)
                e = child
                break
        else:
            return tuple(path), e


def plug(e: SrcExpr, path: tuple[str, ...], filler: SrcExpr) -> SrcExpr:
    if not path:
        return filler
    name = _LABEL_FIELD[path[0]]
    return replace(e, **{name: plug(getattr(e, name), path[1:], filler)})


def _min_free(keys) -> int:
    c = 0
    while c in keys:
        c += 1
    return c


def _reduce(r: SrcExpr, state: ChanState) -> Optional[SrcStepOutcome]:
    match r:
        case App(Lam(x, body, _), arg):
            return SrcStepOutcome(subst(body, {x: arg}), state)
        case LetPair(x, y, Pair(a, b), body):
            return SrcStepOutcome(subst(body, {x: a, y: b}), state)
        case Fork(child):
            return SrcStepOutcome(UNIT, state, child)
        case NewCh():
            c = _min_free(state)
            return SrcStepOutcome(
                Pair(Endpoint(c, Side.LEFT), Endpoint(c, Side.RIGHT)),
                state.set(c, ((), ())),
            )
        case Send(Endpoint(c, side) as ep, v) if c in state:
            lr, rl = state[c]
            bufs = (lr + (v,), rl) if side is Side.LEFT else (lr, rl + (v,))
            return SrcStepOutcome(ep, state.set(c, bufs))
        case Recv(Endpoint(c, side) as ep) if c in state:
            lr, rl = state[c]
            incoming = lr if side is Side.RIGHT else rl
            if not incoming:
                return SrcStepOutcome(r, state)
            head, rest = incoming[0], incoming[1:]
            bufs = (rest, rl) if side is Side.RIGHT else (lr, rest)
            return SrcStepOutcome(Pair(ep, head), state.set(c, bufs))
    return None


def step_thread(e: SrcExpr, state: ChanState) -> Optional[SrcStepOutcome]:
    d = decompose(e)
    if d is None:
        return None
    path, redex = d
    out = _reduce(redex, state)
    if out is None:
        return None
    return replace(out, next=plug(e, path, out.next))


def is_stuck(e: SrcExpr, state: ChanState) -> bool:
    return not is_value(e) and step_thread(e, state) is None


def step_pool(cfg: SrcConfig, i: int) -> Optional[SrcConfig]:
    if not 0 <= i < len(cfg.threads):
        raise IndexError(f"thread index {i} out of range for {len(cfg.threads)} threads")
    out = step_thread(cfg.threads[i], cfg.state)
    if out is None:
        return None
    threads = cfg.threads[:i] + (out.next,) + cfg.threads[i + 1:]
    if out.forked is not None:
        threads += (out.forked,)
    return SrcConfig(threads, out.state)


def successors(cfg: SrcConfig) -> list[tuple[int, SrcConfig]]:
    result = []
    for i in range(len(cfg.threads)):
        nxt = step_pool(cfg, i)
        if nxt is not None:
            result.append((i, nxt))
    return result


def has_endpoints(e: SrcExpr) -> bool:
    return any(True for _ in endpoint_ids(e))


# ---------------------------------------------------------------------------
# channel-id traversal, used by canonicalization


def endpoint_ids(e: SrcExpr) -> Iterator[int]:
    """Channel ids occurring in ``e``, in pre-order."""
    match e:
        case Endpoint(c, _):
            yield c
        case Lam(_, body, _):
            yield from endpoint_ids(body)
        case App(a, b) | Pair(a, b) | Send(a, b):
            yield from endpoint_ids(a)
            yield from endpoint_ids(b)
        case LetPair(_, _, a, b):
            yield from endpoint_ids(a)
            yield from endpoint_ids(b)
        case Fork(a) | Recv(a):
            yield from endpoint_ids(a)


def rename_channels(e: SrcExpr, ren: dict) -> SrcExpr:
    match e:
        case Endpoint(c, side):
            return Endpoint(ren.get(c, c), side)
        case Lam(x, body, ann):
            return Lam(x, rename_channels(body, ren), ann)
        case App(a, b):
            return App(rename_channels(a, ren), rename_channels(b, ren))
        case Pair(a, b):
            return Pair(rename_channels(a, ren), rename_channels(b, ren))
        case Send(a, b):
            return Send(rename_channels(a, ren), rename_channels(b, ren))
        case LetPair(x, y, a, b):
            return LetPair(x, y, rename_channels(a, ren), rename_channels(b, ren))
        case Fork(a):
            return Fork(rename_channels(a, ren))
        case Recv(a):
            return Recv(rename_channels(a, ren))
    return e


def cell_values(entry) -> Iterator[SrcExpr]:
    lr, rl = entry
    yield from lr
    yield from rl


def rename_cell(entry, ren: dict):
    lr, rl = entry
    return (
        tuple(rename_channels(v, ren) for v in lr),
        tuple(rename_channels(v, ren) for v in rl),
    )
