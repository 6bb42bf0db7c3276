"""Ticket and CLH locks, and the type-directed ticket-to-CLH translation.

Lock programs are MiniML terms that mention two opaque names, ``ticketnew``
and ``ticketsync``. ``resolve_ticket`` binds them to the ticket lock code,
``translate_locks`` replaces them with the CLH implementation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

from sessrc import miniml as T
from sessrc.syntax import parse_tgt

TICKETNEW_SRC = "fun _ -> (ref 0, ref 0)"
TICKETWAIT_SRC = "rec loop x lk -> let o = !(fst lk) in if x == o then () else loop x lk"
TICKETACQ_SRC = "fun lk -> let n = fai (snd lk) in ticketwait n lk"
TICKETREL_SRC = "fun lk -> (fst lk) := !(fst lk) + 1"

CLHNEW_SRC = "fun _ -> let d = ref false in (ref d, ref d)"
CLHWAIT_SRC = "rec loop me prev lk -> let w = !prev in if w then loop me prev lk else (fst lk) := me"
CLHACQ_SRC = "fun lk -> let me = ref true in let prev = swap (snd lk) me in CLHwait me prev lk"
CLHREL_SRC = "fun lk -> (!(fst lk)) := false"

SYNC_SRC = "fun lk -> fun f -> acq lk; let z = f () in (rel lk; z)"

SURFACE_NAMES = ("ticketnew", "ticketsync")
RAW_NAMES = ("ticketacq", "ticketrel", "ticketwait", "CLHnew", "CLHacq", "CLHrel", "CLHwait")


def _closed(text: str, **deps: T.TgtExpr) -> T.TgtExpr:
    e = T.subst(parse_tgt(text), deps)
    assert not T.free_vars(e), T.free_vars(e)
    return e


@lru_cache(maxsize=None)
def ticketwait() -> T.TgtExpr:
    return _closed(TICKETWAIT_SRC)


@lru_cache(maxsize=None)
def ticketnew() -> T.TgtExpr:
    return _closed(TICKETNEW_SRC)


@lru_cache(maxsize=None)
def ticketacq() -> T.TgtExpr:
    return _closed(TICKETACQ_SRC, ticketwait=ticketwait())


@lru_cache(maxsize=None)
def ticketrel() -> T.TgtExpr:
    return _closed(TICKETREL_SRC)


@lru_cache(maxsize=None)
def clh_wait() -> T.TgtExpr:
    return _closed(CLHWAIT_SRC)


@lru_cache(maxsize=None)
def clh_new() -> T.TgtExpr:
    return _closed(CLHNEW_SRC)


@lru_cache(maxsize=None)
def clh_acq() -> T.TgtExpr:
    return _closed(CLHACQ_SRC, CLHwait=clh_wait())


@lru_cache(maxsize=None)
def clh_rel() -> T.TgtExpr:
    return _closed(CLHREL_SRC)


@lru_cache(maxsize=None)
def ticketsync() -> T.TgtExpr:
    return _closed(SYNC_SRC, acq=ticketacq(), rel=ticketrel())


@lru_cache(maxsize=None)
def clh_sync() -> T.TgtExpr:
    return _closed(SYNC_SRC, acq=clh_acq(), rel=clh_rel())


def ticket_env() -> dict:
    """Every lock operation, ticket flavour, keyed by its surface name."""
    return {
        "ticketnew": ticketnew(), "ticketsync": ticketsync(), "ticketacq": ticketacq(),
        "ticketrel": ticketrel(), "ticketwait": ticketwait(),
    }


def clh_env() -> dict:
    return {
        "CLHnew": clh_new(), "CLHsync": clh_sync(), "CLHacq": clh_acq(),
        "CLHrel": clh_rel(), "CLHwait": clh_wait(),
    }


def resolve_ticket(e: T.TgtExpr) -> T.TgtExpr:
    """Bind free ticket-lock names in ``e`` to their code (the source side)."""
    env = ticket_env()
    return T.subst(e, {k: v for k, v in env.items() if k in T.free_vars(e)})


def naive_clh(e: T.TgtExpr) -> T.TgtExpr:
    """Swap every ticket operation for its CLH namesake, ignoring types.

    Unlike ``translate_locks`` this accepts raw acquire/release calls, which
    is how the diverging counterexample gets a CLH counterpart at all.
    """
    ren = {"ticketnew": "CLHnew", "ticketsync": "CLHsync", "ticketacq": "CLHacq",
           "ticketrel": "CLHrel", "ticketwait": "CLHwait"}
    env = clh_env()
    return T.subst(e, {k: env[v] for k, v in ren.items() if k in T.free_vars(e)})


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class IntT:
    pass


@dataclass(frozen=True)
class BoolT:
    pass


@dataclass(frozen=True)
class UnitT:
    pass


@dataclass(frozen=True)
class LockT:
    pass


@dataclass(frozen=True)
class Prod:
    left: "LockTy"
    right: "LockTy"


@dataclass(frozen=True)
class Sum:
    left: "LockTy"
    right: "LockTy"


@dataclass(frozen=True)
class Arrow:
    arg: "LockTy"
    res: "LockTy"


@dataclass(frozen=True)
class Ref:
    inner: "LockTy"


@dataclass(frozen=True)
class TVar:
    # unification variable; never escapes a finished translation unresolved
    # unless the term is genuinely polymorphic there
    n: int


LockTy = Union[IntT, BoolT, UnitT, LockT, Prod, Sum, Arrow, Ref, TVar]

INT, BOOL, UNIT, LOCK = IntT(), BoolT(), UnitT(), LockT()


def show_lock_ty(t: LockTy, need: int = 0) -> str:
    match t:
        case IntT():
            return "Int"
        case BoolT():
            return "Bool"
        case UnitT():
            return "Unit"
        case LockT():
            return "Lock"
        case TVar(n):
            return f"'t{n}"
        case Ref(a):
            s = f"ref {show_lock_ty(a, 3)}"
            return s if need <= 3 else f"({s})"
        case Prod(a, b):
            s = f"{show_lock_ty(a, 3)} * {show_lock_ty(b, 2)}"
            return s if need <= 2 else f"({s})"
        case Sum(a, b):
            s = f"{show_lock_ty(a, 2)} + {show_lock_ty(b, 1)}"
            return s if need <= 1 else f"({s})"
        case Arrow(a, b):
            s = f"{show_lock_ty(a, 1)} -> {show_lock_ty(b, 0)}"
            return s if need == 0 else f"({s})"
    raise TypeError(t)


class LockTypeError(Exception):
    pass


class RawLockOperation(LockTypeError):
    def __init__(self, name: str):
        super().__init__(f"raw lock operation {name!r} is not part of the translation grammar")
        self.name = name


class _Subst:
    def __init__(self):
        self.binding: dict[int, LockTy] = {}
        self._ids = itertools.count()

    def fresh(self) -> TVar:
        return TVar(next(self._ids))

    def resolve(self, t: LockTy) -> LockTy:
        while isinstance(t, TVar) and t.n in self.binding:
            t = self.binding[t.n]
        return t

    def zonk(self, t: LockTy) -> LockTy:
        t = self.resolve(t)
        match t:
            case Prod(a, b):
                return Prod(self.zonk(a), self.zonk(b))
            case Sum(a, b):
                return Sum(self.zonk(a), self.zonk(b))
            case Arrow(a, b):
                return Arrow(self.zonk(a), self.zonk(b))
            case Ref(a):
                return Ref(self.zonk(a))
        return t

    def _occurs(self, n: int, t: LockTy) -> bool:
        t = self.resolve(t)
        if isinstance(t, TVar):
            return t.n == n
        return any(self._occurs(n, c) for c in getattr(t, "__dict__", {}).values())

    def unify(self, a: LockTy, b: LockTy) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, TVar):
            if self._occurs(a.n, b):
                raise LockTypeError(f"infinite type {show_lock_ty(self.zonk(b))}")
            self.binding[a.n] = b
            return
        if isinstance(b, TVar):
            self.unify(b, a)
            return
        if type(a) is type(b) and isinstance(a, (Prod, Sum, Arrow, Ref)):
            for x, y in zip(a.__dict__.values(), b.__dict__.values()):
                self.unify(x, y)
            return
        raise LockTypeError(
            f"type mismatch: {show_lock_ty(self.zonk(a))} vs {show_lock_ty(self.zonk(b))}"
        )


class _Translator:
    def __init__(self):
        self.s = _Subst()
        self.rules: list[str] = []

    def go(self, ctx: dict, e: T.TgtExpr) -> tuple[T.TgtExpr, LockTy]:
        s = self.s
        match e:
            case T.Var("ticketnew") if "ticketnew" not in ctx:
                self.rules.append("Lock-Intro")
                return clh_new(), Arrow(UNIT, LOCK)
            case T.Var("ticketsync") if "ticketsync" not in ctx:
                raise LockTypeError("ticketsync must be applied to a lock and a thunk")
            case T.Var(x):
                if x in ctx:
                    self.rules.append("Var")
                    return e, ctx[x]
                if x in RAW_NAMES:
                    raise RawLockOperation(x)
                raise LockTypeError(f"unbound variable {x}")
            case T.IntLit():
                self.rules.append("Int")
                return e, INT
            case T.BoolLit():
                self.rules.append("Bool")
                return e, BOOL
            case T.UnitLit():
                self.rules.append("Unit")
                return e, UNIT
            case T.App(T.App(T.Var("ticketsync"), el), ef) if "ticketsync" not in ctx:
                self.rules.append("Lock-Elim")
                el2, tl = self.go(ctx, el)
                s.unify(tl, LOCK)
                ef2, tf = self.go(ctx, ef)
                res = s.fresh()
                s.unify(tf, Arrow(UNIT, res))
                return T.App(T.App(clh_sync(), el2), ef2), res
            case T.Pair(a, b):
                self.rules.append("Pair-Intro")
                a2, ta = self.go(ctx, a)
                b2, tb = self.go(ctx, b)
                return T.Pair(a2, b2), Prod(ta, tb)
            case T.Fst(a) | T.Snd(a):
                self.rules.append("Fst" if isinstance(e, T.Fst) else "Snd")
                a2, ta = self.go(ctx, a)
                l, r = s.fresh(), s.fresh()
                s.unify(ta, Prod(l, r))
                return type(e)(a2), (l if isinstance(e, T.Fst) else r)
            case T.Inl(a) | T.Inr(a):
                self.rules.append("Sum-Left" if isinstance(e, T.Inl) else "Sum-Right")
                a2, ta = self.go(ctx, a)
                other = s.fresh()
                return type(e)(a2), (Sum(ta, other) if isinstance(e, T.Inl) else Sum(other, ta))
            case T.Case(scrut, xl, el, xr, er):
                self.rules.append("Sum-Elim")
                sc2, ts = self.go(ctx, scrut)
                l, r = s.fresh(), s.fresh()
                s.unify(ts, Sum(l, r))
                el2, tl = self.go({**ctx, xl: l}, el)
                er2, tr = self.go({**ctx, xr: r}, er)
                s.unify(tl, tr)
                return T.Case(sc2, xl, el2, xr, er2), tl
            case T.Seq(a, b):
                self.rules.append("Seq")
                a2, _ = self.go(ctx, a)
                b2, tb = self.go(ctx, b)
                return T.Seq(a2, b2), tb
            case T.Lam(x, body):
                self.rules.append("Fun-Intro")
                tx = s.fresh()
                b2, tb = self.go({**ctx, x: tx}, body)
                return T.Lam(x, b2), Arrow(tx, tb)
            case T.Rec(f, x, body):
                self.rules.append("Rec")
                tx, tr = s.fresh(), s.fresh()
                b2, tb = self.go({**ctx, f: Arrow(tx, tr), x: tx}, body)
                s.unify(tb, tr)
                return T.Rec(f, x, b2), Arrow(tx, tr)
            case T.App(fn, arg):
                self.rules.append("Fun-Elim")
                f2, tf = self.go(ctx, fn)
                a2, ta = self.go(ctx, arg)
                res = s.fresh()
                s.unify(tf, Arrow(ta, res))
                return T.App(f2, a2), res
            case T.Fork(child):
                self.rules.append("Fork")
                c2, _ = self.go(ctx, child)
                return T.Fork(c2), UNIT
            case T.Load(a):
                self.rules.append("Load")
                a2, ta = self.go(ctx, a)
                inner = s.fresh()
                s.unify(ta, Ref(inner))
                return T.Load(a2), inner
            case T.Store(a, b):
                self.rules.append("Store")
                a2, ta = self.go(ctx, a)
                b2, tb = self.go(ctx, b)
                s.unify(ta, Ref(tb))
                return T.Store(a2, b2), UNIT
            # rules below are not in the published figure; see the ledger
            case T.Alloc(a):
                self.rules.append("Alloc")
                a2, ta = self.go(ctx, a)
                return T.Alloc(a2), Ref(ta)
            case T.Let(x, bound, body):
                self.rules.append("Let")
                b2, tb = self.go(ctx, bound)
                body2, tbody = self.go({**ctx, x: tb}, body)
                return T.Let(x, b2, body2), tbody
            case T.LetPair(x, y, bound, body):
                self.rules.append("LetPair")
                b2, tb = self.go(ctx, bound)
                l, r = s.fresh(), s.fresh()
                s.unify(tb, Prod(l, r))
                body2, tbody = self.go({**ctx, x: l, y: r}, body)
                return T.LetPair(x, y, b2, body2), tbody
            case T.If(c, a, b):
                self.rules.append("If")
                c2, tc = self.go(ctx, c)
                s.unify(tc, BOOL)
                a2, ta = self.go(ctx, a)
                b2, tb = self.go(ctx, b)
                s.unify(ta, tb)
                return T.If(c2, a2, b2), ta
            case T.BinOp(op, a, b):
                self.rules.append("BinOp")
                a2, ta = self.go(ctx, a)
                b2, tb = self.go(ctx, b)
                s.unify(ta, INT)
                s.unify(tb, INT)
                return T.BinOp(op, a2, b2), (INT if op == "+" else BOOL)
        raise LockTypeError(f"{type(e).__name__} is not part of the lock translation grammar")


@dataclass(frozen=True)
class Translation:
    target: T.TgtExpr
    ty: LockTy
    rules: tuple[str, ...]


def translate(ctx: Optional[dict], e: T.TgtExpr) -> Translation:
    tr = _Translator()
    out, ty = tr.go(dict(ctx or {}), e)
    return Translation(out, tr.s.zonk(ty), tuple(tr.rules))


def translate_locks(ctx: Optional[dict], e: T.TgtExpr) -> tuple[T.TgtExpr, LockTy]:
    """``ctx |- e ~> e' : ty``; raises LockTypeError outside the grammar."""
    t = translate(ctx, e)
    return t.target, t.ty
