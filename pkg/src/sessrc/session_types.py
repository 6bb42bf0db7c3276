"""Session types, ambient types, duality, and the affine type checker."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from sessrc import source as S


class Ty:
    """Base class of ambient types."""


class SessionTy(Ty):
    """Base class of session types (the types of channel end-points)."""


@dataclass(frozen=True)
class IntTy(Ty):
    pass


@dataclass(frozen=True)
class UnitTy(Ty):
    pass


@dataclass(frozen=True)
class Tensor(Ty):
    left: Ty
    right: Ty


@dataclass(frozen=True)
class Lolli(Ty):
    arg: Ty
    res: Ty


@dataclass(frozen=True)
class SendTy(SessionTy):
    payload: Ty
    cont: SessionTy


@dataclass(frozen=True)
class RecvTy(SessionTy):
    payload: Ty
    cont: SessionTy


@dataclass(frozen=True)
class End(SessionTy):
    pass


INT = IntTy()
UNIT = UnitTy()
END = End()


def dual(s: SessionTy) -> SessionTy:
    match s:
        case SendTy(t, k):
            return RecvTy(t, dual(k))
        case RecvTy(t, k):
            return SendTy(t, dual(k))
        case End():
            return END
    raise TypeError(f"not a session type: {s!r}")


def depth(s: SessionTy) -> int:
    n = 0
    while isinstance(s, (SendTy, RecvTy)):
        n += 1
        s = s.cont
    return n


class AdvancePastEnd(ValueError):
    pass


def advance(s: SessionTy, n: int) -> SessionTy:
    """The type of an end-point after ``n`` messages went over it."""
    if n < 0 or n > depth(s):
        raise AdvancePastEnd(f"advance past end: depth {depth(s)}, n = {n}")
    for _ in range(n):
        s = s.cont
    return s


# ---------------------------------------------------------------------------
# errors


class SessionTypeError(Exception):
    def __str__(self):
        return f"{type(self).__name__}({self.detail()})"

    def detail(self) -> str:
        return ""


class VariableReused(SessionTypeError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def detail(self):
        return self.name


class UnboundVariable(SessionTypeError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def detail(self):
        return self.name


class Mismatch(SessionTypeError):
    def __init__(self, expected, got):
        super().__init__(expected, got)
        self.expected = expected
        self.got = got

    def detail(self):
        from sessrc.syntax import show_type

        exp = self.expected if isinstance(self.expected, str) else show_type(self.expected)
        return f"expected {exp}, got {show_type(self.got)}"


class CannotInferSession(SessionTypeError):
    def detail(self):
        return "newch needs an annotation newch[S]"


class CannotInferLambda(SessionTypeError):
    def __init__(self, param: str):
        super().__init__(param)
        self.param = param

    def detail(self):
        return f"annotate the parameter: fun ({self.param} : T) -> ..."


class EndpointLiteral(SessionTypeError):
    def detail(self):
        return "end-point literals are runtime-only"


# ---------------------------------------------------------------------------
# checker

TypeCtx = dict

RULES = ("Var", "Int", "Unit", "Fun-Intro", "Fun-Elim", "Pair-Intro", "Pair-Elim",
         "Fork", "NewChTyp", "Send", "Recv")


@dataclass
class Checker:
    """Bidirectional affine checker.

    Context splitting is realised by returning the set of consumed variables
    from every judgement and requiring sibling subderivations to be disjoint.
    ``rules`` counts rule applications and ``splits`` records each binary split;
    both are only for inspection.
    """

    rules: Counter = field(default_factory=Counter)
    splits: list = field(default_factory=list)

    def _join(self, u1: frozenset, u2: frozenset) -> frozenset:
        clash = u1 & u2
        if clash:
            raise VariableReused(min(clash))
        self.splits.append((u1, u2))
        return u1 | u2

    def infer(self, ctx: TypeCtx, e: S.SrcExpr) -> tuple[Ty, frozenset]:
        match e:
            case S.Var(x):
                if x not in ctx:
                    raise UnboundVariable(x)
                self.rules["Var"] += 1
                return ctx[x], frozenset((x,))
            case S.IntLit():
                self.rules["Int"] += 1
                return INT, frozenset()
            case S.UnitLit():
                self.rules["Unit"] += 1
                return UNIT, frozenset()
            case S.Endpoint():
                raise EndpointLiteral()
            case S.Lam(x, body, ann):
                if ann is None:
                    raise CannotInferLambda(x)
                res, used = self.infer({**ctx, x: ann}, body)
                self.rules["Fun-Intro"] += 1
                return Lolli(ann, res), used - {x}
            case S.App(S.Lam(x, body, None), arg):
                # let-style: the argument's type seeds the parameter
                targ, u1 = self.infer(ctx, arg)
                res, u2 = self.infer({**ctx, x: targ}, body)
                self.rules["Fun-Intro"] += 1
                self.rules["Fun-Elim"] += 1
                return res, self._join(u1, u2 - {x})
            case S.App(f, arg):
                tf, u1 = self.infer(ctx, f)
                if not isinstance(tf, Lolli):
                    raise Mismatch("a function type", tf)
                u2 = self.check(ctx, arg, tf.arg)
                self.rules["Fun-Elim"] += 1
                return tf.res, self._join(u1, u2)
            case S.Pair(a, b):
                ta, u1 = self.infer(ctx, a)
                tb, u2 = self.infer(ctx, b)
                self.rules["Pair-Intro"] += 1
                return Tensor(ta, tb), self._join(u1, u2)
            case S.LetPair(x, y, bound, body):
                tp, u1 = self.infer(ctx, bound)
                if not isinstance(tp, Tensor):
                    raise Mismatch("a pair type", tp)
                res, u2 = self.infer({**ctx, x: tp.left, y: tp.right}, body)
                self.rules["Pair-Elim"] += 1
                return res, self._join(u1, u2 - {x, y})
            case S.Fork(child):
                _, used = self.infer(ctx, child)
                self.rules["Fork"] += 1
                return UNIT, used
            case S.NewCh(ann):
                if ann is None:
                    raise CannotInferSession()
                self.rules["NewChTyp"] += 1
                return Tensor(ann, dual(ann)), frozenset()
            case S.Send(c, p):
                tc, u1 = self.infer(ctx, c)
                if not isinstance(tc, SendTy):
                    raise Mismatch("a send session type !t.S", tc)
                u2 = self.check(ctx, p, tc.payload)
                self.rules["Send"] += 1
                return tc.cont, self._join(u1, u2)
            case S.Recv(c):
                tc, used = self.infer(ctx, c)
                if not isinstance(tc, RecvTy):
                    raise Mismatch("a receive session type ?t.S", tc)
                self.rules["Recv"] += 1
                return Tensor(tc.cont, tc.payload), used
        raise TypeError(f"not a source expression: {e!r}")

    def check(self, ctx: TypeCtx, e: S.SrcExpr, expected: Ty) -> frozenset:
        if isinstance(e, S.Lam) and e.ann is None and isinstance(expected, Lolli):
            used = self.check({**ctx, e.param: expected.arg}, e.body, expected.res)
            self.rules["Fun-Intro"] += 1
            return used - {e.param}
        got, used = self.infer(ctx, e)
        if got != expected:
            raise Mismatch(expected, got)
        return used


def typecheck(ctx: Optional[TypeCtx], e: S.SrcExpr, checker: Optional[Checker] = None):
    """Type ``e`` under ``ctx``; returns ``(type, consumed variables)``."""
    return (checker or Checker()).infer(dict(ctx or {}), e)

