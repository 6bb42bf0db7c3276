"""Translation of source programs to MiniML.

Every channel becomes a singly linked list of ``some (next, message)`` cells;
an end-point is the location of the list cell it will read or write next.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from sessrc import miniml as T
from sessrc import source as S
from sessrc.syntax import parse_tgt

HEAP_NEWCH_SRC = "fun _ -> let l = ref none in (l, l)"
HEAP_SEND_SRC = (
    "fun lv -> let (l', v') = lv in "
    "let l_new = ref none in "
    "l' := some (l_new, v'); l_new"
)
HEAP_RECV_SRC = "rec f l -> match !l with none -> f l | some node -> node"

PRIMITIVE_NAMES = ("heapNewch", "heapSend", "heapRecv")


@lru_cache(maxsize=None)
def heap_newch() -> T.TgtExpr:
    return parse_tgt(HEAP_NEWCH_SRC)


@lru_cache(maxsize=None)
def heap_send() -> T.TgtExpr:
    return parse_tgt(HEAP_SEND_SRC)


@lru_cache(maxsize=None)
def heap_recv() -> T.TgtExpr:
    return parse_tgt(HEAP_RECV_SRC)


def primitives() -> dict:
    return {"heapNewch": heap_newch(), "heapSend": heap_send(), "heapRecv": heap_recv()}


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class CompiledProgram:
    target: T.TgtExpr
    source_ref: S.SrcExpr


def compile_expr(e: S.SrcExpr) -> T.TgtExpr:
    """Replace the message-passing primitives; homomorphic on everything else.

    ``newch[S]`` annotations and lambda parameter annotations are erased.
    """
    match e:
        case S.Var(x):
            return T.Var(x)
        case S.IntLit(n):
            return T.IntLit(n)
        case S.UnitLit():
            return T.UNIT
        case S.Endpoint():
            raise CompileError("end-point literals cannot be compiled")
        case S.Lam(x, body, _):
            return T.Lam(x, compile_expr(body))
        case S.App(f, a):
            return T.App(compile_expr(f), compile_expr(a))
        case S.Pair(a, b):
            return T.Pair(compile_expr(a), compile_expr(b))
        case S.LetPair(x, y, bound, body):
            return T.LetPair(x, y, compile_expr(bound), compile_expr(body))
        case S.Fork(child):
            return T.Fork(compile_expr(child))
        case S.NewCh():
            return T.App(heap_newch(), T.UNIT)
        case S.Send(c, p):
            return T.App(heap_send(), T.Pair(compile_expr(c), compile_expr(p)))
        case S.Recv(c):
            return T.App(heap_recv(), compile_expr(c))
    raise CompileError(f"not a source expression: {e!r}")


def compile_program(e: S.SrcExpr) -> CompiledProgram:
    return CompiledProgram(compile_expr(e), e)


def is_primitive_free(e) -> bool:
    """True if no source-only constructor (newch, send, recv, end-point)
    occurs anywhere in ``e``."""
    if isinstance(e, (S.NewCh, S.Send, S.Recv, S.Endpoint)):
        return False
    if not isinstance(e, T.NODE_TYPES):
        return False
    return all(is_primitive_free(c) for _, c in T.children(e))


def resolve_primitives(e: T.TgtExpr) -> T.TgtExpr:
    """Bind free occurrences of ``heapNewch``/``heapSend``/``heapRecv`` in a
    hand-written MiniML program to their implementations."""
    wanted = {k: v for k, v in primitives().items() if k in T.free_vars(e)}
    return T.subst(e, wanted)
