import pytest
from frozendict import frozendict
from hypothesis import given, settings, strategies as st

from sessrc import miniml as T
from sessrc.miniml import (
    Alloc, App, BinOp, BoolLit, Case, Fai, Fork, Inl, Inr, IntLit, Lam, Let, LetPair, Load, Loc,
    MatchOpt, NoneLit, Pair, Rec, Seq, SomeOf, Store, Swap, TgtConfig, UNIT, Var,
)
from sessrc.syntax import parse_tgt

NAMES = ["x", "y", "z"]
name = st.sampled_from(NAMES)


def terms(max_leaves=12):
    leaf = st.one_of(name.map(Var), st.integers(0, 3).map(IntLit), st.just(UNIT), st.just(NoneLit()))

    def grow(sub):
        return st.one_of(
            st.builds(Lam, name, sub),
            st.builds(Rec, name, name, sub),
            st.builds(App, sub, sub),
            st.builds(Pair, sub, sub),
            st.builds(LetPair, name, name, sub, sub),
            st.builds(Let, name, sub, sub),
            st.builds(Case, sub, name, sub, name, sub),
            st.builds(MatchOpt, sub, sub, name, sub),
            st.builds(Seq, sub, sub),
            st.builds(Store, sub, sub),
            st.builds(SomeOf, sub),
        )

    return st.recursive(leaf, grow, max_leaves=max_leaves)


def run1(e, heap=frozendict()):
    """Evaluate a single thread to a value (deterministic)."""
    for _ in range(10_000):
        if T.is_value(e):
            return e, heap
        out = T.step_thread(e, heap)
        assert out is not None, f"stuck at {e}"
        assert out.forked is None
        e, heap = out.next, out.heap
    raise AssertionError("did not terminate")


def ev(text):
    return run1(parse_tgt(text))[0]


@given(terms(), name, terms(4))
@settings(max_examples=300)
def test_subst_free_variable_law(e, x, r):
    out = T.subst(e, {x: r})
    expected = T.free_vars(e) - {x}
    if x in T.free_vars(e):
        expected |= T.free_vars(r)
    assert T.free_vars(out) == expected


def test_rec_binds_both_names():
    assert T.free_vars(Rec("f", "x", App(Var("f"), Var("g")))) == {"g"}
    f = parse_tgt("rec f n -> if n == 0 then 0 else n + f n")
    assert isinstance(f, Rec) and T.free_vars(f) == frozenset()


@pytest.mark.parametrize("text,value", [
    ("1 + 2", IntLit(3)),
    ("3 == 3", BoolLit(True)),
    ("if 1 == 2 then 5 else 6", IntLit(6)),
    ("fst (1, 2)", IntLit(1)),
    ("snd (1, 2)", IntLit(2)),
    ("let (a, b) = (1, 2) in b", IntLit(2)),
    ("case inr 4 of inl a -> a | inr b -> b + 1", IntLit(5)),
    ("match some 3 with none -> 0 | some v -> v end", IntLit(3)),
    ("match none with none -> 0 | some v -> v", IntLit(0)),
    ("let r = ref 5 in r := 6; !r", IntLit(6)),
    ("let r = ref 5 in fai r", IntLit(5)),
    ("let r = ref 5 in fai r; !r", IntLit(6)),
    ("let r = ref 1 in swap r 2", IntLit(1)),
    ("let r = ref 1 in swap r 2; !r", IntLit(2)),
    ("let r = ref 1 in r := 3", UNIT),
    ("(rec loop n -> if n == 3 then n else loop (n + 1)) 0", IntLit(3)),
])
def test_eval(text, value):
    assert ev(text) == value


def test_equality_is_on_ints_only():
    assert T.is_stuck(BinOp("==", BoolLit(True), BoolLit(True)), frozendict())


def test_alloc_least_free():
    heap = frozendict({0: UNIT, 2: UNIT})
    out = T.step_thread(Alloc(IntLit(9)), heap)
    assert out.next == Loc(1) and out.heap[1] == IntLit(9)


def test_dangling_access_is_stuck():
    for e in (Load(Loc(3)), Store(Loc(3), UNIT), Fai(Loc(3)), Swap(Loc(3), UNIT)):
        assert T.is_stuck(e, frozendict())


def test_fai_on_non_int_is_stuck():
    assert T.is_stuck(Fai(Loc(0)), frozendict({0: BoolLit(False)}))


def test_fai_is_one_atomic_step():
    out = T.step_thread(Fai(Loc(0)), frozendict({0: IntLit(4)}))
    assert out.next == IntLit(4) and out.heap[0] == IntLit(5)


def test_fork():
    cfg = TgtConfig((Seq(Fork(IntLit(1)), IntLit(2)),))
    nxt = T.step_pool(cfg, 0)
    assert nxt.threads == (Seq(UNIT, IntLit(2)), IntLit(1))


def test_values():
    assert T.is_value(SomeOf(Pair(Loc(0), IntLit(1))))
    assert T.is_value(Inl(UNIT)) and T.is_value(Rec("f", "x", Var("x")))
    assert not T.is_value(SomeOf(Load(Loc(0))))


def test_decompose_order():
    e = Store(Load(Loc(0)), Load(Loc(1)))
    path, redex = T.decompose(e)
    assert path == ("target",) and redex == Load(Loc(0))
    e2 = Store(Loc(0), Load(Loc(1)))
    assert T.decompose(e2) == (("value",), Load(Loc(1)))


@given(terms())
@settings(max_examples=200)
def test_decompose_plug(e):
    d = T.decompose(e)
    if d is None:
        return
    path, redex = d
    assert T.plug(e, path, redex) == e


def test_locations_and_rename():
    e = Pair(Loc(4), Lam("x", Store(Loc(2), Loc(4))))
    assert list(T.locations(e)) == [4, 2, 4]
    assert list(T.locations(T.rename_locations(e, {4: 0, 2: 1}))) == [0, 1, 0]


def test_mentions():
    assert T.mentions(parse_tgt("fun x -> fai x"), Fai)
    assert not T.mentions(parse_tgt("fun x -> !x"), Fai)
