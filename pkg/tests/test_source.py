import pytest
from frozendict import frozendict
from hypothesis import given, settings, strategies as st

from sessrc import source as S
from sessrc.source import (
    App, Endpoint, Fork, IntLit, Lam, LetPair, NewCh, Pair, Recv, Send, Side, SrcConfig, UNIT, Var,
)
from sessrc.syntax import parse_src

L0, R0 = Endpoint(0, Side.LEFT), Endpoint(0, Side.RIGHT)

NAMES = ["x", "y", "z"]


def terms(max_leaves=12):
    leaf = st.one_of(
        st.sampled_from(NAMES).map(Var),
        st.integers(0, 3).map(IntLit),
        st.just(UNIT),
    )

    def grow(sub):
        return st.one_of(
            st.builds(Lam, st.sampled_from(NAMES), sub),
            st.builds(App, sub, sub),
            st.builds(Pair, sub, sub),
            st.builds(LetPair, st.sampled_from(NAMES), st.sampled_from(NAMES), sub, sub),
            st.builds(Send, sub, sub),
            st.builds(Recv, sub),
            st.builds(Fork, sub),
        )

    return st.recursive(leaf, grow, max_leaves=max_leaves)


def test_side_flip():
    assert Side.LEFT.flip() is Side.RIGHT
    assert Side.RIGHT.flip().flip() is Side.RIGHT


def test_values():
    assert S.is_value(IntLit(1))
    assert S.is_value(Pair(L0, Lam("x", Var("x"))))
    assert not S.is_value(Pair(IntLit(1), Recv(R0)))
    assert not S.is_value(Var("x"))
    assert not S.is_value(NewCh())


def test_free_vars_binders():
    e = LetPair("a", "b", Var("p"), App(Var("a"), Var("c")))
    assert S.free_vars(e) == {"p", "c"}
    assert S.free_vars(Lam("x", App(Var("x"), Var("y")))) == {"y"}


def test_subst_avoids_capture():
    e = Lam("y", App(Var("x"), Var("y")))
    out = S.subst(e, {"x": Var("y")})
    assert isinstance(out, Lam) and out.param != "y"
    assert out.body == App(Var("y"), Var(out.param))


def test_subst_no_needless_renaming():
    e = Lam("y", App(Var("x"), Var("y")))
    assert S.subst(e, {"x": IntLit(3)}) == Lam("y", App(IntLit(3), Var("y")))


def test_subst_simultaneous():
    e = Pair(Var("x"), Var("y"))
    assert S.subst(e, {"x": Var("y"), "y": Var("x")}) == Pair(Var("y"), Var("x"))


def test_subst_shadowed():
    e = Lam("x", Var("x"))
    assert S.subst(e, {"x": IntLit(9)}) == e


@given(terms(), st.sampled_from(NAMES), terms(4))
@settings(max_examples=300)
def test_subst_free_variable_law(e, x, r):
    out = S.subst(e, {x: r})
    expected = S.free_vars(e) - {x}
    if x in S.free_vars(e):
        expected |= S.free_vars(r)
    assert S.free_vars(out) == expected


@given(terms())
def test_subst_empty_is_identity(e):
    assert S.subst(e, {}) == e


@given(terms())
@settings(max_examples=200)
def test_decompose_plug_roundtrip(e):
    d = S.decompose(e)
    if d is None:
        assert S.is_value(e)
        return
    path, redex = d
    assert S.plug(e, path, redex) == e


def test_decompose_left_to_right():
    e = Pair(App(Lam("x", Var("x")), IntLit(1)), App(Lam("y", Var("y")), IntLit(2)))
    path, redex = S.decompose(e)
    assert path == ("pair-fst",)
    assert redex == App(Lam("x", Var("x")), IntLit(1))


def test_newch_allocates_least_free():
    state = frozendict({0: ((), ()), 2: ((), ())})
    out = S.step_thread(NewCh(), state)
    assert out.next == Pair(Endpoint(1, Side.LEFT), Endpoint(1, Side.RIGHT))
    assert out.state[1] == ((), ())


def test_send_and_recv_buffers():
    state = frozendict({0: ((), ())})
    out = S.step_thread(Send(L0, IntLit(5)), state)
    assert out.next == L0
    assert out.state[0] == ((IntLit(5),), ())
    out2 = S.step_thread(Recv(R0), out.state)
    assert out2.next == Pair(R0, IntLit(5))
    assert out2.state[0] == ((), ())
    # the reverse direction
    out3 = S.step_thread(Send(R0, IntLit(6)), state)
    assert out3.state[0] == ((), (IntLit(6),))
    assert S.step_thread(Recv(L0), out3.state).next == Pair(L0, IntLit(6))


def test_recv_empty_is_idle():
    state = frozendict({0: ((), ())})
    out = S.step_thread(Recv(R0), state)
    assert out.next == Recv(R0) and out.state == state


def test_fifo_order():
    state = frozendict({0: ((IntLit(1), IntLit(2)), ())})
    assert S.step_thread(Recv(R0), state).next == Pair(R0, IntLit(1))


def test_unknown_channel_is_stuck():
    assert S.is_stuck(Recv(Endpoint(4, Side.RIGHT)), frozendict())
    assert S.is_stuck(App(IntLit(5), IntLit(5)), frozendict())
    assert S.is_stuck(Var("free"), frozendict())


def test_fork_appends_thread():
    cfg = SrcConfig((Fork(IntLit(1)), IntLit(0)))
    nxt = S.step_pool(cfg, 0)
    assert nxt.threads == (UNIT, IntLit(0), IntLit(1))


def test_step_pool_range():
    with pytest.raises(IndexError):
        S.step_pool(SrcConfig((UNIT,)), 3)


def test_running_example_all_schedules_end_in_42():
    from sessrc.explorer import SOURCE, explore

    e = parse_src("let (x, y) = newch[!Int.end] in fork send x 42; let (_, v) = recv y in v")
    g = explore(S.SrcConfig.initial(e), lang=SOURCE)
    finals = [g.configs[n] for n in range(len(g)) if g.is_terminal(n)]
    assert finals and all(c.threads[0] == IntLit(42) for c in finals)


def test_endpoint_traversal_and_rename():
    e = Pair(Endpoint(3, Side.LEFT), Lam("x", Send(Endpoint(1, Side.RIGHT), Endpoint(3, Side.RIGHT))))
    assert list(S.endpoint_ids(e)) == [3, 1, 3]
    r = S.rename_channels(e, {3: 0, 1: 1})
    assert list(S.endpoint_ids(r)) == [0, 1, 0]
    assert S.has_endpoints(e) and not S.has_endpoints(IntLit(1))
