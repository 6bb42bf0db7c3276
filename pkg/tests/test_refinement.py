import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from generators import CORPUS, random_closed_program, compiler_files
from sessrc import miniml as T
from sessrc import source as S
from sessrc.compiler import compile_expr, resolve_primitives
from sessrc.explorer import SOURCE, TARGET, ExploreLimits, explore
from sessrc.refinement import (
    Verdict, check_graphs, check_refinement, main_value, obs_equiv, obs_equiv_tgt,
)
from sessrc.syntax import parse_src, parse_tgt

PASS, FAIL, INC = Verdict.PASS, Verdict.FAIL, Verdict.INCONCLUSIVE
RUNNING = parse_src((CORPUS / "running_example.src").read_text())


def verdicts(report):
    return tuple(c.verdict for c in report.conditions)


def test_obs_equiv_examples():
    assert obs_equiv(T.IntLit(42), S.IntLit(42))
    assert not obs_equiv(T.IntLit(42), S.IntLit(7))
    assert obs_equiv(T.Loc(3), S.Endpoint(0, S.Side.LEFT))
    assert obs_equiv(T.Pair(T.IntLit(42), T.Loc(0)), S.Pair(S.IntLit(42), S.Endpoint(1, S.Side.RIGHT)))
    assert obs_equiv(T.UNIT, S.UNIT)
    assert obs_equiv(T.Rec("f", "x", T.Var("x")), S.Lam("y", S.IntLit(1)))
    assert not obs_equiv(T.Loc(0), S.IntLit(0))
    assert not obs_equiv(T.BoolLit(True), S.IntLit(1))
    assert not obs_equiv(T.Pair(T.IntLit(1), T.UNIT), S.IntLit(1))


def test_obs_equiv_tgt():
    assert obs_equiv_tgt(T.BoolLit(True), T.BoolLit(True))
    assert not obs_equiv_tgt(T.BoolLit(True), T.BoolLit(False))
    assert obs_equiv_tgt(T.Inl(T.Loc(1)), T.Inl(T.Loc(5)))
    assert not obs_equiv_tgt(T.Inl(T.UNIT), T.Inr(T.UNIT))
    assert obs_equiv_tgt(T.SomeOf(T.IntLit(2)), T.SomeOf(T.IntLit(2)))


def test_main_value():
    g = explore(TARGET.initial(T.IntLit(42)), lang=TARGET)
    assert main_value(g, 0) == T.IntLit(42)
    g2 = explore(SOURCE.initial(S.Recv(S.Var("y"))), lang=SOURCE)
    assert main_value(g2, 0) is None


def test_running_example_passes():
    r = check_refinement(compile_expr(RUNNING), RUNNING)
    assert verdicts(r) == (PASS, PASS, PASS) and r.passed


def test_miscompiled_fails_cond3():
    bad = resolve_primitives(parse_tgt((CORPUS / "miscompiled.tgt").read_text()))
    r = check_refinement(bad, RUNNING)
    assert verdicts(r) == (PASS, PASS, FAIL)
    w = r.cond3.witness
    assert w["target_lasso"]["replays"] and w["source_exhaustive"]
    assert w["target_lasso"]["cycle"]


def test_trivial():
    assert check_refinement(T.IntLit(42), S.IntLit(42)).passed


@pytest.mark.parametrize("n", [0, 1, 7, 1000])
def test_reflexive_on_values(n):
    r = check_refinement(T.Pair(T.IntLit(n), T.UNIT), S.Pair(S.IntLit(n), S.UNIT))
    assert r.passed


def test_wrong_value_fails_cond2():
    r = check_refinement(T.IntLit(7), S.IntLit(42))
    assert verdicts(r) == (PASS, FAIL, PASS)
    assert r.cond2.witness["source_main_values"] == ["42"]


def test_stuck_target_fails_cond1():
    r = check_refinement(T.App(T.IntLit(1), T.IntLit(2)), S.IntLit(1))
    assert r.cond1.verdict is FAIL
    assert r.cond1.witness["path"] == []


def test_stuck_source_escape_hatch():
    # a source that can get stuck excuses any terminal target value
    r = check_refinement(T.IntLit(7), S.App(S.IntLit(1), S.IntLit(2)))
    assert r.cond2.verdict is PASS and "source_stuck" in r.cond2.witness


def test_open_program_rejected():
    with pytest.raises(ValueError):
        check_refinement(T.Var("x"), S.IntLit(1))
    with pytest.raises(ValueError):
        check_refinement(T.IntLit(1), S.Var("x"))


def test_truncated_is_inconclusive():
    r = check_refinement(compile_expr(RUNNING), RUNNING, ExploreLimits(max_states=4))
    assert r.overall is INC
    assert FAIL not in verdicts(r)


def test_json_report():
    r = check_refinement(compile_expr(RUNNING), RUNNING)
    data = json.loads(r.dumps())
    assert set(data) == {"cond1", "cond2", "cond3", "stats"}
    assert data["stats"]["target"]["truncated"] is False


@pytest.mark.parametrize("path", compiler_files()[:8], ids=lambda p: p.name)
def test_monotone_in_limits(path):
    e = parse_src(path.read_text())
    seen = []
    for k in (3, 10, 40, 100_000):
        seen.append(verdicts(check_refinement(compile_expr(e), e, ExploreLimits(max_states=k))))
    final = seen[-1]
    for vs in seen:
        for v, w in zip(vs, final):
            assert v is INC or v is w


def test_cond2_single_terminal_shortcut():
    # deterministic source: cond2 reduces to one obs check per target outcome
    for tv in (T.IntLit(42), T.IntLit(3)):
        sg = explore(SOURCE.initial(S.IntLit(42)), lang=SOURCE)
        tg = explore(TARGET.initial(tv), lang=TARGET)
        (only,) = [n for n in range(len(sg)) if sg.is_terminal(n)]
        expected = obs_equiv(tv, main_value(sg, only))
        assert (check_graphs(tg, sg).cond2.verdict is PASS) == expected


@given(st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_random_programs_refine(seed):
    e = random_closed_program(random.Random(seed))
    r = check_refinement(compile_expr(e), e, ExploreLimits(max_states=20_000))
    assert FAIL not in verdicts(r)
