import random

import pytest
from hypothesis import given, settings, strategies as st

from generators import random_well_typed, session_types, compiler_files, lock_files
from sessrc import miniml as T
from sessrc import source as S
from sessrc.compiler import compile_expr
from sessrc.session_types import INT, END, Lolli, SendTy, Tensor
from sessrc.syntax import (
    ParseError, parse_src, parse_tgt, parse_type, show_src, show_tgt, show_type, tokenize,
)

RUNNING = "let (x, y) = newch[!Int.end] in fork send x 42; let (_, v) = recv y in v"


def test_running_example_ast():
    e = parse_src(RUNNING)
    x, y = S.Var("x"), S.Var("y")
    inner = S.LetPair("_", "v", S.Recv(y), S.Var("v"))
    expected = S.LetPair("x", "y", S.NewCh(SendTy(INT, END)),
                         S.seq_fork(S.Send(x, S.IntLit(42)), inner))
    assert e == expected


def test_send_is_binary():
    with pytest.raises(ParseError) as err:
        parse_src("send x")
    assert err.value.line == 1 and err.value.col > 1


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_src("let x = 1 in\n  (x,")
    assert err.value.line == 2


def test_bad_character():
    with pytest.raises(ParseError):
        tokenize("1 $ 2")


def test_wildcard_not_a_reference():
    with pytest.raises(ParseError):
        parse_src("_")


def test_comments():
    assert parse_src("-- hi\n42 -- there") == S.IntLit(42)


def test_type_precedence():
    assert parse_type("Int -o Int -o Int") == Lolli(INT, Lolli(INT, INT))
    assert parse_type("Int * Int -o Int") == Lolli(Tensor(INT, INT), INT)
    assert parse_type("!Int.end") == SendTy(INT, END)


@given(session_types())
def test_type_roundtrip(s):
    assert parse_type(show_type(s)) == s


def test_annotated_lambda():
    e = parse_src("fun (x : Int) y -> (x, y)")
    assert e == S.Lam("x", S.Lam("y", S.Pair(S.Var("x"), S.Var("y"))), INT)


@pytest.mark.parametrize("path", compiler_files(), ids=lambda p: p.name)
def test_corpus_roundtrip_src(path):
    e = parse_src(path.read_text())
    assert parse_src(show_src(e)) == e


@pytest.mark.parametrize("path", lock_files(), ids=lambda p: p.name)
def test_corpus_roundtrip_tgt(path):
    e = parse_tgt(path.read_text())
    assert parse_tgt(show_tgt(e)) == e


@given(st.integers(0, 2**32))
@settings(max_examples=200)
def test_generated_roundtrip(seed):
    _, e, _ = random_well_typed(random.Random(seed))
    assert parse_src(show_src(e)) == e
    out = compile_expr(e)
    assert parse_tgt(show_tgt(out)) == out


@pytest.mark.parametrize("text", [
    "fun x y -> x",
    "rec f x -> f x",
    "let r = ref 0 in r := !r + 1; !r == 1",
    "if true then inl 1 else inr ()",
    "case x of inl a -> a | inr b -> b",
    "match !l with none -> 0 | some p -> fst p end",
    "fork (f ()); swap l 2",
    "(fst lk) := !(fst lk) + 1",
    "(!(fst lk)) := false",
    "f (g x) (h y)",
])
def test_tgt_roundtrip(text):
    e = parse_tgt(text)
    assert parse_tgt(show_tgt(e)) == e


def test_tgt_precedence():
    e = parse_tgt("a := b + c == d; e")
    assert isinstance(e, T.Seq)
    assert isinstance(e.first, T.Store)
    assert e.first.value == T.BinOp("==", T.BinOp("+", T.Var("b"), T.Var("c")), T.Var("d"))
