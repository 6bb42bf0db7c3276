import pytest

from generators import CORPUS
from sessrc import locks as L
from sessrc import miniml as T
from sessrc.explorer import TARGET, explore, find_fair_lasso
from sessrc.refinement import check_refinement, obs_equiv_tgt
from sessrc.syntax import parse_tgt


def outcomes(e):
    g = explore(TARGET.initial(e), lang=TARGET)
    assert not g.truncated
    return g, {g.configs[n].threads[0] for n in range(len(g)) if g.is_terminal(n)}


def test_builders_closed():
    for name, e in {**L.ticket_env(), **L.clh_env()}.items():
        assert T.is_value(e) and not T.free_vars(e), name


def test_ticketrel_is_not_atomic():
    rel = L.ticketrel()
    assert T.mentions(rel, T.Load) and T.mentions(rel, T.Store) and not T.mentions(rel, T.Fai)


def test_acquire_release_terminates():
    e = L.resolve_ticket(parse_tgt("let lk = ticketnew () in ticketacq lk; ticketrel lk; 1"))
    g, vals = outcomes(e)
    assert vals == {T.IntLit(1)}
    assert find_fair_lasso(g) is None


def test_release_first_diverges_only_for_ticket():
    e = parse_tgt("let lk = ticketnew () in ticketrel lk; ticketacq lk")
    g, vals = outcomes(L.resolve_ticket(e))
    assert not vals and find_fair_lasso(g) is not None
    g2, vals2 = outcomes(L.naive_clh(e))
    assert vals2 == {T.UNIT} and find_fair_lasso(g2) is None


def test_translate_examples():
    assert L.translate_locks({}, parse_tgt("ticketnew")) == (L.clh_new(), L.Arrow(L.UNIT, L.LOCK))
    assert L.translate_locks({}, parse_tgt("42")) == (T.IntLit(42), L.INT)
    out, ty = L.translate_locks({}, parse_tgt("ticketsync (ticketnew ()) (fun _ -> true)"))
    assert ty == L.BOOL
    assert out == T.App(T.App(L.clh_sync(), T.App(L.clh_new(), T.UNIT)), T.Lam("_", T.BoolLit(True)))


def test_translation_rules_recorded():
    t = L.translate({}, parse_tgt("let lk = ticketnew () in ticketsync lk (fun _ -> 1 == 1)"))
    assert {"Lock-Intro", "Lock-Elim", "Let", "BinOp"} <= set(t.rules)


def test_translation_is_homomorphic_elsewhere():
    e = parse_tgt("let r = ref 0 in fork (r := 1); case inl !r of inl a -> a == 0 | inr b -> b")
    out, ty = L.translate_locks({}, e)
    assert out == e and ty == L.BOOL


@pytest.mark.parametrize("text,exc", [
    ("let lk = ticketnew () in ticketrel lk; ticketacq lk", L.RawLockOperation),
    ("fun lk -> ticketacq lk", L.RawLockOperation),
    ("fai (ref 0)", L.LockTypeError),
    ("swap (ref 0) 1", L.LockTypeError),
    ("some 1", L.LockTypeError),
    ("ticketsync (ticketnew ())", L.LockTypeError),
    ("ticketsync 1 (fun _ -> true)", L.LockTypeError),
    ("if 1 then true else false", L.LockTypeError),
    ("(ref 1) := true", L.LockTypeError),
    ("fun f -> f f", L.LockTypeError),
    ("nope", L.LockTypeError),
])
def test_translation_rejects(text, exc):
    with pytest.raises(exc):
        L.translate_locks({}, parse_tgt(text))


def test_context_types():
    out, ty = L.translate_locks({"flag": L.Ref(L.BOOL)}, parse_tgt("!flag"))
    assert ty == L.BOOL


def test_show_lock_ty():
    assert L.show_lock_ty(L.Arrow(L.UNIT, L.LOCK)) == "Unit -> Lock"
    assert L.show_lock_ty(L.Prod(L.Ref(L.INT), L.Sum(L.BOOL, L.UNIT))) == "ref Int * (Bool + Unit)"


def test_mutual_exclusion_no_lost_update():
    e = parse_tgt((CORPUS / "locks" / "l03_two_thread_increment.tgt").read_text())
    clh, _ = L.translate_locks({}, e)
    for prog in (clh, L.resolve_ticket(e)):
        g, vals = outcomes(prog)
        assert vals == {T.BoolLit(True)}


def test_racy_flag_keeps_both_outcomes():
    e = parse_tgt((CORPUS / "locks" / "l05_racy_flag.tgt").read_text())
    clh, _ = L.translate_locks({}, e)
    _, vals = outcomes(clh)
    assert vals == {T.BoolLit(True), T.BoolLit(False)}
    r = check_refinement(clh, L.resolve_ticket(e), tgt_lang=TARGET, src_lang=TARGET, obs=obs_equiv_tgt)
    assert r.passed
