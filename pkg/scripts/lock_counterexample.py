"""Why the lock translation must be type-directed.

Releasing a ticket lock before acquiring it leaves the owner counter ahead of
the next ticket, so the acquire spins forever. CLH release on a fresh lock is
harmless, so the name-for-name substitution terminates and is not a refinement.
"""

from sessrc import locks as L
from sessrc.explorer import TARGET, explore, find_fair_lasso
from sessrc.refinement import check_refinement, obs_equiv_tgt
from sessrc.syntax import parse_tgt

PROG = "let lk = ticketnew () in ticketrel lk; ticketacq lk"


def summary(label, e):
    g = explore(TARGET.initial(e), lang=TARGET)
    finals = {TARGET.show(g.configs[n].threads[0]) for n in range(len(g)) if g.is_terminal(n)}
    lasso = find_fair_lasso(g)
    print(f"{label}: {len(g)} states, outcomes {sorted(finals) or 'none'}, "
          f"fair divergence {'yes' if lasso else 'no'}")


def main():
    e = parse_tgt(PROG)
    print(PROG)
    summary("ticket", L.resolve_ticket(e))
    summary("naive CLH", L.naive_clh(e))
    r = check_refinement(L.naive_clh(e), L.resolve_ticket(e), tgt_lang=TARGET, src_lang=TARGET,
                         obs=obs_equiv_tgt)
    print("naive refinement:", ", ".join(f"{c.verdict.value}" for c in r.conditions))
    try:
        L.translate_locks({}, e)
    except L.LockTypeError as err:
        print("type-directed translation:", err)


if __name__ == "__main__":
    main()
