"""Fair, termination-preserving refinement between two closed programs.

A target program refines a source program when, from the empty state:

1. no reachable target configuration contains a stuck thread;
2. whenever every target thread ends in a value, either some source execution
   ends with all threads values and an equivalent main value, or some source
   execution gets a thread stuck;
3. if the target has a weakly fair diverging execution, so does the source.

Both sides are decided on the explored graphs; any condition whose answer
depends on a truncated region is reported as inconclusive.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from sessrc import miniml as T
from sessrc import source as S
from sessrc.explorer import (
    SOURCE, TARGET, ExecGraph, ExploreLimits, Language, check_lasso, describe_node,
    explore, find_fair_lasso,
)


class Verdict(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class Condition:
    verdict: Verdict
    witness: Optional[dict] = None
    note: str = ""

    def to_json(self) -> dict:
        out: dict[str, Any] = {"verdict": self.verdict.value}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class RefinementReport:
    cond1: Condition
    cond2: Condition
    cond3: Condition
    stats: dict = field(default_factory=dict)
    target_graph: Optional[ExecGraph] = field(default=None, repr=False)
    source_graph: Optional[ExecGraph] = field(default=None, repr=False)

    @property
    def conditions(self) -> tuple[Condition, Condition, Condition]:
        return self.cond1, self.cond2, self.cond3

    @property
    def passed(self) -> bool:
        return all(c.verdict is Verdict.PASS for c in self.conditions)

    @property
    def overall(self) -> Verdict:
        verdicts = [c.verdict for c in self.conditions]
        if Verdict.FAIL in verdicts:
            return Verdict.FAIL
        if Verdict.INCONCLUSIVE in verdicts:
            return Verdict.INCONCLUSIVE
        return Verdict.PASS

    def to_json(self) -> dict:
        return {
            "cond1": self.cond1.to_json(),
            "cond2": self.cond2.to_json(),
            "cond3": self.cond3.to_json(),
            "stats": self.stats,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


# ---------------------------------------------------------------------------
# observations


def obs_equiv(v: T.TgtExpr, V: S.SrcExpr) -> bool:
    """Observable equivalence of a MiniML value and a source value."""
    match v, V:
        case T.IntLit(n), S.IntLit(m):
            return n == m
        case T.UnitLit(), S.UnitLit():
            return True
        case T.Loc(), S.Endpoint():
            return True
        case T.Lam() | T.Rec(), S.Lam():
            return True
        case T.Pair(a, b), S.Pair(A, B):
            return obs_equiv(a, A) and obs_equiv(b, B)
    return False


def obs_equiv_tgt(v: T.TgtExpr, w: T.TgtExpr) -> bool:
    """Observable equivalence between two MiniML values (lock refinement)."""
    match v, w:
        case T.IntLit(n), T.IntLit(m):
            return n == m
        case T.BoolLit(a), T.BoolLit(b):
            return a == b
        case T.UnitLit(), T.UnitLit():
            return True
        case T.NoneLit(), T.NoneLit():
            return True
        case T.Loc(), T.Loc():
            return True
        case T.Lam() | T.Rec(), T.Lam() | T.Rec():
            return True
        case T.Pair(a, b), T.Pair(c, d):
            return obs_equiv_tgt(a, c) and obs_equiv_tgt(b, d)
        case T.SomeOf(a), T.SomeOf(b):
            return obs_equiv_tgt(a, b)
        case T.Inl(a), T.Inl(b):
            return obs_equiv_tgt(a, b)
        case T.Inr(a), T.Inr(b):
            return obs_equiv_tgt(a, b)
    return False


def main_value(g: ExecGraph, n: int):
    """Value of thread 0 at node ``n``, if it is a value."""
    t0 = g.configs[n].threads[0]
    return t0 if g.lang.is_value(t0) else None


# ---------------------------------------------------------------------------
# the three conditions


def _cond1(tg: ExecGraph) -> Condition:
    for n in range(len(tg)):
        if tg.has_stuck_thread(n):
            return Condition(Verdict.FAIL, describe_node(tg, n), "target reaches a stuck thread")
    if tg.truncated:
        return Condition(Verdict.INCONCLUSIVE, note="target graph truncated")
    return Condition(Verdict.PASS)


def _cond2(tg: ExecGraph, sg: ExecGraph, obs: Callable) -> Condition:
    src_terminal_values = []
    seen = set()
    for n in range(len(sg)):
        if sg.is_terminal(n):
            v = main_value(sg, n)
            if v not in seen:
                seen.add(v)
                src_terminal_values.append(v)
    src_stuck = next((n for n in range(len(sg)) if sg.has_stuck_thread(n)), None)
    if src_stuck is not None:
        return Condition(
            Verdict.PASS, note="source can get stuck", witness={"source_stuck": describe_node(sg, src_stuck)}
        )
    unmatched = None
    for n in range(len(tg)):
        if not tg.is_terminal(n):
            continue
        v = main_value(tg, n)
        if not any(obs(v, V) for V in src_terminal_values):
            unmatched = n
            break
    if unmatched is not None:
        if sg.truncated:
            return Condition(Verdict.INCONCLUSIVE, note="no matching source outcome in truncated source graph")
        w = describe_node(tg, unmatched)
        w["source_main_values"] = [sg.lang.show(V) for V in src_terminal_values]
        return Condition(Verdict.FAIL, w, "target terminal value has no matching source outcome")
    if tg.truncated:
        return Condition(Verdict.INCONCLUSIVE, note="target graph truncated")
    return Condition(Verdict.PASS)


def _lasso_json(g: ExecGraph, lasso) -> dict:
    pre, cyc = lasso.labels()
    return {
        "prefix": pre,
        "cycle": cyc,
        "cycle_start": describe_node(g, lasso.start),
        "replays": check_lasso(g, lasso),
    }


def _cond3(tg: ExecGraph, sg: ExecGraph) -> Condition:
    if tg.truncated:
        return Condition(Verdict.INCONCLUSIVE, note="target graph truncated")
    t_lasso = find_fair_lasso(tg)
    if t_lasso is None:
        return Condition(Verdict.PASS, note="target has no fair divergence")
    if sg.truncated:
        return Condition(Verdict.INCONCLUSIVE, {"target_lasso": _lasso_json(tg, t_lasso)},
                         "source graph truncated")
    s_lasso = find_fair_lasso(sg)
    if s_lasso is not None:
        return Condition(
            Verdict.PASS,
            {"target_lasso": _lasso_json(tg, t_lasso), "source_lasso": _lasso_json(sg, s_lasso)},
            "both sides diverge fairly",
        )
    return Condition(
        Verdict.FAIL,
        {
            "target_lasso": _lasso_json(tg, t_lasso),
            "source_fair_lasso": None,
            "source_nodes": len(sg),
            "source_exhaustive": True,
        },
        "target diverges fairly; the exhaustive source graph has no fair cycle",
    )


def _stats(g: ExecGraph) -> dict:
    return {"nodes": len(g), "edges": g.num_edges, "truncated": g.truncated}


def check_graphs(tg: ExecGraph, sg: ExecGraph, obs: Callable = obs_equiv) -> RefinementReport:
    return RefinementReport(
        _cond1(tg), _cond2(tg, sg, obs), _cond3(tg, sg),
        {"target": _stats(tg), "source": _stats(sg)}, tg, sg,
    )


def check_refinement(
    tgt, src,
    limits: ExploreLimits = ExploreLimits(),
    *,
    tgt_lang: Language = TARGET,
    src_lang: Language = SOURCE,
    obs: Callable = obs_equiv,
    jobs: int = 1,
) -> RefinementReport:
    """Check that closed program ``tgt`` refines closed program ``src``.

    Both languages default to MiniML-over-source; pass ``src_lang=TARGET`` and
    ``obs=obs_equiv_tgt`` to compare two MiniML programs.
    """
    for name, e, lang in (("target", tgt, tgt_lang), ("source", src, src_lang)):
        fv = (S.free_vars if lang is SOURCE else T.free_vars)(e)
        if fv:
            raise ValueError(f"{name} program is open; free variables: {', '.join(sorted(fv))}")
    tg = explore(tgt_lang.initial(tgt), limits, tgt_lang, jobs=jobs)
    sg = explore(src_lang.initial(src), limits, src_lang, jobs=jobs)
    return check_graphs(tg, sg, obs)
