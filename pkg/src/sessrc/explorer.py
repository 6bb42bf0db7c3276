"""Explicit-state exploration of thread-pool semantics and fair-cycle search.

Configurations are canonicalised (locations / channel ids renamed in
first-occurrence order, unreachable cells dropped) so that spin loops close
into finite cycles. A weakly fair diverging execution of a finite graph
exists iff some reachable strongly connected component contains, for every
thread enabled at *all* of its nodes, an internal edge stepped by that thread.
Visiting every edge of such a component forever is fair; any cycle in a
component failing the test leaves some continuously enabled thread idle.
"""

from __future__ import annotations

import hashlib
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from frozendict import frozendict

from sessrc import miniml as T
from sessrc import source as S
from sessrc import syntax


@dataclass(frozen=True)
class Language:
    """The pieces of a thread-pool semantics the explorer needs."""

    name: str
    config: type
    step_pool: Callable
    is_value: Callable
    is_stuck: Callable
    ids_in: Callable          # expr -> iterator of location/channel ids (pre-order)
    rename: Callable          # (expr, renaming) -> expr
    cell_values: Callable     # state entry -> iterator of exprs
    rename_cell: Callable     # (state entry, renaming) -> state entry
    show: Callable
    show_config: Callable
    decompose: Callable

    def initial(self, e):
        return self.config.initial(e)

    def successors(self, cfg) -> list:
        out = []
        for i in range(len(cfg.threads)):
            nxt = self.step_pool(cfg, i)
            if nxt is not None:
                out.append((i, nxt))
        return out


SOURCE = Language(
    "src", S.SrcConfig, S.step_pool, S.is_value, S.is_stuck, S.endpoint_ids,
    S.rename_channels, S.cell_values, S.rename_cell, syntax.show_src, syntax.show_src_config,
    S.decompose,
)
TARGET = Language(
    "tgt", T.TgtConfig, T.step_pool, T.is_value, T.is_stuck, T.locations,
    T.rename_locations, T.cell_values, T.rename_cell, syntax.show_tgt, syntax.show_tgt_config,
    T.decompose,
)
LANGUAGES = {"src": SOURCE, "tgt": TARGET}


def language_of(cfg) -> Language:
    return SOURCE if isinstance(cfg, S.SrcConfig) else TARGET


@dataclass(frozen=True)
class ExploreLimits:
    max_states: int = 100_000
    max_depth: int = 10_000

    def __post_init__(self):
        if self.max_states <= 0 or self.max_depth <= 0:
            raise ValueError("exploration limits must be positive")


class Inconclusive(Exception):
    """Raised when a verdict would depend on an unexplored region."""


# ---------------------------------------------------------------------------
# canonicalization


def canonicalize(cfg, lang: Optional[Language] = None):
    lang = lang or language_of(cfg)
    state = _state_of(cfg)
    order: dict = {}
    queue: list = []

    def visit(e):
        for l in lang.ids_in(e):
            if l not in order:
                order[l] = len(order)
                queue.append(l)

    for t in cfg.threads:
        visit(t)
    k = 0
    while k < len(queue):
        l = queue[k]
        k += 1
        if l in state:
            for v in lang.cell_values(state[l]):
                visit(v)
    live = [l for l in queue if l in state]
    if len(live) == len(state) and all(old == new for old, new in order.items()):
        return cfg
    threads = tuple(lang.rename(t, order) for t in cfg.threads)
    new_state = frozendict(
        (order[l], lang.rename_cell(state[l], order)) for l in live
    )
    return lang.config(threads, new_state)


def _state_of(cfg):
    return cfg.state if isinstance(cfg, S.SrcConfig) else cfg.heap


def fingerprint(cfg) -> str:
    return hashlib.blake2b(repr(cfg).encode(), digest_size=6).hexdigest()


def enabled(cfg, i: int, lang: Optional[Language] = None) -> bool:
    lang = lang or language_of(cfg)
    return lang.step_pool(cfg, i) is not None


# ---------------------------------------------------------------------------
# graph


@dataclass
class ExecGraph:
    """Reachable canonical configurations; node 0 is the root.

    ``edges[n]`` lists ``(thread index, successor node)``; a node is expanded
    when all its successors are recorded. ``truncated`` means some node was
    left unexpanded because a limit was hit.
    """

    configs: list
    edges: list
    expanded: list
    depth: list
    truncated: bool = False
    lang: Optional[Language] = None
    index: dict = field(default_factory=dict, repr=False)

    root = 0

    @classmethod
    def from_edges(cls, n: int, edge_list, truncated: bool = False) -> "ExecGraph":
        """A bare graph over nodes ``0..n-1`` (configs are the node ids)."""
        edges = [[] for _ in range(n)]
        for u, i, v in edge_list:
            edges[u].append((i, v))
        return cls(list(range(n)), edges, [True] * n, [0] * n, truncated)

    def __len__(self):
        return len(self.configs)

    @property
    def num_edges(self) -> int:
        return sum(len(es) for es in self.edges)

    def enabled_at(self, n: int) -> frozenset:
        return frozenset(i for i, _ in self.edges[n])

    def is_terminal(self, n: int) -> bool:
        cfg = self.configs[n]
        return all(self.lang.is_value(t) for t in cfg.threads)

    def has_stuck_thread(self, n: int) -> bool:
        cfg = self.configs[n]
        state = _state_of(cfg)
        return any(self.lang.is_stuck(t, state) for t in cfg.threads)

    def reachable(self, start: int = 0) -> set:
        seen = {start}
        todo = [start]
        while todo:
            u = todo.pop()
            for _, v in self.edges[u]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return seen

    def path_to(self, target: int) -> list:
        """Shortest ``[(thread, node), ...]`` from the root to ``target``."""
        parent = {self.root: None}
        todo = deque([self.root])
        while todo:
            u = todo.popleft()
            if u == target:
                break
            for i, v in self.edges[u]:
                if v not in parent:
                    parent[v] = (u, i)
                    todo.append(v)
        if target not in parent:
            raise ValueError(f"node {target} is unreachable")
        path = []
        node = target
        while parent[node] is not None:
            u, i = parent[node]
            path.append((i, node))
            node = u
        return path[::-1]

    def to_dot(self) -> str:
        lines = ["digraph exec {", "  node [shape=box, fontname=monospace];"]
        for n, cfg in enumerate(self.configs):
            attrs = f'label="{fingerprint(cfg)}"'
            if self.lang is not None and self.is_terminal(n):
                attrs += ", peripheries=2"
            if not self.expanded[n]:
                attrs += ", style=dashed"
            lines.append(f"  n{n} [{attrs}];")
        for u, es in enumerate(self.edges):
            for i, v in es:
                lines.append(f'  n{u} -> n{v} [label="{i}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _expand(args):
    lang_name, cfg = args
    lang = LANGUAGES[lang_name]
    return [(i, canonicalize(c, lang)) for i, c in lang.successors(cfg)]


def explore(cfg, limits: ExploreLimits = ExploreLimits(), lang: Optional[Language] = None,
            jobs: int = 1) -> ExecGraph:
    """Breadth-first construction of the canonical reachable-state graph.

    With ``jobs > 1`` each BFS layer is expanded in worker processes; new
    nodes are merged in the parent only, in deterministic order, so the
    result is identical to the sequential one.
    """
    lang = lang or language_of(cfg)
    root = canonicalize(cfg, lang)
    g = ExecGraph([root], [[]], [False], [0], False, lang, {root: 0})
    layer = [0]
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while layer:
            todo = [n for n in layer if g.depth[n] < limits.max_depth]
            if len(todo) < len(layer):
                g.truncated = True
            if pool is not None and len(todo) > 8:
                chunk = max(1, len(todo) // (4 * jobs))
                results = list(pool.map(_expand, [(lang.name, g.configs[n]) for n in todo],
                                        chunksize=chunk))
            else:
                results = [_expand((lang.name, g.configs[n])) for n in todo]
            nxt = []
            for n, succs in zip(todo, results):
                out = []
                complete = True
                for i, c in succs:
                    m = g.index.get(c)
                    if m is None:
                        if len(g.configs) >= limits.max_states:
                            complete = False
                            g.truncated = True
                            continue
                        m = len(g.configs)
                        g.index[c] = m
                        g.configs.append(c)
                        g.edges.append([])
                        g.expanded.append(False)
                        g.depth.append(g.depth[n] + 1)
                        nxt.append(m)
                    out.append((i, m))
                g.edges[n] = out
                g.expanded[n] = complete
            layer = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    # nodes at the depth bound may still be leaves
    for n, done in enumerate(g.expanded):
        if not done and not lang.successors(g.configs[n]):
            g.expanded[n] = True
    g.truncated = not all(g.expanded)
    return g


def default_limits() -> ExploreLimits:
    env = os.environ.get("SESSRC_MAX_STATES")
    return ExploreLimits(max_states=int(env)) if env else ExploreLimits()


# ---------------------------------------------------------------------------
# fair cycles


def strongly_connected_components(g: ExecGraph, nodes: Optional[set] = None) -> list[list[int]]:
    """Tarjan's algorithm, iterative; restricted to ``nodes`` when given."""
    if nodes is None:
        nodes = set(range(len(g)))
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    comps: list = []
    counter = 0
    for start in sorted(nodes):
        if start in index:
            continue
        work = [(start, iter(g.edges[start]))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            u, it = work[-1]
            advanced = False
            for _, v in it:
                if v not in nodes:
                    continue
                if v not in index:
                    index[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on_stack.add(v)
                    work.append((v, iter(g.edges[v])))
                    advanced = True
                    break
                if v in on_stack:
                    low[u] = min(low[u], index[v])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])
            if low[u] == index[u]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == u:
                        break
                comps.append(sorted(comp))
    return comps


@dataclass
class Lasso:
    """``prefix`` leads from the root to the cycle start; ``cycle`` returns to it.

    Entries are ``(thread index, node reached)``.
    """

    prefix: list
    cycle: list

    @property
    def start(self) -> int:
        return self.prefix[-1][1] if self.prefix else ExecGraph.root

    def labels(self) -> tuple[list[int], list[int]]:
        return [i for i, _ in self.prefix], [i for i, _ in self.cycle]


def cycle_is_fair(g: ExecGraph, walk_edges) -> bool:
    """Whether repeating the closed walk given as ``(u, thread, v)`` edges forever
    is weakly fair: every thread enabled at every visited node steps."""
    visited = {u for u, _, _ in walk_edges} | {v for _, _, v in walk_edges}
    stepped = {i for _, i, _ in walk_edges}
    always = frozenset.intersection(*(g.enabled_at(n) for n in visited))
    return always <= stepped


def _component_is_fair(g: ExecGraph, comp: set) -> bool:
    internal = [(u, i, v) for u in comp for i, v in g.edges[u] if v in comp]
    if not internal:
        return False
    return cycle_is_fair(g, internal)


def _path_within(g: ExecGraph, comp: set, src: int, dst: int) -> list:
    """Shortest ``[(thread, node)]`` from src to dst using only nodes of comp."""
    if src == dst:
        return []
    parent = {src: None}
    todo = deque([src])
    while todo:
        u = todo.popleft()
        for i, v in g.edges[u]:
            if v in comp and v not in parent:
                parent[v] = (u, i)
                if v == dst:
                    todo.clear()
                    break
                todo.append(v)
    path = []
    node = dst
    while parent[node] is not None:
        u, i = parent[node]
        path.append((i, node))
        node = u
    return path[::-1]


def find_fair_lasso(g: ExecGraph) -> Optional[Lasso]:
    """A reachable weakly fair cycle with its access path, or None."""
    if g.truncated:
        raise Inconclusive("graph is truncated; fairness verdict would be unsound")
    live = g.reachable(g.root)
    for comp in strongly_connected_components(g, live):
        cs = set(comp)
        if not _component_is_fair(g, cs):
            continue
        always = frozenset.intersection(*(g.enabled_at(n) for n in cs))
        required = []
        for i in sorted(always):
            u, v = next((u, v) for u in comp for j, v in g.edges[u] if j == i and v in cs)
            required.append((u, i, v))
        if not required:
            u = comp[0]
            i, v = next((i, v) for i, v in g.edges[u] if v in cs)
            required.append((u, i, v))
        # visit every node of the component so no thread outside ``always``
        # stays enabled along the whole cycle
        start = comp[0]
        cycle = []
        here = start
        for w in comp[1:]:
            cycle += _path_within(g, cs, here, w)
            here = w
        for u, i, v in required:
            cycle += _path_within(g, cs, here, u)
            cycle.append((i, v))
            here = v
        cycle += _path_within(g, cs, here, start)
        return Lasso(g.path_to(start), cycle)
    return None


def lasso_edges(lasso: Lasso) -> list:
    edges = []
    here = lasso.start
    for i, v in lasso.cycle:
        edges.append((here, i, v))
        here = v
    return edges


def replay(g: ExecGraph, cfg, labels) -> list:
    """Step ``cfg`` by the thread indices in ``labels``; canonical configs visited."""
    lang = g.lang or language_of(cfg)
    out = []
    for i in labels:
        cfg = lang.step_pool(cfg, i)
        if cfg is None:
            raise ValueError(f"thread {i} cannot step during replay")
        cfg = canonicalize(cfg, lang)
        out.append(cfg)
    return out


def check_lasso(g: ExecGraph, lasso: Lasso) -> bool:
    """Replay the lasso through the step relation and check shape and fairness."""
    if not lasso.cycle:
        return False
    here = g.root
    for i, v in lasso.prefix + lasso.cycle:
        if (i, v) not in g.edges[here]:
            return False
        here = v
    if g.lang is not None:
        pre, cyc = lasso.labels()
        seen = replay(g, g.configs[g.root], pre + cyc)
        if seen != [g.configs[n] for _, n in lasso.prefix + lasso.cycle]:
            return False
    if lasso.cycle[-1][1] != lasso.start:
        return False
    return cycle_is_fair(g, lasso_edges(lasso))


def describe_node(g: ExecGraph, n: int) -> dict[str, Any]:
    cfg = g.configs[n]
    return {
        "node": n,
        "fingerprint": fingerprint(cfg),
        "config": g.lang.show_config(cfg),
        "path": [i for i, _ in g.path_to(n)],
    }
