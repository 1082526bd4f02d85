"""Trace values, trace pairs and the global trace condition.

``check_gtc`` uses a size-change style composition closure: it collects,
for every companion node c, the relations carried by paths from c back to
c, and accepts iff every idempotent one relates some trace value to itself
with a progress mark.  ``gtc_oracle`` is an independent check that
enumerates lassos and searches the unrolled trace graph of each loop.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .kernel import RIGHT_RULES, CyclicPreProof, edges
from .syntax import Box, LabelledFormula, Seq, Sequent, Star, boxes, show_program


@dataclass(frozen=True)
class TraceValue:
    """Denotes ``label : [spine_1]...[spine_n][focus*]formula``."""

    label: str
    spine: tuple
    focus: object
    formula: object

    def item(self) -> LabelledFormula:
        return LabelledFormula(self.label, boxes(self.spine + (Star(self.focus),), self.formula))

    def relabel(self, label: str) -> "TraceValue":
        return TraceValue(label, self.spine, self.focus, self.formula)

    def __str__(self):
        spine = ",".join(show_program(p) for p in self.spine)
        return f"({self.label}, <{spine}>, {show_program(self.focus)}, {self.formula})"


def values_of_item(item) -> list:
    """Trace values denoting a labelled formula (one per top-level star)."""
    if not isinstance(item, LabelledFormula):
        return []
    out = []
    spine = []
    f = item.formula
    while isinstance(f, Box):
        if isinstance(f.prog, Star):
            out.append(TraceValue(item.label, tuple(spine), f.prog.body, f.body))
        spine.append(f.prog)
        f = f.body
    return out


def trace_values_of(s: Sequent) -> frozenset:
    return frozenset(t for item in s.right for t in values_of_item(item))


@dataclass(frozen=True)
class TraceEdge:
    src: int
    dst: int
    pairs: frozenset = field(default_factory=frozenset)


def _principal_successor(t: TraceValue, rule: str, principal, params: dict, index: int):
    prog = principal.formula.prog if isinstance(principal.formula, Box) else None
    spine = t.spine
    if rule == "StarR":
        if not spine:
            return None if index == 0 else (TraceValue(t.label, (t.focus,), t.focus, t.formula), True)
        if index == 0:
            return TraceValue(t.label, spine[1:], t.focus, t.formula), False
        return TraceValue(t.label, (prog.body,) + spine, t.focus, t.formula), False
    if not spine:
        return None
    head, rest = spine[0], spine[1:]
    if rule == "BoxR":
        return TraceValue(params["fresh"], rest, t.focus, t.formula), False
    if rule == "TestR":
        return TraceValue(t.label, rest, t.focus, t.formula), False
    if rule == "SeqR" and isinstance(head, Seq):
        return TraceValue(t.label, (head.first, head.second) + rest, t.focus, t.formula), False
    if rule == "ChoiceR":
        branch = head.left if index == 0 else head.right
        return TraceValue(t.label, (branch,) + rest, t.focus, t.formula), False
    return None


def rule_trace_pairs(conclusion: Sequent, rule: str, principal, params: dict, index: int,
                     premise: Sequent) -> frozenset:
    """Trace pairs between a conclusion and its ``index``-th premise."""
    params = params or {}
    dst_vals = trace_values_of(premise)
    pairs = set()
    if rule == "Subst":
        src_vals = trace_values_of(conclusion)
        for t2 in dst_vals:
            t = t2.relabel(params["to"]) if t2.label == params["from"] else t2
            if t in src_vals:
                pairs.add((t, t2, False))
        return frozenset(pairs)
    for item in conclusion.right:
        principal_here = rule in RIGHT_RULES and item == principal
        for t in values_of_item(item):
            if principal_here:
                succ = _principal_successor(t, rule, principal, params, index)
                if succ is not None and succ[0] in dst_vals:
                    pairs.add((t, succ[0], succ[1]))
            elif t in dst_vals:
                pairs.add((t, t, False))
    return frozenset(pairs)


def trace_pairs(proof: CyclicPreProof, nid: int, index: int) -> TraceEdge:
    n = proof.nodes[nid]
    pid = n.premises[index]
    pairs = rule_trace_pairs(n.sequent, n.rule, n.principal, n.params, index,
                             proof.nodes[pid].sequent)
    return TraceEdge(nid, pid, pairs)


# --------------------------------------------------------------------------
# Global trace condition

@dataclass(frozen=True)
class GTCVerdict:
    status: str                # "Accepted", "Rejected" or "Inconclusive"
    stem: tuple = ()           # node ids from the root to the loop start
    loop: tuple = ()           # node ids around the loop (cycle graph)

    @property
    def accepted(self) -> bool:
        return self.status == "Accepted"

    def describe(self) -> str:
        if self.status != "Rejected":
            return self.status
        stem = " -> ".join(map(str, self.stem))
        loop = " -> ".join(map(str, self.loop + self.loop[:1]))
        return f"Rejected: stem {stem}; loop {loop} (repeated forever)"


def _graph_edges(proof: CyclicPreProof) -> list:
    """Cycle-graph edges ``(src, dst, relation)`` with merged progress flags."""
    out = []
    for src, i, dst, _bud in edges(proof):
        rel = {}
        for a, b, prog in trace_pairs(proof, src, i).pairs:
            rel[(a, b)] = rel.get((a, b), False) or prog
        out.append((src, dst, frozenset((a, b, p) for (a, b), p in rel.items())))
    return out


def _compose(r1: frozenset, r2: frozenset) -> frozenset:
    by_src = {}
    for b, c, p in r2:
        by_src.setdefault(b, []).append((c, p))
    rel = {}
    for a, b, p1 in r1:
        for c, p2 in by_src.get(b, ()):
            rel[(a, c)] = rel.get((a, c), False) or p1 or p2
    return frozenset((a, c, p) for (a, c), p in rel.items())


def check_gtc(proof: CyclicPreProof, max_relations: int = 200_000) -> GTCVerdict:
    """Decide the global trace condition of a (locally checked) pre-proof."""
    graph = _graph_edges(proof)
    out_edges = {}
    for src, dst, rel in graph:
        out_edges.setdefault(src, []).append((dst, rel))
    heads = sorted({proof.nodes[b].companion for b in proof.nodes if proof.nodes[b].rule == "Bud"})
    total = 0
    for c in heads:
        seen = {}
        queue = deque()
        for dst, rel in out_edges.get(c, ()):
            key = (dst, rel)
            if key not in seen:
                seen[key] = (c, dst)
                queue.append(key)
        while queue:
            v, rel = queue.popleft()
            total += 1
            if total > max_relations:
                return GTCVerdict("Inconclusive")
            for dst, r2 in out_edges.get(v, ()):
                key = (dst, _compose(rel, r2))
                if key not in seen:
                    seen[key] = seen[(v, rel)] + (dst,)
                    queue.append(key)
        for (v, rel), path in seen.items():
            if v != c or _compose(rel, rel) != rel:
                continue
            if not any(a == b and p for a, b, p in rel):
                stem = tuple(proof.path_to(c))
                return GTCVerdict("Rejected", stem, tuple(path[:-1]))
    return GTCVerdict("Accepted")


def loop_has_progressing_trace(proof: CyclicPreProof, loop_edges: list) -> bool:
    """Whether repeating ``loop_edges`` forever admits an infinitely progressing trace.

    ``loop_edges`` lists ``(src, index, dst)`` cycle-graph edges forming a
    closed walk.  Builds the trace graph over positions of the loop and
    looks for a cycle through a progressing edge.
    """
    g = nx.DiGraph()
    n = len(loop_edges)
    for pos, (src, index, _dst) in enumerate(loop_edges):
        for a, b, prog in trace_pairs(proof, src, index).pairs:
            u, w = (pos, a), ((pos + 1) % n, b)
            g.add_edge(u, w, prog=g.get_edge_data(u, w, {}).get("prog", False) or prog)
    for comp in nx.strongly_connected_components(g):
        for u in comp:
            for w, data in g[u].items():
                if w in comp and data["prog"]:
                    return True
    return False


def gtc_oracle(proof: CyclicPreProof, stem_bound: int, loop_bound: int) -> GTCVerdict:
    """Check the trace condition on all lassos within the given bounds.

    Loops are explored breadth first from every node that lies on a cycle;
    two partial loops are merged when they end at the same node having
    carried the same trace relation, since their extensions behave alike.
    The result is ``Accepted`` only when this exploration saturates within
    ``loop_bound`` and every cycle node is within ``stem_bound`` of the root.
    """
    if stem_bound < 1 or loop_bound < 1:
        raise ValueError("bounds must be positive")
    succ = {}
    for src, i, dst, _bud in edges(proof):
        pairs = trace_pairs(proof, src, i).pairs
        succ.setdefault(src, []).append((i, dst, pairs))
    g = nx.DiGraph()
    g.add_nodes_from(proof.nodes[n].id for n in proof.preorder() if proof.nodes[n].rule != "Bud")
    g.add_edges_from((s, d) for s, lst in succ.items() for _, d, _ in lst)
    on_cycle = sorted(
        v for comp in nx.strongly_connected_components(g) for v in comp
        if len(comp) > 1 or g.has_edge(v, v)
    )
    complete = True
    for u in on_cycle:
        stem = proof.path_to(u)
        if len(stem) - 1 > stem_bound:
            complete = False
            continue
        frontier = [((), u, None)]
        seen = set()
        for _length in range(loop_bound):
            nxt = []
            for path, v, rel in frontier:
                for i, dst, pairs in succ.get(v, ()):
                    step = {(a, b, p) for a, b, p in pairs}
                    if rel is None:
                        new_rel = frozenset(step)
                    else:
                        new_rel = frozenset(
                            (a, c, p1 or p2) for a, b, p1 in rel for b2, c, p2 in step if b == b2
                        )
                    new_path = path + ((v, i, dst),)
                    if dst == u and not loop_has_progressing_trace(proof, list(new_path)):
                        return GTCVerdict("Rejected", tuple(stem),
                                          tuple(e[0] for e in new_path))
                    key = (dst, new_rel)
                    if key in seen:
                        continue
                    seen.add(key)
                    nxt.append((new_path, dst, new_rel))
            frontier = nxt
            if not frontier:
                break
        else:
            if frontier:
                complete = False
    return GTCVerdict("Accepted" if complete else "Inconclusive")
