"""Dependence analysis over assembled scops.

Dependences are computed at instance level: two accesses to the same register
entry, at least one of which writes, ordered by the base schedule, with no
intervening write to that entry (direct dependences only).  Two pure reads
never conflict (commuting controls).  Instance edges are then aggregated into
statement-level relations, annotated with a constant distance vector whenever
the relation is uniform, and condensed into an SCC dag for the schedulers.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .affine import ParamBinding, lex_less
from .scop import Scop, SubStatement

FLOW, ANTI, OUTPUT = "flow", "anti", "output"

_READS = ("read", "read_write")
_WRITES = ("read_write", "write")


@dataclass(frozen=True)
class AccessInstance:
    stmt: str
    gate_pos: int
    arg_pos: int
    point: tuple[int, ...]
    register_index: int
    space: str
    mode: str
    timestamp: tuple[int, ...]
    assembly_index: int

    @property
    def node(self) -> tuple[str, int]:
        return (self.stmt, self.gate_pos)

    def reads(self) -> bool:
        return self.mode in _READS

    def writes(self) -> bool:
        return self.mode in _WRITES


@dataclass(frozen=True)
class DependenceEdge:
    source: AccessInstance
    sink: AccessInstance
    kind: str

    def render(self) -> str:
        s, t = self.source, self.sink
        reg = f"{s.space}[{s.register_index}]"
        return (f"{s.stmt}{list(s.point)}@{list(s.timestamp)} -> "
                f"{t.stmt}{list(t.point)}@{list(t.timestamp)} {self.kind} {reg}")


def _edge_kind(src: AccessInstance, dst: AccessInstance) -> str:
    if src.writes() and dst.reads():
        return FLOW
    if src.reads() and dst.writes():
        return ANTI
    return OUTPUT


def access_instances(scop: Scop, binding: ParamBinding | None = None) -> list[AccessInstance]:
    binding = scop.binding if binding is None else binding
    out: list[AccessInstance] = []
    for sub in scop.subs:
        sig = sub.gate
        for point in sub.domain.enumerate(binding):
            ts = sub.schedule.apply(point, binding)
            for k, arg in enumerate(sub.args):
                idx = arg.eval_point(sub.domain.iterators, point, binding)
                out.append(AccessInstance(
                    stmt=sub.stmt, gate_pos=sub.gate_pos, arg_pos=k, point=point,
                    register_index=idx, space=sig.spaces[k], mode=sig.modes[k],
                    timestamp=ts, assembly_index=sub.assembly_index))
    return out


def compute_instance_deps(scop: Scop, binding: ParamBinding | None = None) -> list[DependenceEdge]:
    """Direct instance-level dependences under the base schedule.

    Scans each register entry's access timeline: an edge joins accesses a, b
    with a strictly before b, at least one writer among them, and no write to
    the same entry strictly between them.
    """
    accesses = access_instances(scop, binding)
    by_register: dict[tuple[str, int], list[AccessInstance]] = defaultdict(list)
    for acc in accesses:
        by_register[(acc.space, acc.register_index)].append(acc)

    edges: list[DependenceEdge] = []
    for timeline in by_register.values():
        timeline.sort(key=lambda a: (a.timestamp, a.assembly_index, a.point, a.arg_pos))
        last_write: AccessInstance | None = None
        interior_reads: list[AccessInstance] = []   # pure reads since last write
        for acc in timeline:
            if acc.writes():
                for r in interior_reads:
                    if lex_less(r.timestamp, acc.timestamp):
                        edges.append(DependenceEdge(r, acc, _edge_kind(r, acc)))
                if last_write is not None and not _same_instance(last_write, acc) \
                        and lex_less(last_write.timestamp, acc.timestamp):
                    edges.append(DependenceEdge(last_write, acc, _edge_kind(last_write, acc)))
                last_write = acc
                interior_reads = []
            else:
                if last_write is not None and not _same_instance(last_write, acc) \
                        and lex_less(last_write.timestamp, acc.timestamp):
                    edges.append(DependenceEdge(last_write, acc, _edge_kind(last_write, acc)))
                interior_reads.append(acc)
    edges.sort(key=lambda e: (e.source.timestamp, e.source.assembly_index,
                              e.source.point, e.sink.timestamp,
                              e.sink.assembly_index, e.sink.point))
    return edges


def _same_instance(a: AccessInstance, b: AccessInstance) -> bool:
    return a.node == b.node and a.point == b.point


def brute_force_deps(scop: Scop, binding: ParamBinding | None = None) -> list[DependenceEdge]:
    """O(n^2) pairwise definition of direct dependences; the reference oracle."""
    accesses = access_instances(scop, binding)
    edges: list[DependenceEdge] = []
    for a in accesses:
        for b in accesses:
            if _same_instance(a, b):
                continue
            if a.space != b.space or a.register_index != b.register_index:
                continue
            if not lex_less(a.timestamp, b.timestamp):
                continue
            if not (a.writes() or b.writes()):
                continue
            blocked = False
            for c in accesses:
                if c.space != a.space or c.register_index != a.register_index:
                    continue
                if not c.writes() or _same_instance(c, a) or _same_instance(c, b):
                    continue
                if lex_less(a.timestamp, c.timestamp) and lex_less(c.timestamp, b.timestamp):
                    blocked = True
                    break
            if blocked:
                continue
            edges.append(DependenceEdge(a, b, _edge_kind(a, b)))
    edges.sort(key=lambda e: (e.source.timestamp, e.source.assembly_index,
                              e.source.point, e.sink.timestamp,
                              e.sink.assembly_index, e.sink.point))
    return edges


@dataclass
class Relation:
    """Aggregated statement-level dependence relation."""

    source: tuple[str, int]
    sink: tuple[str, int]
    kind: str
    pairs: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)
    uniform: bool = False
    distance: tuple[int, ...] | None = None

    @property
    def key(self) -> tuple:
        return (self.source, self.sink, self.kind)


@dataclass
class DepGraph:
    nodes: list[tuple[str, int]]
    relations: list[Relation]
    sccs: list[list[tuple[str, int]]]          # topological order of components
    binding: ParamBinding = field(default_factory=dict)

    def relations_between(self, src, dst) -> list[Relation]:
        return [r for r in self.relations if r.source == src and r.sink == dst]

    def edge_node_pairs(self) -> set[tuple[tuple[str, int], tuple[str, int]]]:
        return {(r.source, r.sink) for r in self.relations}


def aggregate_relations(edges: list[DependenceEdge], scop: Scop,
                        binding: ParamBinding | None = None) -> DepGraph:
    groups: dict[tuple, Relation] = {}
    order: list[tuple] = []
    for e in edges:
        key = (e.source.node, e.sink.node, e.kind)
        rel = groups.get(key)
        if rel is None:
            rel = Relation(e.source.node, e.sink.node, e.kind)
            groups[key] = rel
            order.append(key)
        pair = (e.source.point, e.sink.point)
        if pair not in rel.pairs:
            rel.pairs.append(pair)
    for rel in groups.values():
        dims = {(len(s), len(t)) for s, t in rel.pairs}
        if len(dims) == 1 and len(rel.pairs[0][0]) == len(rel.pairs[0][1]):
            deltas = {tuple(t[i] - s[i] for i in range(len(s))) for s, t in rel.pairs}
            if len(deltas) == 1:
                rel.uniform = True
                rel.distance = next(iter(deltas))
    nodes = [s.key for s in scop.subs]
    relations = [groups[k] for k in order]
    sccs = _condense(nodes, {(r.source, r.sink) for r in relations})
    return DepGraph(nodes, relations, sccs, dict(binding or scop.binding))


def _condense(nodes: list[tuple[str, int]],
              arcs: set[tuple[tuple[str, int], tuple[str, int]]]) -> list[list[tuple[str, int]]]:
    """Tarjan SCCs, then a deterministic topological order of the condensation."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    sccs: list[list] = []
    succ: dict = defaultdict(list)
    for a, b in sorted(arcs, key=str):
        if a != b:
            succ[a].append(b)
    counter = [0]

    def strongconnect(v):
        work = [(v, iter(succ[v]))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)

    for v in nodes:
        if v not in index:
            strongconnect(v)

    # topological order over components (Kahn), ties broken by assembly order
    pos = {n: i for i, n in enumerate(nodes)}
    comp_of = {n: ci for ci, comp in enumerate(sccs) for n in comp}
    indeg = [0] * len(sccs)
    comp_succ: dict[int, set[int]] = defaultdict(set)
    for a, b in arcs:
        ca, cb = comp_of[a], comp_of[b]
        if ca != cb and cb not in comp_succ[ca]:
            comp_succ[ca].add(cb)
            indeg[cb] += 1
    def rank(ci: int) -> int:
        return min(pos[n] for n in sccs[ci])

    ready = sorted((ci for ci in range(len(sccs)) if indeg[ci] == 0), key=rank)
    topo: list[list] = []
    while ready:
        ci = ready.pop(0)
        topo.append(sorted(sccs[ci], key=lambda n: pos[n]))
        changed = False
        for cj in comp_succ[ci]:
            indeg[cj] -= 1
            if indeg[cj] == 0:
                ready.append(cj)
                changed = True
        if changed:
            ready.sort(key=rank)
    return topo


def dep_graph(scop: Scop, binding: ParamBinding | None = None) -> DepGraph:
    return aggregate_relations(compute_instance_deps(scop, binding), scop, binding)


def export_edges(edges: list[DependenceEdge]) -> str:
    """Line-oriented debug dump of instance edges."""
    return "\n".join(e.render() for e in edges) + ("\n" if edges else "")
