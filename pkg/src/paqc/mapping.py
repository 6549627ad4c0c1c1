"""Qubit allocation: mapping logical circuits onto coupling graphs.

Three policies are provided.  ``trivial`` starts from the identity placement
and routes every gate over shortest-path SWAP chains.  ``wpm_lite`` first
embeds the most frequent interaction pairs onto physical edges, then routes
the same way.  ``sabre_lite`` is a front-layer router with a look-ahead
window and a reverse-then-forward refinement of a seed-randomized initial
placement.  Every SWAP is emitted as 3 CNOTs; in directed mode an
orientation-mismatched CNOT is emitted as a 4H+1CNOT reversal group.
"""
from __future__ import annotations

import random
import time
from collections import defaultdict
from dataclasses import dataclass, field

from .codegen import GateStream, StreamOp
from .topology import CouplingGraph

ORIGINAL, SWAP_PART, REVERSE_PART = "original", "swap_part", "reverse_part"

POLICIES = ("trivial", "wpm_lite", "sabre_lite")

_2Q = {"CNOT", "CY", "CZ", "Swap"}
_3Q = {"Toffoli"}

LOOKAHEAD_WINDOW = 20
LOOKAHEAD_WEIGHT = 0.5


class MappingError(Exception):
    pass


@dataclass(frozen=True)
class PhysOp:
    gate: str
    qubits: tuple[int, ...]
    clbits: tuple[int, ...] = ()
    tag: str = ORIGINAL
    group: int = -1


@dataclass
class PhysicalCircuit:
    graph: str
    ops: list[PhysOp]
    initial_mapping: tuple[int, ...]
    final_mapping: tuple[int, ...]
    swaps: int
    reverses: int
    logical_size: int


@dataclass
class Metrics:
    depth: int
    size: int
    added_gates: int
    swaps: int
    reverses: int
    alloc_time: float


def depth(ops) -> int:
    """Greedy ASAP leveling: an op lands one past its operands' last level."""
    levels: dict[int, int] = {}
    deepest = 0
    for op in ops:
        qubits = op.qubits if hasattr(op, "qubits") else tuple(op)
        lvl = 1 + max((levels.get(q, 0) for q in qubits), default=0)
        for q in qubits:
            levels[q] = lvl
        deepest = max(deepest, lvl)
    return deepest


def depth_longest_path(ops) -> int:
    """Independent oracle: longest chain in the lane-conflict dag."""
    qubit_lists = [op.qubits if hasattr(op, "qubits") else tuple(op) for op in ops]
    n = len(qubit_lists)
    dist = [1] * n
    last: dict[int, int] = {}
    for i in range(n):
        for q in qubit_lists[i]:
            if q in last:
                dist[i] = max(dist[i], dist[last[q]] + 1)
        for q in qubit_lists[i]:
            last[q] = i
    return max(dist, default=0)


# ---------------------------------------------------------------------------
# Routing state
# ---------------------------------------------------------------------------

class _Router:
    def __init__(self, g: CouplingGraph, n_logical: int, initial: list[int],
                 directed: bool):
        self.g = g
        self.directed = directed
        self.l2p = list(initial)
        self.p2l = [-1] * g.n
        for lq, pv in enumerate(initial):
            if self.p2l[pv] != -1:
                raise MappingError("initial mapping is not injective")
            self.p2l[pv] = lq
        self.ops: list[PhysOp] = []
        self.swaps = 0
        self.reverses = 0
        self.group_counter = 0

    def emit_swap(self, a: int, b: int) -> None:
        gid = self.group_counter
        self.group_counter += 1
        self.ops.append(PhysOp("CNOT", (a, b), tag=SWAP_PART, group=gid))
        self.ops.append(PhysOp("CNOT", (b, a), tag=SWAP_PART, group=gid))
        self.ops.append(PhysOp("CNOT", (a, b), tag=SWAP_PART, group=gid))
        self.swaps += 1
        la, lb = self.p2l[a], self.p2l[b]
        self.p2l[a], self.p2l[b] = lb, la
        if la != -1:
            self.l2p[la] = b
        if lb != -1:
            self.l2p[lb] = a

    def emit_original(self, op: StreamOp) -> None:
        phys = tuple(self.l2p[q] for q in op.qubits)
        if op.gate == "CNOT" and self.directed and len(phys) == 2 \
                and not self.g.allows(phys[0], phys[1]):
            gid = self.group_counter
            self.group_counter += 1
            c, t = phys
            self.ops.append(PhysOp("H", (c,), tag=REVERSE_PART, group=gid))
            self.ops.append(PhysOp("H", (t,), tag=REVERSE_PART, group=gid))
            self.ops.append(PhysOp("CNOT", (t, c), tag=REVERSE_PART, group=gid))
            self.ops.append(PhysOp("H", (c,), tag=REVERSE_PART, group=gid))
            self.ops.append(PhysOp("H", (t,), tag=REVERSE_PART, group=gid))
            self.reverses += 1
            return
        self.ops.append(PhysOp(op.gate, phys, op.clbits))

    def step_toward(self, lq: int, dest: int, forbidden: set[int] | None = None) -> None:
        """Swap logical qubit `lq` one hop along a shortest path to `dest`."""
        pos = self.l2p[lq]
        path = self.g.shortest_path(pos, dest, forbidden)
        if path is None:
            path = self.g.shortest_path(pos, dest)
        if path is None or len(path) < 2:
            raise MappingError(f"no route from {pos} to {dest}")
        self.emit_swap(pos, path[1])

    def route_to_vertex(self, lq: int, dest: int,
                        forbidden: set[int] | None = None, limit: int = 200) -> None:
        steps = 0
        while self.l2p[lq] != dest:
            self.step_toward(lq, dest, forbidden)
            steps += 1
            if steps > limit:
                raise MappingError("routing did not converge")

    def make_adjacent(self, la: int, lb: int, limit: int = 200) -> None:
        steps = 0
        while self.g.dist(self.l2p[la], self.l2p[lb]) > 1:
            self.step_toward(la, self.l2p[lb])
            steps += 1
            if steps > limit:
                raise MappingError("routing did not converge")

    def toffoli_feasible(self, pc1: int, pc2: int, pt: int) -> bool:
        return pc1 != pc2 and self.g.adjacent(pc1, pt) and self.g.adjacent(pc2, pt)

    def place_toffoli(self, c1: int, c2: int, t: int) -> None:
        """Star placement: pick a target vertex with two distinct neighbors
        minimizing total BFS travel, then route all three operands."""
        for _ in range(10):
            pc1, pc2, pt = self.l2p[c1], self.l2p[c2], self.l2p[t]
            if self.toffoli_feasible(pc1, pc2, pt):
                return
            d = self.g.distances()
            best = None
            for vt in range(self.g.n):
                nbrs = self.g.neighbors(vt)
                if len(nbrs) < 2:
                    continue
                for n1 in nbrs:
                    for n2 in nbrs:
                        if n1 == n2:
                            continue
                        cost = d[pt][vt] + d[pc1][n1] + d[pc2][n2]
                        key = (cost, vt, n1, n2)
                        if best is None or key < best:
                            best = key
            if best is None:
                raise MappingError("no vertex with two neighbors for a Toffoli")
            _, vt, n1, n2 = best
            self.route_to_vertex(t, vt)
            self.route_to_vertex(c1, n1, forbidden={vt})
            self.route_to_vertex(c2, n2, forbidden={vt, n1})
        raise MappingError("Toffoli placement did not converge")


def _greedy_route(router: _Router, stream: GateStream) -> None:
    for op in stream.ops:
        if op.gate in _3Q:
            router.place_toffoli(op.qubits[0], op.qubits[1], op.qubits[2])
        elif op.gate in _2Q:
            router.make_adjacent(op.qubits[0], op.qubits[1])
        router.emit_original(op)


# ---------------------------------------------------------------------------
# Initial mappings
# ---------------------------------------------------------------------------

def _identity_mapping(n_logical: int) -> list[int]:
    return list(range(n_logical))


def _interaction_pairs(stream: GateStream) -> list[tuple[tuple[int, int], int]]:
    weight: dict[tuple[int, int], int] = defaultdict(int)
    for op in stream.ops:
        if op.gate in _2Q:
            a, b = op.qubits
            weight[(min(a, b), max(a, b))] += 1
        elif op.gate in _3Q:
            c1, c2, t = op.qubits
            weight[(min(c1, t), max(c1, t))] += 1
            weight[(min(c2, t), max(c2, t))] += 1
    return sorted(weight.items(), key=lambda kv: (-kv[1], kv[0]))


def _wpm_mapping(stream: GateStream, g: CouplingGraph) -> list[int]:
    """Greedy embedding of the heaviest interaction pairs onto graph edges."""
    n_logical = stream.qubit_count
    l2p = [-1] * n_logical
    used: set[int] = set()

    def free_neighbors(pv: int) -> list[int]:
        return [w for w in g.neighbors(pv) if w not in used]

    def place(lq: int, pv: int) -> None:
        l2p[lq] = pv
        used.add(pv)

    free_edges = sorted(g.edges,
                        key=lambda e: (-min(g.degree(e[0]), g.degree(e[1])), e))
    for (a, b), _w in _interaction_pairs(stream):
        ma, mb = l2p[a] != -1, l2p[b] != -1
        if ma and mb:
            continue
        if not ma and not mb:
            edge = next(((u, v) for u, v in free_edges
                         if u not in used and v not in used), None)
            if edge is None:
                continue
            place(a, edge[0])
            place(b, edge[1])
        else:
            anchor, other = (a, b) if ma else (b, a)
            nbrs = free_neighbors(l2p[anchor])
            if nbrs:
                target = max(nbrs, key=lambda w: (g.degree(w), -w))
            else:
                dist_row = g.distances()[l2p[anchor]]
                target = min((v for v in range(g.n) if v not in used),
                             key=lambda v: (dist_row[v], v), default=None)
                if target is None:
                    raise MappingError("device is full")
            place(other, target)
    for lq in range(n_logical):
        if l2p[lq] == -1:
            pv = next(v for v in range(g.n) if v not in used)
            place(lq, pv)
    return l2p


# ---------------------------------------------------------------------------
# sabre_lite
# ---------------------------------------------------------------------------

def _op_lanes(op: StreamOp) -> tuple[int, ...]:
    return op.qubits + tuple(-1 - c for c in op.clbits)


def _build_dag(stream: GateStream):
    preds: list[set[int]] = [set() for _ in stream.ops]
    succs: list[set[int]] = [set() for _ in stream.ops]
    last: dict[int, int] = {}
    for i, op in enumerate(stream.ops):
        for lane in _op_lanes(op):
            if lane in last:
                preds[i].add(last[lane])
                succs[last[lane]].add(i)
        for lane in _op_lanes(op):
            last[lane] = i
    return preds, succs


def _sabre_pass(router: _Router, stream: GateStream) -> None:
    """Front-layer routing that keeps originals in stream order.

    The next stream op is emitted as soon as it is feasible; while it is
    blocked, SWAPs are chosen by scoring the whole dependence-ready front
    plus a look-ahead window, so parallel branches still steer placement.
    """
    g = router.g
    preds, _succs = _build_dag(stream)
    n_ops = len(stream.ops)

    def op_distance(op: StreamOp, l2p: list[int]) -> int:
        d = g.distances()
        if op.gate in _2Q:
            return d[l2p[op.qubits[0]]][l2p[op.qubits[1]]] - 1
        if op.gate in _3Q:
            c1, c2, t = (l2p[q] for q in op.qubits)
            return d[c1][t] + d[c2][t] - 2
        return 0

    def executable(op: StreamOp) -> bool:
        if op.gate in _3Q:
            pc1, pc2, pt = (router.l2p[q] for q in op.qubits)
            return router.toffoli_feasible(pc1, pc2, pt)
        if op.gate in _2Q:
            return g.adjacent(router.l2p[op.qubits[0]], router.l2p[op.qubits[1]])
        return True

    k = 0
    stall = 0
    while k < n_ops:
        op = stream.ops[k]
        if executable(op):
            router.emit_original(op)
            k += 1
            stall = 0
            continue
        stall += 1
        if stall > 3 * g.n:
            if op.gate in _3Q:
                router.place_toffoli(*op.qubits)
            else:
                router.make_adjacent(op.qubits[0], op.qubits[1])
            stall = 0
            continue
        ready = [i for i in range(k, n_ops)
                 if all(p < k for p in preds[i])
                 and (stream.ops[i].gate in _2Q or stream.ops[i].gate in _3Q)]
        front = [stream.ops[i] for i in ready
                 if op_distance(stream.ops[i], router.l2p) > 0]
        if not front:
            front = [op]
        window = [stream.ops[i] for i in range(k + 1, min(k + 1 + LOOKAHEAD_WINDOW, n_ops))
                  if stream.ops[i].gate in _2Q or stream.ops[i].gate in _3Q]
        candidates: set[tuple[int, int]] = set()
        for fop in front:
            for q in fop.qubits:
                pq = router.l2p[q]
                for nb in g.neighbors(pq):
                    candidates.add((min(pq, nb), max(pq, nb)))

        def score(edge: tuple[int, int]) -> float:
            u, v = edge
            trial = list(router.l2p)
            lu, lv = router.p2l[u], router.p2l[v]
            if lu != -1:
                trial[lu] = v
            if lv != -1:
                trial[lv] = u
            total = float(sum(op_distance(fop, trial) for fop in front))
            total += LOOKAHEAD_WEIGHT * sum(op_distance(wop, trial) for wop in window)
            return total

        best = min(sorted(candidates), key=lambda e: (score(e), e))
        router.emit_swap(*best)


def _sabre_mapping(stream: GateStream, g: CouplingGraph, seed: int,
                   directed: bool) -> list[int]:
    rng = random.Random(seed)
    vertices = list(range(g.n))
    rng.shuffle(vertices)
    initial = vertices[:stream.qubit_count]
    # reverse pass refines the placement: route the mirrored circuit and keep
    # the mapping it ends in
    reverse = GateStream(list(reversed(stream.ops)), stream.qubit_count,
                         stream.clbit_count)
    router = _Router(g, stream.qubit_count, initial, directed)
    _sabre_pass(router, reverse)
    return [router.l2p[q] for q in range(stream.qubit_count)]


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def allocate(circuit: GateStream, g: CouplingGraph, policy: str, seed: int = 0,
             directed: bool = False) -> tuple[PhysicalCircuit, Metrics]:
    if policy not in POLICIES:
        raise MappingError(f"unknown policy '{policy}' (known: {', '.join(POLICIES)})")
    if circuit.qubit_count > g.n:
        raise MappingError(
            f"circuit needs {circuit.qubit_count} qubits, device has {g.n}")
    start = time.perf_counter()
    if policy == "trivial":
        initial = _identity_mapping(circuit.qubit_count)
        router = _Router(g, circuit.qubit_count, initial, directed)
        _greedy_route(router, circuit)
    elif policy == "wpm_lite":
        initial = _wpm_mapping(circuit, g)
        router = _Router(g, circuit.qubit_count, initial, directed)
        _greedy_route(router, circuit)
    else:
        initial = _sabre_mapping(circuit, g, seed, directed)
        router = _Router(g, circuit.qubit_count, initial, directed)
        _sabre_pass(router, circuit)
    elapsed = time.perf_counter() - start
    phys = PhysicalCircuit(
        graph=g.name,
        ops=router.ops,
        initial_mapping=tuple(initial),
        final_mapping=tuple(router.l2p),
        swaps=router.swaps,
        reverses=router.reverses,
        logical_size=len(circuit.ops),
    )
    added = 3 * router.swaps + 5 * router.reverses
    metrics = Metrics(
        depth=depth(router.ops),
        size=len(circuit.ops) + added,
        added_gates=added,
        swaps=router.swaps,
        reverses=router.reverses,
        alloc_time=elapsed,
    )
    return phys, metrics


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def _groups(ops: list[PhysOp]):
    i = 0
    while i < len(ops):
        op = ops[i]
        if op.tag == ORIGINAL:
            yield (ORIGINAL, [op])
            i += 1
        else:
            j = i
            while j < len(ops) and ops[j].group == op.group and ops[j].tag == op.tag:
                j += 1
            yield (op.tag, ops[i:j])
            i = j


def verify_mapped(logical: GateStream, phys: PhysicalCircuit,
                  g: CouplingGraph) -> bool:
    """Replay the physical circuit against the logical stream.

    Swap-part groups must be 3 CNOTs over one edge and update the tracked
    mapping; reverse-part groups must be the 4H+1CNOT pattern consuming one
    orientation-flipped CNOT; every original op must act on the current
    images of its logical operands with adjacency satisfied.
    """
    l2p = list(phys.initial_mapping)
    pending = list(logical.ops)
    k = 0

    def adjacency_ok(gate: str, qubits: tuple[int, ...]) -> bool:
        if gate in _3Q:
            c1, c2, t = qubits
            return c1 != c2 and g.adjacent(c1, t) and g.adjacent(c2, t)
        if gate in _2Q:
            return g.adjacent(qubits[0], qubits[1])
        return True

    for tag, group in _groups(phys.ops):
        if tag == SWAP_PART:
            if len(group) != 3:
                return False
            a, b = group[0].qubits
            shape = [("CNOT", (a, b)), ("CNOT", (b, a)), ("CNOT", (a, b))]
            if [(op.gate, op.qubits) for op in group] != shape:
                return False
            if not g.adjacent(a, b):
                return False
            la = next((q for q, p in enumerate(l2p) if p == a), -1)
            lb = next((q for q, p in enumerate(l2p) if p == b), -1)
            if la != -1:
                l2p[la] = b
            if lb != -1:
                l2p[lb] = a
        elif tag == REVERSE_PART:
            if k >= len(pending):
                return False
            lop = pending[k]
            if lop.gate != "CNOT" or len(group) != 5:
                return False
            c, t = (l2p[q] for q in lop.qubits)
            shape = [("H", (c,)), ("H", (t,)), ("CNOT", (t, c)),
                     ("H", (c,)), ("H", (t,))]
            if [(op.gate, op.qubits) for op in group] != shape:
                return False
            if not g.adjacent(c, t):
                return False
            k += 1
        else:
            op = group[0]
            if k >= len(pending):
                return False
            lop = pending[k]
            expect = tuple(l2p[q] for q in lop.qubits)
            if op.gate != lop.gate or op.qubits != expect or op.clbits != lop.clbits:
                return False
            if not adjacency_ok(op.gate, op.qubits):
                return False
            k += 1
    return k == len(pending)
