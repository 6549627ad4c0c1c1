"""Affine scheduling: identity, Pluto min/max fusion, greedy minimum latency.

Instead of solving Farkas-linearized ILPs, schedulers search bounded candidate
rows per sub-statement (a signed coefficient on one still-unused iterator plus
a constant offset in [0, S] with S the sub-statement count) and validate every
constraint exactly on enumerated dependence-instance pairs.  Pairs are
collected for a set of validation parameter bindings plus the scop's own
binding, so a solution accepted here is legal at every binding the acceptance
suite exercises; legality is re-checked at the codegen binding regardless.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .affine import AffineExpr, AffineMap, ParamBinding, pad_schedules
from .deps import DepGraph, _condense, compute_instance_deps, dep_graph
from .scop import Scop, SubStatement

# Candidate iterator coefficients in canonical (tie-break) order.
COEFF_ORDER = (1, -1, 2, -2)
# Parameter values at which scheduling constraints are instantiated.
VALIDATION_VALUES = (2, 4, 6, 8, 12)

NodeKey = tuple[str, int]


class ScheduleError(Exception):
    pass


@dataclass(frozen=True)
class Row:
    """One schedule dimension for one sub-statement: coeff * iterator + const."""

    iterator: str | None
    coeff: int
    const: int

    def eval(self, iterators: tuple[str, ...], point: tuple[int, ...]) -> int:
        if self.iterator is None or self.coeff == 0:
            return self.const
        return self.coeff * point[iterators.index(self.iterator)] + self.const

    def to_expr(self) -> AffineExpr:
        if self.iterator is None or self.coeff == 0:
            return AffineExpr.constant(self.const)
        return AffineExpr.var(self.iterator, self.coeff) + self.const

    def is_scalar(self) -> bool:
        return self.iterator is None or self.coeff == 0


@dataclass(frozen=True)
class BoundFunction:
    """v(p) = u . p + w bounding every dependence distance in one dimension."""

    u: tuple[tuple[str, int], ...]
    w: int

    def value(self, binding: ParamBinding) -> int:
        return self.w + sum(c * binding[p] for p, c in self.u)


@dataclass
class ScheduleSolution:
    transform: str
    maps: dict[NodeKey, AffineMap]
    rows: dict[NodeKey, list[Row]] = field(default_factory=dict)
    bounds: list[BoundFunction] = field(default_factory=list)

    def dim(self) -> int:
        return next(iter(self.maps.values())).dim() if self.maps else 0

    def timestamp(self, sub: SubStatement, point: tuple[int, ...],
                  binding: ParamBinding) -> tuple[int, ...]:
        return self.maps[sub.key].apply(point, binding)

    def debug_dump(self) -> str:
        lines = [f"transform: {self.transform}"]
        for key, rows in self.rows.items():
            txt = ", ".join(str(r.to_expr()) for r in rows)
            lines.append(f"  {key[0]}.{key[1]}: <{txt}>")
        for d, b in enumerate(self.bounds):
            if b is not None:
                lines.append(f"  dim {d} bound: w={b.w}")
        return "\n".join(lines) + "\n"


@dataclass
class LegalityReport:
    overall: bool
    # per statement-level relation: status plus the deciding dimension
    statuses: dict[tuple, tuple[str, int | None]]
    violations: list[str] = field(default_factory=list)

    STRONG, WEAK, VIOLATED = "strongly_satisfied", "weakly_satisfied", "violated"


# ---------------------------------------------------------------------------
# Constraint extraction
# ---------------------------------------------------------------------------

@dataclass
class CEdge:
    """Scheduling constraint: ordered instance point pairs between two nodes."""

    src: NodeKey
    dst: NodeKey
    pairs: list[tuple[tuple[int, ...], tuple[int, ...]]]
    strong: bool = False

    def deltas(self, rows: dict[NodeKey, Row], iters: dict[NodeKey, tuple[str, ...]]):
        rs, rd = rows[self.src], rows[self.dst]
        its_s, its_d = iters[self.src], iters[self.dst]
        for ps, pd in self.pairs:
            yield rd.eval(its_d, pd) - rs.eval(its_s, ps)


def validation_bindings(scop: Scop) -> list[ParamBinding]:
    """The scop's own binding plus uniform sweeps of every parameter."""
    bindings = [dict(scop.binding)]
    for v in VALIDATION_VALUES:
        b = {p: v for p in scop.binding}
        if b and b not in bindings:
            bindings.append(b)
    return bindings or [{}]


def constraint_edges(scop: Scop) -> list[CEdge]:
    merged: dict[tuple[NodeKey, NodeKey], CEdge] = {}
    order: list[tuple[NodeKey, NodeKey]] = []
    for binding in validation_bindings(scop):
        for e in compute_instance_deps(scop, binding):
            key = (e.source.node, e.sink.node)
            ce = merged.get(key)
            if ce is None:
                ce = CEdge(key[0], key[1], [])
                merged[key] = ce
                order.append(key)
            pair = (e.source.point, e.sink.point)
            if pair not in ce.pairs:
                ce.pairs.append(pair)
    return [merged[k] for k in order]


# ---------------------------------------------------------------------------
# Scheduling machinery
# ---------------------------------------------------------------------------

class _Scheduler:
    def __init__(self, scop: Scop):
        self.scop = scop
        self.nodes: list[NodeKey] = [s.key for s in scop.subs]
        self.subs: dict[NodeKey, SubStatement] = {s.key: s for s in scop.subs}
        self.iters: dict[NodeKey, tuple[str, ...]] = {
            s.key: s.domain.iterators for s in scop.subs}
        self.edges = constraint_edges(scop)
        self.rows: dict[NodeKey, list[Row]] = {n: [] for n in self.nodes}
        self.used: dict[NodeKey, set[str]] = {n: set() for n in self.nodes}
        self.bounds: list[BoundFunction | None] = []
        self.offset_max = max(2, len(self.nodes))
        pts = [abs(c) for e in self.edges for pr in e.pairs for pt in pr for c in pt]
        self.delta_cap = 4 * max(pts, default=1) + 2 * self.offset_max + 4
        self.multipoint: dict[NodeKey, bool] = {}
        big = {p: max(VALIDATION_VALUES) for p in scop.binding} or scop.binding
        for s in scop.subs:
            try:
                count = len(s.domain.enumerate(big or {}))
            except Exception:
                count = 2
            self.multipoint[s.key] = count >= 2

    # -- candidates ---------------------------------------------------------

    def candidates(self, node: NodeKey) -> list[Row]:
        out: list[Row] = []
        unused = [it for it in self.iters[node] if it not in self.used[node]]
        if not self.multipoint[node]:
            for c in range(self.offset_max + 1):
                out.append(Row(None, 0, c))
        for it in unused:
            for a in COEFF_ORDER:
                for c in range(self.offset_max + 1):
                    out.append(Row(it, a, c))
        return out

    def exhausted(self, node: NodeKey) -> bool:
        return all(it in self.used[node] for it in self.iters[node])

    def needs_dims(self, node: NodeKey) -> bool:
        return self.multipoint[node] and not self.exhausted(node)

    def commit(self, assignment: dict[NodeKey, Row], group: list[NodeKey]) -> None:
        for n in group:
            row = assignment[n]
            self.rows[n].append(row)
            if not row.is_scalar():
                self.used[n].add(row.iterator)

    def mark_strong(self, assignment: dict[NodeKey, Row], group: list[NodeKey]) -> None:
        gset = set(group)
        for e in self.edges:
            if e.strong or e.src not in gset or e.dst not in gset:
                continue
            if min(e.deltas(assignment, self.iters), default=1) >= 1:
                e.strong = True

    def group_edges(self, group: list[NodeKey], only_unsat: bool = False) -> list[CEdge]:
        gset = set(group)
        return [e for e in self.edges
                if e.src in gset and e.dst in gset and not (only_unsat and e.strong)]

    def add_scalar_dim(self, groups: list[list[NodeKey]]) -> None:
        for k, grp in enumerate(groups):
            for n in grp:
                self.rows[n].append(Row(None, 0, k))
        self.bounds.append(None)
        # a splitter strongly separates every edge crossing group boundaries
        index = {n: k for k, grp in enumerate(groups) for n in grp}
        for e in self.edges:
            if not e.strong and e.src in index and e.dst in index \
                    and index[e.src] < index[e.dst]:
                e.strong = True

    def condense(self, group: list[NodeKey]) -> list[list[NodeKey]]:
        arcs = {(e.src, e.dst) for e in self.group_edges(group, only_unsat=True)
                if e.src != e.dst}
        return _condense(group, arcs)

    def pad_all(self) -> None:
        width = max((len(r) for r in self.rows.values()), default=0)
        for n in self.nodes:
            while len(self.rows[n]) < width:
                self.rows[n].append(Row(None, 0, 0))

    # -- feasibility search ---------------------------------------------------

    def _search(self, group: list[NodeKey], check) -> dict[NodeKey, Row] | None:
        """First assignment (in canonical candidate order) accepted by `check`.

        `check(node, row, partial)` validates `row` against every constraint
        edge joining `node` to itself or an already assigned node.
        """
        order = [n for n in group]
        cand = {n: self.candidates(n) for n in order}
        if any(not cand[n] for n in order):
            return None
        partial: dict[NodeKey, Row] = {}

        def rec(k: int) -> bool:
            if k == len(order):
                return True
            node = order[k]
            for row in cand[node]:
                if check(node, row, partial):
                    partial[node] = row
                    if rec(k + 1):
                        return True
                    del partial[node]
            return False

        return dict(partial) if rec(0) else None

    def _edge_ok(self, e: CEdge, rows: dict[NodeKey, Row], lo: int | None,
                 hi: int | None) -> bool:
        for d in e.deltas(rows, self.iters):
            if lo is not None and d < lo:
                return False
            if hi is not None and d > hi:
                return False
        return True

    # -- pluto ----------------------------------------------------------------

    def pluto_group(self, group: list[NodeKey], fusion: str, depth: int = 0) -> None:
        if depth > 40:
            raise ScheduleError("scheduler failed to converge")
        while True:
            unsat = self.group_edges(group, only_unsat=True)
            pending = [n for n in group if self.needs_dims(n)]
            if not unsat and not pending:
                return
            if fusion == "min" and len(group) > 1:
                comps = self.condense(group)
                if len(comps) > 1:
                    self.add_scalar_dim(comps)
                    for comp in comps:
                        self.pluto_group(comp, fusion, depth + 1)
                    return
            found = self.solve_pluto_dim(group)
            if found is not None:
                assignment, bound = found
                self.commit(assignment, group)
                self.bounds.append(bound)
                self.mark_strong(assignment, group)
                continue
            comps = self.condense(group)
            if len(comps) <= 1:
                raise ScheduleError(
                    f"no legal schedule row for group {group} within search bounds")
            self.add_scalar_dim(comps)
            for comp in comps:
                self.pluto_group(comp, fusion, depth + 1)
            return

    def solve_pluto_dim(self, group: list[NodeKey]):
        """Minimize the distance bound, then pick the lex-least feasible rows.

        The bound v = u.p + w reduces to the constant w on this corpus: every
        relation has constant (parameter-free) distances, so the minimal u is
        the zero vector and only w is searched.
        """
        edges = self.group_edges(group)
        live = [n for n in group if not self.exhausted(n) or not self.multipoint[n]]
        if set(live) != set(group):
            return None

        def check_at(v: int):
            def check(node: NodeKey, row: Row, partial: dict[NodeKey, Row]) -> bool:
                trial = dict(partial)
                trial[node] = row
                for e in edges:
                    if e.src in trial and e.dst in trial:
                        lo = None if e.strong else 0
                        if not self._edge_ok(e, trial, lo, v):
                            return False
                return True
            return check

        lo_w, hi_w = 0, self.delta_cap
        if self._search(group, check_at(hi_w)) is None:
            return None
        while lo_w < hi_w:
            mid = (lo_w + hi_w) // 2
            if self._search(group, check_at(mid)) is not None:
                hi_w = mid
            else:
                lo_w = mid + 1
        assignment = self._search(group, check_at(lo_w))
        u = tuple((p, 0) for p in sorted(self.scop.binding))
        return assignment, BoundFunction(u, lo_w)

    # -- feautrier ------------------------------------------------------------

    def feautrier(self) -> None:
        group = list(self.nodes)
        guard = 0
        while True:
            unsat = self.group_edges(group, only_unsat=True)
            if not unsat:
                break
            guard += 1
            if guard > 20:
                raise ScheduleError("greedy scheduler failed to converge")
            found = self.solve_feautrier_dim(group, unsat)
            if found is None:
                raise ScheduleError(
                    "no schedule row strongly satisfies any remaining dependence")
            assignment = found
            self.commit(assignment, group)
            self.bounds.append(None)
            self.mark_strong(assignment, group)
        # remaining iterators only order instances within already-satisfied code
        while any(self.needs_dims(n) for n in group):
            assignment = {}
            for n in group:
                unused = [it for it in self.iters[n] if it not in self.used[n]]
                if unused and self.multipoint[n]:
                    assignment[n] = Row(unused[0], 1, 0)
                else:
                    assignment[n] = Row(None, 0, 0)
            self.commit(assignment, group)
            self.bounds.append(None)

    def solve_feautrier_dim(self, group: list[NodeKey], unsat: list[CEdge]):
        """Rows strongly satisfying as many unresolved dependences as possible,
        holding every unresolved dependence weakly satisfied."""
        def check_all_strong(node, row, partial):
            trial = dict(partial)
            trial[node] = row
            for e in unsat:
                if e.src in trial and e.dst in trial:
                    if not self._edge_ok(e, trial, 1, None):
                        return False
            return True

        full = self._search(group, check_all_strong)
        if full is not None:
            return full

        # branch and bound on the number of strongly satisfied dependences
        order = list(group)
        cand = {n: self.candidates(n) for n in order}
        if any(not cand[n] for n in order):
            return None
        best: dict = {"count": -1, "rows": None}

        def strong_count(rows: dict[NodeKey, Row]) -> int | None:
            count = 0
            for e in unsat:
                if e.src in rows and e.dst in rows:
                    lo = min(e.deltas(rows, self.iters), default=1)
                    if lo < 0:
                        return None
                    if lo >= 1:
                        count += 1
            return count

        def rec(k: int, partial: dict[NodeKey, Row]) -> None:
            if k == len(order):
                count = strong_count(partial)
                if count is not None and count > best["count"]:
                    best["count"] = count
                    best["rows"] = dict(partial)
                return
            node = order[k]
            decided = {n for n in order[:k + 1]}
            undecided_edges = sum(
                1 for e in unsat if e.src not in decided or e.dst not in decided)
            for row in cand[node]:
                partial[node] = row
                count = strong_count(partial)
                if count is not None and count + undecided_edges > best["count"]:
                    rec(k + 1, partial)
                del partial[node]

        rec(0, {})
        if best["count"] <= 0:
            return None
        return best["rows"]


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def schedule_base(scop: Scop) -> ScheduleSolution:
    """The program-assembly identity schedules, unchanged."""
    maps = {s.key: s.schedule for s in scop.subs}
    rows = {}
    for s in scop.subs:
        rlist = []
        for out in s.schedule.outputs:
            cm = out.coeff_map()
            if not cm:
                rlist.append(Row(None, 0, out.const))
            else:
                (it, a), = cm.items()
                rlist.append(Row(it, a, out.const))
        rows[s.key] = rlist
    return ScheduleSolution("base", maps, rows)


def _solution_from_rows(scop: Scop, rows: dict[NodeKey, list[Row]],
                        transform: str, bounds) -> ScheduleSolution:
    maps = {}
    for s in scop.subs:
        outputs = tuple(r.to_expr() for r in rows[s.key])
        maps[s.key] = AffineMap(s.domain.iterators, outputs)
    padded = pad_schedules([maps[s.key] for s in scop.subs])
    maps = {s.key: m for s, m in zip(scop.subs, padded)}
    return ScheduleSolution(transform, maps, rows,
                            [b for b in bounds if b is not None])


def schedule_pluto(scop: Scop, graph: DepGraph | None = None,
                   fusion: str = "max") -> ScheduleSolution:
    if fusion not in ("min", "max"):
        raise ValueError(f"fusion must be 'min' or 'max', got {fusion!r}")
    sched = _Scheduler(scop)
    sched.pluto_group(list(sched.nodes), fusion)
    sched.pad_all()
    return _solution_from_rows(scop, sched.rows, f"pluto{fusion}", sched.bounds)


def schedule_feautrier(scop: Scop, graph: DepGraph | None = None) -> ScheduleSolution:
    sched = _Scheduler(scop)
    sched.feautrier()
    sched.pad_all()
    return _solution_from_rows(scop, sched.rows, "feautrier", sched.bounds)


def apply_transform(scop: Scop, transform: str | None = None,
                    graph: DepGraph | None = None) -> ScheduleSolution:
    kind = transform or scop.transform
    if kind == "base":
        return schedule_base(scop)
    if graph is None:
        graph = dep_graph(scop)
    if kind == "plutomin":
        return schedule_pluto(scop, graph, "min")
    if kind == "plutomax":
        return schedule_pluto(scop, graph, "max")
    if kind == "feautrier":
        return schedule_feautrier(scop, graph)
    raise ValueError(f"unknown transform '{kind}'")


def check_legality(scop: Scop, solution: ScheduleSolution,
                   binding: ParamBinding | None = None) -> LegalityReport:
    """Replay every dependence instance under the transformed timestamps."""
    binding = scop.binding if binding is None else binding
    statuses: dict[tuple, tuple[str, int | None]] = {}
    violations: list[str] = []
    worst: dict[tuple, tuple[int, int | None]] = {}      # rank, dim
    RANK = {LegalityReport.STRONG: 0, LegalityReport.WEAK: 1, LegalityReport.VIOLATED: 2}
    for e in compute_instance_deps(scop, binding):
        key = (e.source.node, e.sink.node, e.kind)
        src_ts = solution.maps[e.source.node].apply(e.source.point, binding)
        dst_ts = solution.maps[e.sink.node].apply(e.sink.point, binding)
        status, dim = LegalityReport.WEAK, None
        for d, (a, b) in enumerate(zip(src_ts, dst_ts)):
            if a < b:
                status, dim = LegalityReport.STRONG, d
                break
            if a > b:
                status, dim = LegalityReport.VIOLATED, d
                break
        if status == LegalityReport.VIOLATED:
            violations.append(
                f"{e.source.stmt}{list(e.source.point)}@{list(src_ts)} -> "
                f"{e.sink.stmt}{list(e.sink.point)}@{list(dst_ts)}")
        rank = RANK[status]
        prev = worst.get(key)
        if prev is None or rank > prev[0] or (rank == prev[0] and (dim or 0) > (prev[1] or 0)):
            worst[key] = (rank, dim)
    for key, (rank, dim) in worst.items():
        name = [LegalityReport.STRONG, LegalityReport.WEAK, LegalityReport.VIOLATED][rank]
        statuses[key] = (name, dim if name == LegalityReport.STRONG else None)
    overall = all(st == LegalityReport.STRONG for st, _ in statuses.values())
    return LegalityReport(overall, statuses, violations)
