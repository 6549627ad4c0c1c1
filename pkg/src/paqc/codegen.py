"""Code generation: loop-nest scanning, gate streams, and OpenQASM 2.0.

Scanning turns the per-sub-statement schedule rows into a C-like loop AST
whose syntactic visit order equals the lexicographic timestamp order (verified
against direct enumeration in the tests).  Flattening enumerates instances
directly and sorts them by timestamp; QASM emission renders the flat stream.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .affine import AffineExpr, ParamBinding
from .scop import Scop, SubStatement
from .transform import NodeKey, Row, ScheduleSolution, check_legality


class CodegenError(Exception):
    pass


# Rendering of gate names inside loop listings and in QASM.
LOOP_NAMES = {"CNOT": "CX", "Toffoli": "CCX", "Swap": "SWAP", "Measure": "MEASURE"}
QASM_NAMES = {"X": "x", "Y": "y", "Z": "z", "H": "h", "CNOT": "cx", "CY": "cy",
              "CZ": "cz", "Swap": "swap", "Toffoli": "ccx", "Measure": "measure"}
QASM_REVERSE = {v: k for k, v in QASM_NAMES.items()}


# ---------------------------------------------------------------------------
# Gate streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StreamOp:
    timestamp: tuple[int, ...]
    gate: str
    qubits: tuple[int, ...]
    clbits: tuple[int, ...] = ()

    def operands(self) -> tuple[int, ...]:
        return self.qubits + self.clbits


@dataclass
class GateStream:
    ops: list[StreamOp]
    qubit_count: int
    clbit_count: int

    def __len__(self) -> int:
        return len(self.ops)

    def multiset(self) -> dict:
        counts: dict = {}
        for op in self.ops:
            key = (op.gate, op.qubits, op.clbits)
            counts[key] = counts.get(key, 0) + 1
        return counts


def flatten(scop: Scop, solution: ScheduleSolution,
            binding: ParamBinding | None = None) -> GateStream:
    """Enumerate all gate instances and sort them into execution order."""
    binding = scop.binding if binding is None else binding
    records = []
    for sub in scop.subs:
        sig = sub.gate
        for point in sub.domain.enumerate(binding):
            ts = solution.maps[sub.key].apply(point, binding)
            qubits, clbits = [], []
            for k, arg in enumerate(sub.args):
                idx = arg.eval_point(sub.domain.iterators, point, binding)
                if idx < 0:
                    raise CodegenError(
                        f"negative register index {idx} from {sub.label} at {point}")
                (qubits if sig.spaces[k] == "q" else clbits).append(idx)
            records.append((ts, sub.assembly_index, point,
                            StreamOp(ts, sig.name, tuple(qubits), tuple(clbits))))
    records.sort(key=lambda r: (r[0], r[1], r[2]))
    ops = [r[3] for r in records]
    qmax = max((q for op in ops for q in op.qubits), default=-1)
    cmax = max((c for op in ops for c in op.clbits), default=-1)
    return GateStream(ops, qmax + 1, cmax + 1)


# ---------------------------------------------------------------------------
# Loop AST
# ---------------------------------------------------------------------------

@dataclass
class GateLeaf:
    node: NodeKey
    gate: str
    args: list[AffineExpr]          # over loop variables c0, c1, ...
    spaces: tuple[str, ...] = ()


@dataclass
class GuardNode:
    conds: list[tuple[AffineExpr, str]]    # ("ge0" | "eq0") over loop variables
    body: list = field(default_factory=list)


@dataclass
class LoopNode:
    var: str
    lb: AffineExpr
    ub: AffineExpr
    body: list = field(default_factory=list)


@dataclass
class LoopAST:
    items: list = field(default_factory=list)


def _node_rows(solution: ScheduleSolution, key: NodeKey) -> list[Row]:
    rows = list(solution.rows[key])
    width = solution.dim()
    while len(rows) < width:
        rows.append(Row(None, 0, 0))
    return rows


def _symbolic_bounds(sub: SubStatement, it: str, env: dict[str, AffineExpr],
                     binding: ParamBinding):
    """Lower/upper bound expressions for one iterator, over outer loop vars.

    Each domain constraint is folded at the dimension fixing the last iterator
    it mentions.  Returns (lo, hi, extra_lo, extra_hi): the interval used for
    the loop header plus any further bounds that must become guards.
    """
    los: list[AffineExpr] = []
    his: list[AffineExpr] = []
    fixed = set(env)
    for expr, kind in sub.domain.constraints:
        names = expr.names() - set(binding)
        if it not in names:
            continue
        if not names - {it} <= fixed:
            raise CodegenError(
                f"cannot derive bounds for '{it}': constraint {expr} depends on "
                f"iterators fixed later")
        c = expr.coeff_map()[it]
        if abs(c) != 1:
            raise CodegenError(f"non-unit iterator coefficient in bound: {expr}")
        rest = _subst(expr - AffineExpr.var(it, c), env, binding)
        if kind == "eq0":
            val = rest.scale(-c)          # it == -rest/c with c = +-1
            los.append(val)
            his.append(val)
        elif c > 0:
            los.append(rest.scale(-1))    # it >= -rest
        else:
            his.append(rest)              # it <= rest
    if not los or not his:
        raise CodegenError(f"iterator '{it}' is unbounded")
    lo, extra_lo = _merge_bounds(los, tightest=max)
    hi, extra_hi = _merge_bounds(his, tightest=min)
    return lo, hi, extra_lo, extra_hi


def _merge_bounds(cands: list[AffineExpr], tightest):
    """Pick one loop bound; everything else is returned for guard insertion."""
    const = [c for c in cands if c.is_constant()]
    sym = [c for c in cands if not c.is_constant()]
    if not sym:
        return AffineExpr.constant(tightest(c.const for c in const)), []
    return sym[0], sym[1:] + const


def _subst(expr: AffineExpr, env: dict[str, AffineExpr], binding: ParamBinding) -> AffineExpr:
    e = expr.substitute(env)
    consts = {p: AffineExpr.constant(v) for p, v in binding.items()}
    return e.substitute(consts)


def scan(scop: Scop, solution: ScheduleSolution,
         binding: ParamBinding | None = None) -> LoopAST:
    """Build the loop AST visiting instances in schedule order.

    Guards accumulated for a sub-statement (domain conditions that its loop
    span does not capture, or alignment with a fused loop's wider range) are
    attached around its gate leaf; they filter instances without affecting
    visit order.
    """
    binding = scop.binding if binding is None else binding
    subs = {s.key: s for s in scop.subs}
    rows = {s.key: _node_rows(solution, s.key) for s in scop.subs}
    width = solution.dim()
    order = [s.key for s in scop.subs]

    def leaf_for(k: NodeKey, env: dict[str, AffineExpr], guards: list):
        sub = subs[k]
        args = [_subst(a, env, binding) for a in sub.args]
        leaf = GateLeaf(k, sub.gate.name, args, sub.gate.spaces)
        return GuardNode(guards, [leaf]) if guards else leaf

    def build(keys: list[NodeKey], dim: int,
              env: dict[NodeKey, dict[str, AffineExpr]],
              guards: dict[NodeKey, list]) -> list:
        if dim == width:
            return [leaf_for(k, env[k], guards[k]) for k in keys]
        node_rows = {k: rows[k][dim] for k in keys}
        if all(r.is_scalar() for r in node_rows.values()):
            groups: dict[int, list[NodeKey]] = {}
            for k in keys:
                groups.setdefault(node_rows[k].const, []).append(k)
            out = []
            for val in sorted(groups):
                out.extend(build(groups[val], dim + 1, env, guards))
            return out

        var = f"c{dim}"
        spans: dict[NodeKey, tuple[AffineExpr, AffineExpr]] = {}
        extra_conds: dict[NodeKey, list] = {}
        for k in keys:
            r = node_rows[k]
            if r.is_scalar():
                c = AffineExpr.constant(r.const)
                spans[k] = (c, c)
                extra_conds[k] = []
                continue
            lo, hi, extra_lo, extra_hi = _symbolic_bounds(
                subs[k], r.iterator, env[k], binding)
            if r.coeff == 1:
                it_inv = AffineExpr.var(var) - r.const
                spans[k] = (lo + r.const, hi + r.const)
            elif r.coeff == -1:
                it_inv = AffineExpr.constant(r.const) - AffineExpr.var(var)
                spans[k] = (AffineExpr.constant(r.const) - hi,
                            AffineExpr.constant(r.const) - lo)
            else:
                raise CodegenError(f"non-invertible schedule row for {k}: {r}")
            extra_conds[k] = [(it_inv - b, "ge0") for b in extra_lo] \
                + [(b - it_inv, "ge0") for b in extra_hi]

        narrow: dict[NodeKey, list] = {}
        if len(keys) == 1:
            k = keys[0]
            loop_lo, loop_hi = spans[k]
            narrow[k] = extra_conds[k]
        else:
            for k in keys:
                lo, hi = spans[k]
                if not lo.is_constant() or not hi.is_constant():
                    raise CodegenError(
                        "fused statements need constant loop bounds at this scale")
            loop_lo = AffineExpr.constant(min(spans[k][0].const for k in keys))
            loop_hi = AffineExpr.constant(max(spans[k][1].const for k in keys))
            for k in keys:
                lo, hi = spans[k]
                conds = list(extra_conds[k])
                if node_rows[k].is_scalar():
                    conds.append((AffineExpr.var(var) - lo, "eq0"))
                else:
                    if lo.const > loop_lo.const:
                        conds.append((AffineExpr.var(var) - lo, "ge0"))
                    if hi.const < loop_hi.const:
                        conds.append((hi - AffineExpr.var(var), "ge0"))
                narrow[k] = conds

        env2: dict[NodeKey, dict[str, AffineExpr]] = {}
        guards2: dict[NodeKey, list] = {}
        for k in keys:
            r = node_rows[k]
            e = dict(env[k])
            if not r.is_scalar():
                if r.coeff == 1:
                    e[r.iterator] = AffineExpr.var(var) - r.const
                else:
                    e[r.iterator] = AffineExpr.constant(r.const) - AffineExpr.var(var)
            env2[k] = e
            guards2[k] = guards[k] + narrow.get(k, [])
        return [LoopNode(var, loop_lo, loop_hi, build(keys, dim + 1, env2, guards2))]

    items = build(order, 0, {k: {} for k in order}, {k: [] for k in order})
    return LoopAST(items)


# ---------------------------------------------------------------------------
# Loop listing emission
# ---------------------------------------------------------------------------

def _render_cond(expr: AffineExpr, kind: str) -> str:
    cm = expr.coeff_map()
    if len(cm) == 1:
        (name, c), = cm.items()
        if c == 1:
            op = "==" if kind == "eq0" else ">="
            return f"{name} {op} {-expr.const}"
        if c == -1:
            op = "==" if kind == "eq0" else "<="
            return f"{name} {op} {expr.const}"
    op = "==" if kind == "eq0" else ">="
    return f"{expr} {op} 0"


def emit_loops(ast: LoopAST) -> str:
    """C-like rendering; iterator names follow schedule dimensions (c0, c1...)."""
    lines: list[str] = []

    def emit(item, depth: int) -> None:
        pad = "  " * depth
        if isinstance(item, LoopNode):
            lines.append(f"{pad}for (int {item.var} = {item.lb}; "
                         f"{item.var} <= {item.ub}; {item.var} += 1) {{")
            for child in item.body:
                emit(child, depth + 1)
            lines.append(f"{pad}}}")
        elif isinstance(item, GuardNode):
            cond = " && ".join(_render_cond(e, k) for e, k in item.conds)
            lines.append(f"{pad}if ({cond}) {{")
            for child in item.body:
                emit(child, depth + 1)
            lines.append(f"{pad}}}")
        else:
            name = LOOP_NAMES.get(item.gate, item.gate)
            args = "".join(f"[{a}]" for a in item.args)
            lines.append(f"{pad}{name}{args};")

    for item in ast.items:
        emit(item, 0)
    return "\n".join(lines) + ("\n" if lines else "")


def walk_ast(ast: LoopAST) -> list[tuple[str, tuple[int, ...]]]:
    """Execute the loop AST, yielding (gate, operands) in syntactic order."""
    out: list[tuple[str, tuple[int, ...]]] = []

    def run(item, env: dict[str, int]) -> None:
        if isinstance(item, LoopNode):
            lb = item.lb.eval(env)
            ub = item.ub.eval(env)
            for v in range(lb, ub + 1):
                env2 = dict(env)
                env2[item.var] = v
                for child in item.body:
                    run(child, env2)
        elif isinstance(item, GuardNode):
            for expr, kind in item.conds:
                v = expr.eval(env)
                if (kind == "eq0" and v != 0) or (kind == "ge0" and v < 0):
                    return
            for child in item.body:
                run(child, env)
        else:
            out.append((item.gate, tuple(a.eval(env) for a in item.args)))

    for item in ast.items:
        run(item, {})
    return out


# ---------------------------------------------------------------------------
# OpenQASM 2.0
# ---------------------------------------------------------------------------

@dataclass
class QasmProgram:
    text: str
    op_count: int


def emit_qasm(stream: GateStream) -> QasmProgram:
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";']
    lines.append(f"qreg q[{max(1, stream.qubit_count)}];")
    if stream.clbit_count > 0:
        lines.append(f"creg c[{stream.clbit_count}];")
    unsupported = []
    for op in stream.ops:
        name = QASM_NAMES.get(op.gate)
        if name is None:
            unsupported.append(op.gate)
            lines.append(f"// unsupported {op.gate}")
            continue
        if op.gate == "Measure":
            lines.append(f"measure q[{op.qubits[0]}] -> c[{op.clbits[0]}];")
        else:
            args = ",".join(f"q[{q}]" for q in op.qubits)
            lines.append(f"{name} {args};")
    if unsupported:
        raise CodegenError(
            f"gates without a QASM rendering: {sorted(set(unsupported))}")
    return QasmProgram("\n".join(lines) + "\n", len(stream.ops))


_QREG_RE = re.compile(r"(q|c)reg\s+(\w+)\[(\d+)\]")
_ARG_RE = re.compile(r"(\w+)\[(\d+)\]")


def read_qasm(text: str) -> GateStream:
    """Minimal reader for the OpenQASM 2.0 subset this package emits."""
    qubits = clbits = 0
    ops: list[StreamOp] = []
    for raw in text.splitlines():
        line = raw.split("//", 1)[0].strip()
        if not line or line.startswith(("OPENQASM", "include")):
            continue
        if not line.endswith(";"):
            raise CodegenError(f"missing ';' in line: {raw!r}")
        line = line[:-1].strip()
        m = _QREG_RE.match(line)
        if m:
            if m.group(1) == "q":
                qubits = int(m.group(3))
            else:
                clbits = int(m.group(3))
            continue
        head = line.split()[0]
        if head == "measure":
            refs = _ARG_RE.findall(line)
            if len(refs) != 2 or refs[0][0] != "q" or refs[1][0] != "c":
                raise CodegenError(f"bad measure line: {raw!r}")
            ops.append(StreamOp((len(ops),), "Measure",
                                (int(refs[0][1]),), (int(refs[1][1]),)))
            continue
        gate = QASM_REVERSE.get(head)
        if gate is None:
            raise CodegenError(f"unknown QASM operation '{head}'")
        refs = _ARG_RE.findall(line)
        ops.append(StreamOp((len(ops),), gate, tuple(int(i) for _, i in refs)))
    return GateStream(ops, qubits, clbits)


# ---------------------------------------------------------------------------
# Compilation pipeline
# ---------------------------------------------------------------------------

@dataclass
class CompileResult:
    scop: Scop
    solution: ScheduleSolution
    stream: GateStream

    def loops(self) -> str:
        return emit_loops(scan(self.scop, self.solution))

    def qasm(self) -> QasmProgram:
        return emit_qasm(self.stream)


def compile_scop(scop: Scop, transform: str | None = None) -> CompileResult:
    from .transform import apply_transform
    solution = apply_transform(scop, transform)
    report = check_legality(scop, solution)
    if not report.overall:
        bad = "; ".join(report.violations[:5])
        raise CodegenError(
            f"{solution.transform} schedule is illegal at the codegen binding: {bad}")
    return CompileResult(scop, solution, flatten(scop, solution))
