"""Program assembly: turning a codegen directive into a schedulable scop.

Each gate of a statement body becomes its own sub-statement carrying the
statement's iteration domain and a base schedule.  Gate-level time composition
appends suffix scalar dimensions; statement-level composition in the codegen
clause prepends prefix scalar dimensions.  Nested parenthesisation adds one
scalar dimension per nesting level.  All schedules are finally padded with
trailing zeros to a common dimensionality.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import axl
from .affine import AffineExpr, AffineMap, IntegerSet, ParamBinding, pad_schedules
from .gates import GateSignature


@dataclass
class SubStatement:
    """A single gate operation with its domain and base schedule."""

    stmt: str
    gate_pos: int
    gate: GateSignature
    args: tuple[AffineExpr, ...]
    domain: IntegerSet
    schedule: AffineMap          # base (program assembly) schedule, padded
    assembly_index: int = 0
    single_gate: bool = True     # whole statement body is this one gate

    @property
    def key(self) -> tuple[str, int]:
        return (self.stmt, self.gate_pos)

    @property
    def label(self) -> str:
        return self.stmt if self.single_gate else f"{self.stmt}.{self.gate_pos}"


@dataclass
class Scop:
    """An assembled program: sub-statements, parameter binding, transform."""

    name: str
    subs: list[SubStatement]
    binding: ParamBinding
    transform: str
    params: tuple[str, ...] = ()
    source: axl.SourceProgram | None = None

    def sub(self, key: tuple[str, int]) -> SubStatement:
        for s in self.subs:
            if s.key == key:
                return s
        raise KeyError(key)

    def base_schedules(self) -> dict[tuple[str, int], AffineMap]:
        return {s.key: s.schedule for s in self.subs}


def _body_schedules(stmt: axl.StatementDecl) -> list[tuple[int, list[int]]]:
    """(gate_pos, suffix scalar path) for each gate of the statement body."""
    out: list[tuple[int, list[int]]] = []
    counter = [0]

    def walk(node, path: list[int]):
        if isinstance(node, axl.GateCall):
            out.append((counter[0], path))
            counter[0] += 1
        else:
            for k, ch in enumerate(node.children):
                walk(ch, path + [k])

    walk(stmt.body, [])
    return out


def _composition_paths(comp) -> list[tuple[str, list[int]]]:
    """(statement name, prefix scalar path) in composition order."""
    out: list[tuple[str, list[int]]] = []

    def walk(node, path: list[int]):
        if isinstance(node, axl.CompRef):
            out.append((node.name, path))
        else:
            for k, ch in enumerate(node.children):
                walk(ch, path + [k])

    walk(comp, [])
    return out


def assemble(prog: axl.SourceProgram, directive: axl.CodegenDirective,
             binding_override: ParamBinding | None = None,
             transform_override: str | None = None) -> Scop:
    """Build the scop for one codegen directive."""
    if not prog.validated:
        raise ValueError("program must be validated before assembly")
    binding = dict(directive.bindings)
    if binding_override:
        binding.update(binding_override)
    transform = transform_override or directive.transform
    if transform not in axl.TRANSFORMS:
        raise ValueError(f"unknown transform '{transform}'")

    subs: list[SubStatement] = []
    idx = 0
    for stmt_name, prefix in _composition_paths(directive.composition):
        stmt = prog.statement(stmt_name)
        domain = stmt.domain.to_set()
        gates = stmt.gates()
        single = len(gates) == 1
        for (pos, suffix), gate in zip(_body_schedules(stmt), gates):
            outputs = (
                tuple(AffineExpr.constant(k) for k in prefix)
                + tuple(AffineExpr.var(it) for it in domain.iterators)
                + tuple(AffineExpr.constant(k) for k in suffix)
            )
            subs.append(SubStatement(
                stmt=stmt_name,
                gate_pos=pos,
                gate=gate.signature,
                args=tuple(a.to_affine() for a in gate.args),
                domain=domain,
                schedule=AffineMap(domain.iterators, outputs),
                assembly_index=idx,
                single_gate=single,
            ))
            idx += 1

    padded = pad_schedules([s.schedule for s in subs])
    for s, m in zip(subs, padded):
        s.schedule = m
    label = axl._render_comp(directive.composition)
    params = tuple(sorted({p for s in subs for p in s.domain.params()}
                          | {p for s in subs for a in s.args for p in a.names()
                             if p not in s.domain.iterators}))
    return Scop(label, subs, binding, transform, params, prog)


def scops_for_program(prog: axl.SourceProgram, **kw) -> list[Scop]:
    return [assemble(prog, d, **kw) for d in prog.directives]
