"""Gate catalog with per-argument access modes, and access-relation extraction.

Each gate argument indexes the implicit one-dimensional quantum register ``q``
(or, for the classical result of Measure, the classical register ``c``) and is
tagged read / read_write / write.  New gates are data, not code: they can be
registered programmatically or loaded from a line-oriented extension file.
"""
from __future__ import annotations

from dataclasses import dataclass

from .affine import AffineExpr, AffineMap

READ, READ_WRITE, WRITE = "read", "read_write", "write"
QUANTUM, CLASSICAL = "q", "c"


class GateError(Exception):
    pass


@dataclass(frozen=True)
class GateSignature:
    name: str
    modes: tuple[str, ...]
    spaces: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.modes)

    def reads(self, k: int) -> bool:
        return self.modes[k] in (READ, READ_WRITE)

    def writes(self, k: int) -> bool:
        return self.modes[k] in (READ_WRITE, WRITE)


def _sig(name: str, modes: tuple[str, ...], spaces: tuple[str, ...] | None = None) -> GateSignature:
    return GateSignature(name, modes, spaces or (QUANTUM,) * len(modes))


_BASE_GATES = [
    _sig("X", (READ_WRITE,)),
    _sig("Y", (READ_WRITE,)),
    _sig("Z", (READ_WRITE,)),
    _sig("H", (READ_WRITE,)),
    _sig("Measure", (READ_WRITE, WRITE), (QUANTUM, CLASSICAL)),
    _sig("CNOT", (READ, READ_WRITE)),
    _sig("CY", (READ, READ_WRITE)),
    _sig("CZ", (READ, READ_WRITE)),
    _sig("Swap", (READ_WRITE, READ_WRITE)),
    _sig("Toffoli", (READ, READ, READ_WRITE)),
]

_ALIASES = {"CX": "CNOT", "CCX": "Toffoli", "CCNOT": "Toffoli", "NOT": "X"}


class GateCatalog:
    def __init__(self, extra: list[GateSignature] | None = None):
        self._sigs: dict[str, GateSignature] = {}
        self._canonical: dict[str, str] = {}
        for sig in _BASE_GATES + list(extra or []):
            self.register(sig)
        for alias, target in _ALIASES.items():
            self._canonical[alias.lower()] = target

    def register(self, sig: GateSignature) -> None:
        self._sigs[sig.name] = sig
        self._canonical[sig.name.lower()] = sig.name

    def signature(self, name: str) -> GateSignature:
        canon = self._canonical.get(name.lower())
        if canon is None:
            raise GateError(f"unknown gate '{name}'")
        return self._sigs[canon]

    def knows(self, name: str) -> bool:
        return name.lower() in self._canonical


DEFAULT_CATALOG = GateCatalog()

_MODE_TAGS = {"r": READ, "rw": READ_WRITE, "w": WRITE}


def load_catalog_extension(path: str, base: GateCatalog | None = None) -> GateCatalog:
    """Extend the catalog from a text file, one gate per line.

    Line format: ``NAME arity mode:space ...`` with mode in {r, rw, w} and
    space in {q, c}, e.g. ``CCZ 3 r:q r:q rw:q``.  Blank lines and ``#``
    comments are skipped.
    """
    catalog = GateCatalog() if base is None else base
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) < 3:
                raise GateError(f"{path}:{lineno}: expected NAME arity args...")
            name, arity = fields[0], int(fields[1])
            args = fields[2:]
            if len(args) != arity:
                raise GateError(f"{path}:{lineno}: arity {arity} but {len(args)} args")
            modes, spaces = [], []
            for a in args:
                mode, _, space = a.partition(":")
                if mode not in _MODE_TAGS or space not in (QUANTUM, CLASSICAL):
                    raise GateError(f"{path}:{lineno}: bad argument spec '{a}'")
                modes.append(_MODE_TAGS[mode])
                spaces.append(space)
            catalog.register(GateSignature(name, tuple(modes), tuple(spaces)))
    return catalog


@dataclass(frozen=True)
class AccessRelation:
    """One gate argument's map from domain points to a register index."""

    statement: str
    gate_pos: int
    map: AffineMap
    mode: str
    space: str


def access_relations(stmt) -> list[AccessRelation]:
    """All access relations of a validated statement, one per gate argument.

    ``stmt`` is an axl.StatementDecl whose body gates carry resolved
    signatures and AffineExpr arguments.
    """
    iters = stmt.domain.iterators
    rels = []
    for pos, gate in enumerate(stmt.gates()):
        sig = gate.signature
        for k, arg in enumerate(gate.args):
            rels.append(AccessRelation(
                statement=stmt.name,
                gate_pos=pos,
                map=AffineMap(iters, (arg,)),
                mode=sig.modes[k],
                space=sig.spaces[k],
            ))
    return rels
