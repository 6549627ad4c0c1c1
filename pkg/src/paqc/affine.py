"""Affine expressions, integer sets and affine maps.

Everything here is exact integer arithmetic.  Sets are conjunctions of affine
inequalities/equalities over a fixed, ordered iterator tuple plus free symbolic
parameters; they are instantiated (and enumerated) once a complete parameter
binding is supplied.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import zip_longest

ParamBinding = dict[str, int]


class AffineError(Exception):
    pass


class UnboundedSetError(AffineError):
    pass


@dataclass(frozen=True)
class AffineExpr:
    """Integer-affine function: sum of coeff*name terms plus a constant.

    Names may be iterators or parameters; which is which is decided by the
    enclosing set/map (iterator order) and the binding at evaluation time.
    """

    coeffs: tuple[tuple[str, int], ...] = ()
    const: int = 0

    @staticmethod
    def build(coeffs: dict[str, int], const: int = 0) -> "AffineExpr":
        items = tuple(sorted((n, c) for n, c in coeffs.items() if c != 0))
        return AffineExpr(items, const)

    @staticmethod
    def constant(c: int) -> "AffineExpr":
        return AffineExpr((), c)

    @staticmethod
    def var(name: str, coeff: int = 1) -> "AffineExpr":
        return AffineExpr.build({name: coeff})

    def coeff_map(self) -> dict[str, int]:
        return dict(self.coeffs)

    def names(self) -> set[str]:
        return {n for n, _ in self.coeffs}

    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "AffineExpr | int") -> "AffineExpr":
        if isinstance(other, int):
            return AffineExpr(self.coeffs, self.const + other)
        merged = self.coeff_map()
        for n, c in other.coeffs:
            merged[n] = merged.get(n, 0) + c
        return AffineExpr.build(merged, self.const + other.const)

    def __sub__(self, other: "AffineExpr | int") -> "AffineExpr":
        if isinstance(other, int):
            return AffineExpr(self.coeffs, self.const - other)
        return self + other.scale(-1)

    def scale(self, k: int) -> "AffineExpr":
        return AffineExpr.build({n: c * k for n, c in self.coeffs}, self.const * k)

    def substitute(self, env: dict[str, "AffineExpr"]) -> "AffineExpr":
        """Replace names by affine expressions (names absent from env are kept)."""
        out = AffineExpr.constant(self.const)
        for n, c in self.coeffs:
            if n in env:
                out = out + env[n].scale(c)
            else:
                out = out + AffineExpr.var(n, c)
        return out

    def eval(self, env: dict[str, int]) -> int:
        total = self.const
        for n, c in self.coeffs:
            if n not in env:
                raise AffineError(f"missing value for '{n}' in {self}")
            total += c * env[n]
        return total

    def eval_point(self, iterators: tuple[str, ...], point: tuple[int, ...],
                   binding: ParamBinding) -> int:
        if len(iterators) != len(point):
            raise AffineError(
                f"point arity {len(point)} does not match iterators {iterators}")
        env = dict(binding)
        env.update(zip(iterators, point))
        return self.eval(env)

    def __str__(self) -> str:
        parts = []
        for n, c in self.coeffs:
            if c == 1:
                parts.append(n)
            elif c == -1:
                parts.append(f"-{n}")
            else:
                parts.append(f"{c}*{n}")
        if self.const or not parts:
            parts.append(str(self.const))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


# A constraint is (expr, kind) with kind "ge0" (expr >= 0) or "eq0" (expr == 0).
Constraint = tuple[AffineExpr, str]


@dataclass(frozen=True)
class IntegerSet:
    """Conjunction of affine constraints over an ordered iterator tuple."""

    iterators: tuple[str, ...]
    constraints: tuple[Constraint, ...]

    def params(self) -> set[str]:
        free: set[str] = set()
        for expr, _ in self.constraints:
            free |= expr.names()
        return free - set(self.iterators)

    def contains(self, point: tuple[int, ...], binding: ParamBinding) -> bool:
        env = dict(binding)
        env.update(zip(self.iterators, point))
        for expr, kind in self.constraints:
            v = expr.eval(env)
            if kind == "eq0" and v != 0:
                return False
            if kind == "ge0" and v < 0:
                return False
        return True

    def bounds_for(self, index: int, env: dict[str, int]) -> tuple[int, int]:
        """Interval of iterator `index` given values for params and iterators < index.

        Constraints mentioning later iterators are skipped here; they are
        re-checked during enumeration.
        """
        name = self.iterators[index]
        later = set(self.iterators[index + 1:])
        lo, hi = None, None
        for expr, kind in self.constraints:
            names = expr.names()
            if name not in names or names & later:
                continue
            c = expr.coeff_map()[name]
            rest = (expr - AffineExpr.var(name, c)).eval(env)
            # c*name + rest >= 0  (or == 0)
            if kind == "eq0":
                q, r = divmod(-rest, c)
                if r != 0:
                    return 1, 0  # empty under this env
                lo = q if lo is None else max(lo, q)
                hi = q if hi is None else min(hi, q)
            elif c > 0:
                # name >= ceil(-rest / c) == -floor(rest / c)
                v = -(rest // c)
                lo = v if lo is None else max(lo, v)
            else:
                # name <= floor(rest / -c)
                v = rest // (-c)
                hi = v if hi is None else min(hi, v)
        if lo is None or hi is None:
            raise UnboundedSetError(
                f"iterator '{name}' has no finite bounds in {self}")
        return lo, hi

    def enumerate(self, binding: ParamBinding) -> list[tuple[int, ...]]:
        """All points satisfying the constraints, in lexicographic order."""
        missing = self.params() - set(binding)
        if missing:
            raise AffineError(f"unbound parameters: {sorted(missing)}")
        points: list[tuple[int, ...]] = []

        def rec(prefix: tuple[int, ...], env: dict[str, int]) -> None:
            k = len(prefix)
            if k == len(self.iterators):
                if self.contains(prefix, binding):
                    points.append(prefix)
                return
            lo, hi = self.bounds_for(k, env)
            for v in range(lo, hi + 1):
                env2 = dict(env)
                env2[self.iterators[k]] = v
                rec(prefix + (v,), env2)

        rec((), dict(binding))
        return points

    def __str__(self) -> str:
        cs = " and ".join(
            f"{e} {'=' if k == 'eq0' else '>='} 0" for e, k in self.constraints)
        return f"{{ [{', '.join(self.iterators)}] : {cs} }}"


@dataclass(frozen=True)
class AffineMap:
    """Tuple of affine outputs over an ordered iterator domain."""

    iterators: tuple[str, ...]
    outputs: tuple[AffineExpr, ...]

    def apply(self, point: tuple[int, ...], binding: ParamBinding) -> tuple[int, ...]:
        return tuple(o.eval_point(self.iterators, point, binding) for o in self.outputs)

    def dim(self) -> int:
        return len(self.outputs)

    def __str__(self) -> str:
        return f"{{ [{', '.join(self.iterators)}] -> [{', '.join(map(str, self.outputs))}] }}"


def lex_less(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    """Strict lexicographic order; shorter tuples are padded with trailing zeros."""
    for x, y in zip_longest(a, b, fillvalue=0):
        if x != y:
            return x < y
    return False


def compose_time(schedules: list[AffineMap], mode: str) -> list[AffineMap]:
    """Insert the time-composition scalar dimension into each schedule.

    mode="prefix" prepends scalar k to the k-th schedule (statement-level
    composition); mode="suffix" appends it (gate-level composition inside a
    statement body).  A single-element list is returned unchanged.
    """
    if mode not in ("prefix", "suffix"):
        raise ValueError(f"bad compose mode {mode!r}")
    if len(schedules) < 2:
        return list(schedules)
    out = []
    for k, sched in enumerate(schedules):
        scalar = AffineExpr.constant(k)
        if mode == "prefix":
            outputs = (scalar,) + sched.outputs
        else:
            outputs = sched.outputs + (scalar,)
        out.append(AffineMap(sched.iterators, outputs))
    return out


def pad_schedules(maps: list[AffineMap]) -> list[AffineMap]:
    """Pad all maps with trailing zero outputs to a common dimensionality."""
    width = max((m.dim() for m in maps), default=0)
    out = []
    for m in maps:
        extra = (AffineExpr.constant(0),) * (width - m.dim())
        out.append(AffineMap(m.iterators, m.outputs + extra))
    return out
