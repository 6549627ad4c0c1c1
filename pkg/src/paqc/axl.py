"""Frontend for the AXL circuit description language.

AXL programs declare symbolic parameters and circuit statements, bind each
statement to an iteration domain with a gate body, and request code generation
for a time-composition of statements:

    param M;
    statement S1, S2, S3;
    S1 := { t : 1 <= t <= M ( #X(t) (+) #CNOT(t, 0) ) };
    S2 := { t : 1 <= t <= M ( #X(t) ) };
    S3 := { t : 1 <= t <= M ( #CNOT(t, 0) ) };
    codegen { S1 } with { M = 8 } apply { plutomax };
    codegen { S2 (+) S3 } with { M = 8 } apply { plutomin };

Comments run from ``//`` to end of line.  Gate arguments and domain
constraints must be integer-affine in the iterators and parameters;
products of two names are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .affine import AffineExpr, IntegerSet
from .gates import DEFAULT_CATALOG, GateCatalog, GateSignature

TRANSFORMS = ("base", "feautrier", "plutomin", "plutomax")


class AxlError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {msg}" if line else msg)


class AxlSyntaxError(AxlError):
    pass


class AxlValidationError(AxlError):
    pass


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

KEYWORDS = {"param", "statement", "codegen", "with", "apply"}

# Multi-character symbols first so maximal munch wins.
_SYMBOLS = ["(+)", ":=", "<=", ">=", "<", ">", "=", "{", "}", "(", ")",
            "[", "]", ",", ";", ":", "+", "-", "*", "#"]


@dataclass(frozen=True)
class Token:
    kind: str            # "kw", "ident", "int", or the symbol itself
    text: str
    line: int
    col: int

    def __repr__(self) -> str:
        return f"{self.kind}:{self.text}@{self.line}:{self.col}"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(sym, sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise AxlSyntaxError(f"illegal character {ch!r}", line, col)
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass
class RawExpr:
    """Pre-resolution affine expression: coeff-per-name terms plus constant."""
    terms: dict[str, int]
    const: int
    line: int = 0
    col: int = 0

    def to_affine(self) -> AffineExpr:
        return AffineExpr.build(self.terms, self.const)

    def render(self) -> str:
        return str(self.to_affine())


@dataclass
class GateCall:
    name: str
    args: list[RawExpr]
    line: int = 0
    col: int = 0
    signature: GateSignature | None = None   # filled in by validate()


@dataclass
class TimeCompose:
    children: list                       # GateCall | TimeCompose (in bodies)


@dataclass
class RawConstraint:
    lhs: RawExpr
    op: str                              # <=, <, >=, >, =
    rhs: RawExpr


@dataclass
class DomainSpec:
    iterators: list[str]
    constraints: list[RawConstraint]

    def to_set(self) -> IntegerSet:
        cons = []
        for c in self.constraints:
            lhs, rhs = c.lhs.to_affine(), c.rhs.to_affine()
            if c.op == "=":
                cons.append((lhs - rhs, "eq0"))
            elif c.op == "<=":
                cons.append((rhs - lhs, "ge0"))
            elif c.op == "<":
                cons.append((rhs - lhs - 1, "ge0"))
            elif c.op == ">=":
                cons.append((lhs - rhs, "ge0"))
            else:  # >
                cons.append((lhs - rhs - 1, "ge0"))
        return IntegerSet(tuple(self.iterators), tuple(cons))


@dataclass
class StatementDecl:
    name: str
    domain: DomainSpec
    body: object                         # GateCall | TimeCompose
    line: int = 0
    col: int = 0

    def gates(self) -> list[GateCall]:
        out: list[GateCall] = []

        def walk(node):
            if isinstance(node, GateCall):
                out.append(node)
            else:
                for ch in node.children:
                    walk(ch)

        walk(self.body)
        return out


@dataclass
class CompRef:
    """Statement reference inside a codegen composition."""
    name: str
    line: int = 0
    col: int = 0


@dataclass
class CodegenDirective:
    composition: object                  # CompRef | TimeCompose over CompRefs
    bindings: dict[str, int]
    transform: str = "base"
    line: int = 0
    col: int = 0

    def statement_names(self) -> list[str]:
        out: list[str] = []

        def walk(node):
            if isinstance(node, CompRef):
                out.append(node.name)
            else:
                for ch in node.children:
                    walk(ch)

        walk(self.composition)
        return out


@dataclass
class SourceProgram:
    params: list[str] = field(default_factory=list)
    statements: list[StatementDecl] = field(default_factory=list)
    directives: list[CodegenDirective] = field(default_factory=list)
    validated: bool = False

    def statement(self, name: str) -> StatementDecl:
        for s in self.statements:
            if s.name == name:
                return s
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0
        self.declared_statements: list[str] = []

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else Token("", "", 1, 1)
            raise AxlSyntaxError("unexpected end of input", last.line, last.col)
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            got = tok.text if tok else "end of input"
            line = tok.line if tok else (self.toks[-1].line if self.toks else 1)
            col = tok.col if tok else 1
            raise AxlSyntaxError(f"expected '{kind}', got '{got}'", line, col)
        return self.next()

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    # -- declarations -------------------------------------------------------

    def parse_program(self) -> SourceProgram:
        prog = SourceProgram()
        while self.peek() is not None:
            tok = self.peek()
            if tok.kind == "kw" and tok.text in ("param", "statement"):
                self.next()
                names = [self.expect("ident")]
                while self.at(","):
                    self.next()
                    names.append(self.expect("ident"))
                self.expect(";")
                target = prog.params if tok.text == "param" else self.declared_statements
                for t in names:
                    target.append(t.text)
            elif tok.kind == "kw" and tok.text == "codegen":
                prog.directives.append(self.parse_codegen())
            elif tok.kind == "ident":
                name = self.next()
                self.expect(":=")
                domain, body = self.parse_definition()
                self.expect(";")
                prog.statements.append(
                    StatementDecl(name.text, domain, body, name.line, name.col))
            else:
                raise AxlSyntaxError(f"unexpected token '{tok.text}'", tok.line, tok.col)
        prog._declared_statements = list(self.declared_statements)  # type: ignore[attr-defined]
        return prog

    def parse_definition(self) -> tuple[DomainSpec, object]:
        self.expect("{")
        iters = [self.expect("ident").text]
        while self.at(","):
            self.next()
            iters.append(self.expect("ident").text)
        self.expect(":")
        constraints = self.parse_constraints()
        self.expect("(")
        body = self.parse_circ_expr()
        self.expect(")")
        self.expect("}")
        return DomainSpec(iters, constraints), body

    def parse_constraints(self) -> list[RawConstraint]:
        out: list[RawConstraint] = []
        while True:
            out.extend(self.parse_chain())
            if self.at(","):
                self.next()
                continue
            return out

    def parse_chain(self) -> list[RawConstraint]:
        exprs = [self.parse_affine()]
        ops: list[str] = []
        while self.peek() is not None and self.peek().kind in ("<=", "<", ">=", ">", "="):
            ops.append(self.next().kind)
            exprs.append(self.parse_affine())
        if not ops:
            tok = self.peek()
            raise AxlSyntaxError("expected comparison operator",
                                 tok.line if tok else 0, tok.col if tok else 0)
        return [RawConstraint(exprs[i], ops[i], exprs[i + 1]) for i in range(len(ops))]

    # -- expressions --------------------------------------------------------

    def parse_affine(self) -> RawExpr:
        start = self.peek()
        expr = RawExpr({}, 0, start.line if start else 0, start.col if start else 0)
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        self._parse_term(expr, sign)
        while self.at("+") or self.at("-"):
            sign = 1 if self.next().kind == "+" else -1
            self._parse_term(expr, sign)
        return expr

    def _parse_term(self, expr: RawExpr, sign: int) -> None:
        tok = self.peek()
        if tok is None:
            raise AxlSyntaxError("expected expression", 0, 0)
        if tok.kind == "int":
            self.next()
            value = int(tok.text)
            if self.at("*"):
                self.next()
                name = self.expect("ident")
                expr.terms[name.text] = expr.terms.get(name.text, 0) + sign * value
            else:
                expr.const += sign * value
        elif tok.kind == "ident":
            self.next()
            if self.at("*"):
                star = self.next()
                factor = self.peek()
                if factor is not None and factor.kind == "int":
                    self.next()
                    expr.terms[tok.text] = expr.terms.get(tok.text, 0) + sign * int(factor.text)
                else:
                    raise AxlSyntaxError(
                        "non-affine product (only integer * name is allowed)",
                        star.line, star.col)
            else:
                expr.terms[tok.text] = expr.terms.get(tok.text, 0) + sign
        else:
            raise AxlSyntaxError(f"expected expression, got '{tok.text}'", tok.line, tok.col)

    def parse_circ_expr(self):
        children = [self.parse_circ_term()]
        while self.at("(+)"):
            self.next()
            children.append(self.parse_circ_term())
        return children[0] if len(children) == 1 else TimeCompose(children)

    def parse_circ_term(self):
        if self.at("#"):
            hash_tok = self.next()
            name = self.expect("ident")
            self.expect("(")
            args = [self.parse_affine()]
            while self.at(","):
                self.next()
                args.append(self.parse_affine())
            self.expect(")")
            return GateCall(name.text, args, hash_tok.line, hash_tok.col)
        if self.at("("):
            self.next()
            inner = self.parse_circ_expr()
            self.expect(")")
            return inner
        tok = self.peek()
        raise AxlSyntaxError(f"expected gate call or '(', got "
                             f"'{tok.text if tok else 'end of input'}'",
                             tok.line if tok else 0, tok.col if tok else 0)

    # -- codegen ------------------------------------------------------------

    def parse_codegen(self) -> CodegenDirective:
        kw = self.expect("kw")
        self.expect("{")
        comp = self.parse_comp_expr()
        self.expect("}")
        wid = self.expect("kw")
        if wid.text != "with":
            raise AxlSyntaxError(f"expected 'with', got '{wid.text}'", wid.line, wid.col)
        self.expect("{")
        bindings: dict[str, int] = {}
        if not self.at("}"):
            while True:
                name = self.expect("ident")
                self.expect("=")
                neg = False
                if self.at("-"):
                    self.next()
                    neg = True
                val = self.expect("int")
                bindings[name.text] = -int(val.text) if neg else int(val.text)
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect("}")
        transform = "base"
        if self.at("kw", "apply"):
            self.next()
            self.expect("{")
            tname = self.expect("ident")
            transform = tname.text
            self.expect("}")
        self.expect(";")
        return CodegenDirective(comp, bindings, transform, kw.line, kw.col)

    def parse_comp_expr(self):
        children = [self.parse_comp_term()]
        while self.at("(+)"):
            self.next()
            children.append(self.parse_comp_term())
        return children[0] if len(children) == 1 else TimeCompose(children)

    def parse_comp_term(self):
        if self.at("("):
            self.next()
            inner = self.parse_comp_expr()
            self.expect(")")
            return inner
        tok = self.expect("ident")
        return CompRef(tok.text, tok.line, tok.col)


def parse(tokens: list[Token]) -> SourceProgram:
    return _Parser(tokens).parse_program()


def parse_text(text: str) -> SourceProgram:
    return parse(tokenize(text))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate(prog: SourceProgram, catalog: GateCatalog = DEFAULT_CATALOG) -> SourceProgram:
    """Resolve gates, check arities, scoping and directive bindings in place."""
    params = set(prog.params)
    if len(prog.params) != len(params):
        raise AxlValidationError("duplicate parameter names")
    declared = set(getattr(prog, "_declared_statements", [s.name for s in prog.statements]))
    names_seen: set[str] = set()
    for stmt in prog.statements:
        if stmt.name in names_seen:
            raise AxlValidationError(f"statement '{stmt.name}' defined twice",
                                     stmt.line, stmt.col)
        names_seen.add(stmt.name)
        if declared and stmt.name not in declared:
            raise AxlValidationError(f"statement '{stmt.name}' was not declared",
                                     stmt.line, stmt.col)
        _validate_statement(stmt, params, catalog)
    defined = {s.name for s in prog.statements}
    for d in prog.directives:
        if d.transform not in TRANSFORMS:
            raise AxlValidationError(
                f"unknown transform '{d.transform}' (expected one of {', '.join(TRANSFORMS)})",
                d.line, d.col)
        for ref in d.statement_names():
            if ref not in defined:
                raise AxlValidationError(f"codegen references undefined statement '{ref}'",
                                         d.line, d.col)
        for p in d.bindings:
            if p not in params:
                raise AxlValidationError(f"binding for undeclared parameter '{p}'",
                                         d.line, d.col)
            if d.bindings[p] < 0:
                raise AxlValidationError(f"parameter '{p}' bound to negative value",
                                         d.line, d.col)
        needed: set[str] = set()
        for ref in d.statement_names():
            stmt = prog.statement(ref)
            iters = set(stmt.domain.iterators)
            for c in stmt.domain.constraints:
                needed |= (set(c.lhs.terms) | set(c.rhs.terms)) - iters
            for g in stmt.gates():
                for a in g.args:
                    needed |= set(a.terms) - iters
        missing = needed - set(d.bindings)
        if missing:
            raise AxlValidationError(
                f"directive leaves parameters unbound: {', '.join(sorted(missing))}",
                d.line, d.col)
    prog.validated = True
    return prog


def _validate_statement(stmt: StatementDecl, params: set[str], catalog: GateCatalog) -> None:
    iters = stmt.domain.iterators
    if len(iters) != len(set(iters)):
        raise AxlValidationError(f"duplicate iterator in '{stmt.name}'", stmt.line, stmt.col)
    clash = set(iters) & params
    if clash:
        raise AxlValidationError(
            f"iterator shadows parameter: {', '.join(sorted(clash))}", stmt.line, stmt.col)
    known = set(iters) | params
    for c in stmt.domain.constraints:
        for side in (c.lhs, c.rhs):
            bad = set(side.terms) - known
            if bad:
                raise AxlValidationError(
                    f"unknown name in domain constraint: {', '.join(sorted(bad))}",
                    side.line, side.col)
    gates = stmt.gates()
    if not gates:
        raise AxlValidationError(f"statement '{stmt.name}' has an empty body",
                                 stmt.line, stmt.col)

    def check_compose(node):
        if isinstance(node, TimeCompose) and len(node.children) < 2:
            raise AxlValidationError("time composition needs at least 2 operands",
                                     stmt.line, stmt.col)
        if isinstance(node, TimeCompose):
            for ch in node.children:
                check_compose(ch)

    check_compose(stmt.body)
    for g in gates:
        if not catalog.knows(g.name):
            raise AxlValidationError(f"unknown gate '{g.name}'", g.line, g.col)
        sig = catalog.signature(g.name)
        if len(g.args) != sig.arity:
            raise AxlValidationError(
                f"gate '{sig.name}' expects {sig.arity} arguments, got {len(g.args)}",
                g.line, g.col)
        g.signature = sig
        for a in g.args:
            unbound = set(a.terms) - known
            if unbound:
                raise AxlValidationError(
                    f"unbound iterator in gate argument: {', '.join(sorted(unbound))}",
                    a.line, a.col)


def load_program(text: str, catalog: GateCatalog = DEFAULT_CATALOG) -> SourceProgram:
    return validate(parse_text(text), catalog)


# ---------------------------------------------------------------------------
# Pretty printer (round-trips through parse_text)
# ---------------------------------------------------------------------------

def _render_constraint(c: RawConstraint) -> str:
    return f"{c.lhs.render()} {c.op} {c.rhs.render()}"


def _render_body(node) -> str:
    if isinstance(node, GateCall):
        return f"#{node.name}({', '.join(a.render() for a in node.args)})"
    parts = []
    for ch in node.children:
        txt = _render_body(ch)
        if isinstance(ch, TimeCompose):
            txt = f"({txt})"
        parts.append(txt)
    return " (+) ".join(parts)


def _render_comp(node) -> str:
    if isinstance(node, CompRef):
        return node.name
    parts = []
    for ch in node.children:
        txt = _render_comp(ch)
        if isinstance(ch, TimeCompose):
            txt = f"({txt})"
        parts.append(txt)
    return " (+) ".join(parts)


def pretty_print(prog: SourceProgram) -> str:
    lines = []
    if prog.params:
        lines.append(f"param {', '.join(prog.params)};")
    if prog.statements:
        lines.append(f"statement {', '.join(s.name for s in prog.statements)};")
    for s in prog.statements:
        cons = ", ".join(_render_constraint(c) for c in s.domain.constraints)
        lines.append(f"{s.name} := {{ {', '.join(s.domain.iterators)} : {cons} "
                     f"( {_render_body(s.body)} ) }};")
    for d in prog.directives:
        binds = ", ".join(f"{k} = {v}" for k, v in d.bindings.items())
        lines.append(f"codegen {{ {_render_comp(d.composition)} }} with {{ {binds} }} "
                     f"apply {{ {d.transform} }};")
    return "\n".join(lines) + "\n"


def structural_dump(prog: SourceProgram):
    """Position-free structural form, for round-trip comparison in tests."""
    def expr(e: RawExpr):
        return (tuple(sorted((k, v) for k, v in e.terms.items() if v)), e.const)

    def body(node):
        if isinstance(node, GateCall):
            return ("gate", node.name.lower(), tuple(expr(a) for a in node.args))
        return ("tc", tuple(body(ch) for ch in node.children))

    def comp(node):
        if isinstance(node, CompRef):
            return ("ref", node.name)
        return ("tc", tuple(comp(ch) for ch in node.children))

    return (
        tuple(prog.params),
        tuple((s.name, tuple(s.domain.iterators),
               tuple((expr(c.lhs), c.op, expr(c.rhs)) for c in s.domain.constraints),
               body(s.body)) for s in prog.statements),
        tuple((comp(d.composition), tuple(sorted(d.bindings.items())), d.transform)
              for d in prog.directives),
    )
