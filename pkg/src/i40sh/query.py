"""SPARQL subset: SELECT and CONSTRUCT over basic graph patterns.

Covers what shell data retrieval needs: PREFIX/@prefix declarations, a
SELECT projection (or *), a CONSTRUCT template, and a WHERE block of
conjunctive triple patterns. Everything else (OPTIONAL, FILTER, UNION,
LIMIT, ...) is rejected with a diagnostic naming the keyword.

Matching is exact RDF term equality, language tags included: the
pattern object "Single-phase" does not match "Single-phase"@en. There
is deliberately no tag-insensitive mode. Blank nodes in patterns match
graph blank nodes by label, like any other concrete term.

Evaluation joins one pattern at a time, most-bound pattern first (ties
in pattern order); the solution set is identical to brute-force
nested-loop semantics regardless of join order. Solutions come back
sorted by their serialized bindings so output is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rdf import (
    RDF,
    XSD_STRING,
    BlankNode,
    Graph,
    IRI,
    Literal,
    Term,
    Triple,
    UnknownPrefixError,
    expand_qname,
    term_key,
)
from .turtle import (
    BAD_IRI,
    BAD_LITERAL,
    ParseDiagnostic,
    ParseError,
    Token,
    UNEXPECTED_TOKEN,
    UNKNOWN_PREFIX,
    UNSUPPORTED_KEYWORD,
    UNTERMINATED_STATEMENT,
    tokenize,
)

_UNSUPPORTED = {
    "OPTIONAL", "FILTER", "UNION", "LIMIT", "OFFSET", "ORDER", "BY",
    "GROUP", "HAVING", "ASK", "DESCRIBE", "INSERT", "DELETE", "BIND",
    "VALUES", "MINUS", "SERVICE", "GRAPH", "DISTINCT", "REDUCED",
    "FROM", "NAMED", "BASE", "EXISTS", "NOT",
}


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __repr__(self) -> str:
        return f"?{self.name}"


PatternTerm = Term | Variable


@dataclass(frozen=True, slots=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def variables(self) -> set[str]:
        return {
            t.name
            for t in (self.subject, self.predicate, self.object)
            if isinstance(t, Variable)
        }


@dataclass(frozen=True)
class SelectQuery:
    variables: tuple[str, ...]
    where: tuple[TriplePattern, ...]
    prefixes: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ConstructQuery:
    template: tuple[TriplePattern, ...]
    where: tuple[TriplePattern, ...]
    prefixes: dict[str, str] = field(default_factory=dict)


Query = SelectQuery | ConstructQuery

BindingSet = dict[str, Term]


class _QueryParser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.prefixes: dict[str, str] = {}
        self.diagnostics: list[ParseDiagnostic] = []

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, tok: Token, code: str, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(tok.line, tok.column, code, message))
        raise ParseError(self.diagnostics)

    def fail_token(self, tok: Token, expected: str) -> None:
        if tok.kind == "error":
            self.diagnostics.append(tok.value)
            raise ParseError(self.diagnostics)
        if tok.kind == "eof":
            self.fail(tok, UNTERMINATED_STATEMENT, f"expected {expected} before end of input")
        if tok.kind == "name" and tok.value.upper() in _UNSUPPORTED:
            self.fail(tok, UNSUPPORTED_KEYWORD, f"unsupported keyword {tok.value.upper()}")
        self.fail(tok, UNEXPECTED_TOKEN, f"expected {expected}")

    def keyword(self) -> str | None:
        tok = self.peek()
        if tok.kind == "name":
            return tok.value.upper()
        return None

    def parse(self) -> Query:
        self.prologue()
        kw = self.keyword()
        if kw == "SELECT":
            query = self.select()
        elif kw == "CONSTRUCT":
            query = self.construct()
        else:
            self.fail_token(self.peek(), "SELECT or CONSTRUCT")
            raise AssertionError("unreachable")
        tok = self.peek()
        if tok.kind != "eof":
            self.fail_token(tok, "end of query")
        return query

    def prologue(self) -> None:
        while True:
            tok = self.peek()
            if tok.kind == "directive" and tok.value == "prefix":
                self.next()
                self.prefix_binding(turtle_style=True)
            elif tok.kind == "name" and tok.value.upper() == "PREFIX":
                self.next()
                self.prefix_binding(turtle_style=False)
            else:
                return

    def prefix_binding(self, turtle_style: bool) -> None:
        pname = self.next()
        if pname.kind != "pname" or pname.value[1] != "":
            self.fail_token(pname, "a prefix label like 'i40c:'")
        iri = self.next()
        if iri.kind != "iriref":
            self.fail_token(iri, "a namespace IRI")
        self.prefixes[pname.value[0]] = iri.value
        if turtle_style:
            # Turtle-form @prefix lines end with "." even inside queries.
            dot = self.next()
            if dot.kind != "dot":
                self.fail_token(dot, "'.'")

    def select(self) -> SelectQuery:
        self.next()
        projection: list[str] = []
        star = False
        while True:
            tok = self.peek()
            if tok.kind == "var":
                self.next()
                if tok.value not in projection:
                    projection.append(tok.value)
            elif tok.kind == "star":
                self.next()
                star = True
                break
            else:
                break
        if not star and not projection:
            self.fail_token(self.peek(), "a variable list or *")
        where = self.where_clause()
        where_vars = set().union(*[p.variables() for p in where]) if where else set()
        if star:
            projection = self.vars_in_order(where)
        for name in projection:
            if name not in where_vars:
                self.fail(
                    self.peek(),
                    UNEXPECTED_TOKEN,
                    f"projected variable ?{name} does not appear in WHERE",
                )
        return SelectQuery(tuple(projection), where, dict(self.prefixes))

    def construct(self) -> ConstructQuery:
        self.next()
        template = self.pattern_block("CONSTRUCT template")
        where = self.where_clause()
        where_vars = set().union(*[p.variables() for p in where]) if where else set()
        for pattern in template:
            for name in sorted(pattern.variables()):
                if name not in where_vars:
                    self.fail(
                        self.peek(),
                        UNEXPECTED_TOKEN,
                        f"template variable ?{name} does not appear in WHERE",
                    )
        return ConstructQuery(template, where, dict(self.prefixes))

    def where_clause(self) -> tuple[TriplePattern, ...]:
        tok = self.peek()
        if self.keyword() == "WHERE":
            self.next()
        else:
            self.fail_token(tok, "WHERE")
        return self.pattern_block("WHERE block")

    def pattern_block(self, what: str) -> tuple[TriplePattern, ...]:
        lbrace = self.next()
        if lbrace.kind != "lbrace":
            self.fail_token(lbrace, f"'{{' opening the {what}")
        patterns: list[TriplePattern] = []
        while True:
            if self.peek().kind == "rbrace":
                self.next()
                return tuple(patterns)
            if self.peek().kind == "eof":
                self.fail_token(self.peek(), "'}'")
            self.triple_patterns(patterns)
            if self.peek().kind == "dot":
                self.next()

    def triple_patterns(self, out: list[TriplePattern]) -> None:
        subject = self.pattern_term("subject")
        while True:
            predicate = self.pattern_verb()
            while True:
                obj = self.pattern_term("object")
                out.append(TriplePattern(subject, predicate, obj))
                if self.peek().kind == "comma":
                    self.next()
                    continue
                break
            if self.peek().kind == "semicolon":
                while self.peek().kind == "semicolon":
                    self.next()
                if self.peek().kind in ("dot", "rbrace"):
                    return
                continue
            return

    def pattern_verb(self) -> PatternTerm:
        tok = self.peek()
        if tok.kind == "name" and tok.value == "a":
            self.next()
            return RDF.type
        term = self.pattern_term("predicate")
        if isinstance(term, (BlankNode, Literal)):
            self.fail(tok, UNEXPECTED_TOKEN, "predicate must be an IRI or variable")
        return term

    def pattern_term(self, position: str) -> PatternTerm:
        tok = self.next()
        if tok.kind == "var":
            return Variable(tok.value)
        if tok.kind == "iriref":
            try:
                return IRI(tok.value)
            except ValueError:
                self.fail(tok, BAD_IRI, f"IRI is not absolute: <{tok.value}>")
        if tok.kind == "pname":
            prefix, local = tok.value
            try:
                return expand_qname(self.prefixes, f"{prefix}:{local}")
            except UnknownPrefixError:
                self.fail(tok, UNKNOWN_PREFIX, f"prefix {prefix!r} is not declared")
        if tok.kind == "bnode":
            return BlankNode(tok.value)
        if tok.kind == "string":
            if self.peek().kind == "langtag":
                return Literal(tok.value, language=self.next().value)
            if self.peek().kind == "dtmarker":
                self.next()
                dt = self.pattern_term("datatype")
                if not isinstance(dt, IRI):
                    self.fail(tok, BAD_LITERAL, "datatype must be an IRI")
                return Literal(tok.value, datatype=dt.value)
            return Literal(tok.value)
        self.fail_token(tok, f"a term or variable in {position} position")
        raise AssertionError("unreachable")

    @staticmethod
    def vars_in_order(patterns: tuple[TriplePattern, ...]) -> list[str]:
        seen: list[str] = []
        for p in patterns:
            for t in (p.subject, p.predicate, p.object):
                if isinstance(t, Variable) and t.name not in seen:
                    seen.append(t.name)
        return seen


def parse_query(text: str) -> Query:
    """Parse a query; raises ParseError with positioned diagnostics."""
    return _QueryParser(text).parse()


def _concrete(t: PatternTerm) -> Term | None:
    return None if isinstance(t, Variable) else t


def _selectivity(pattern: TriplePattern, bound: set[str]) -> int:
    n = 0
    for t in (pattern.subject, pattern.predicate, pattern.object):
        if not isinstance(t, Variable) or t.name in bound:
            n += 1
    return n


def _impossible(pattern: TriplePattern, sol: BindingSet) -> bool:
    s = sol.get(pattern.subject.name) if isinstance(pattern.subject, Variable) else pattern.subject
    p = sol.get(pattern.predicate.name) if isinstance(pattern.predicate, Variable) else pattern.predicate
    if isinstance(s, Literal):
        return True
    if p is not None and not isinstance(p, (IRI, Variable)):
        return True
    return False


def eval_bgp(graph: Graph, patterns: list[TriplePattern]) -> list[BindingSet]:
    """All solutions of the conjunctive pattern, sorted and distinct.

    The empty pattern list has exactly one solution: the empty binding.
    """
    solutions: list[BindingSet] = [{}]
    remaining = list(enumerate(patterns))
    bound: set[str] = set()
    while remaining and solutions:
        best = max(remaining, key=lambda e: (_selectivity(e[1], bound), -e[0]))
        remaining.remove(best)
        pattern = best[1]
        extended: list[BindingSet] = []
        for sol in solutions:
            if _impossible(pattern, sol):
                continue
            lookup: list[Term | None] = []
            for t in (pattern.subject, pattern.predicate, pattern.object):
                if isinstance(t, Variable):
                    lookup.append(sol.get(t.name))
                else:
                    lookup.append(t)
            for triple in graph.match(*lookup):
                ext = dict(sol)
                if _bind(pattern, triple, ext):
                    extended.append(ext)
        solutions = extended
        bound |= pattern.variables()
    return _dedupe_sorted(solutions)


def _bind(pattern: TriplePattern, triple: Triple, sol: BindingSet) -> bool:
    pairs = (
        (pattern.subject, triple.subject),
        (pattern.predicate, triple.predicate),
        (pattern.object, triple.object),
    )
    for pat, val in pairs:
        if isinstance(pat, Variable):
            seen = sol.get(pat.name)
            if seen is None:
                sol[pat.name] = val
            elif seen != val:
                return False
        elif pat != val:
            return False
    return True


def _dedupe_sorted(solutions: list[BindingSet]) -> list[BindingSet]:
    keyed = {
        tuple((name, term_key(sol[name])) for name in sorted(sol)): sol
        for sol in solutions
    }
    return [keyed[k] for k in sorted(keyed)]


@dataclass
class SelectResult:
    """Projected solutions plus the projection order, JSON-ready."""

    variables: tuple[str, ...]
    rows: list[BindingSet]

    def to_json(self) -> dict:
        return {
            "vars": list(self.variables),
            "rows": [
                {name: _term_json(row[name]) for name in self.variables if name in row}
                for row in self.rows
            ],
        }


def _term_json(t: Term) -> dict:
    if isinstance(t, IRI):
        return {"type": "iri", "value": t.value}
    if isinstance(t, BlankNode):
        return {"type": "bnode", "value": t.label}
    if t.language is not None:
        return {"type": "literal", "value": t.lexical, "lang": t.language}
    if t.datatype == XSD_STRING:
        return {"type": "literal", "value": t.lexical}
    return {"type": "literal", "value": t.lexical, "datatype": t.datatype}


def evaluate(graph: Graph, query: Query) -> SelectResult | Graph:
    """Run a parsed query: SELECT yields rows, CONSTRUCT yields a graph."""
    solutions = eval_bgp(graph, list(query.where))
    if isinstance(query, SelectQuery):
        projected = [
            {name: sol[name] for name in query.variables if name in sol}
            for sol in solutions
        ]
        return SelectResult(query.variables, _dedupe_sorted(projected))
    result = Graph(query.prefixes)
    for sol in solutions:
        for pattern in query.template:
            triple = _instantiate(pattern, sol)
            if triple is not None:
                result.insert(triple)
    return result


def _instantiate(pattern: TriplePattern, sol: BindingSet) -> Triple | None:
    resolved = []
    for t in (pattern.subject, pattern.predicate, pattern.object):
        if isinstance(t, Variable):
            value = sol.get(t.name)
            if value is None:
                return None
            resolved.append(value)
        else:
            resolved.append(t)
    s, p, o = resolved
    # Template rows that cannot form a valid RDF triple are skipped.
    if isinstance(s, Literal) or not isinstance(p, IRI):
        return None
    return Triple(s, p, o)
