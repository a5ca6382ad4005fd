"""Turtle subset reader and writer.

The grammar covered is what shell documents and the vocabulary use:
@prefix directives, the ``a`` keyword, predicate-object lists with ";",
object lists with ",", angle-bracket IRIs, prefixed names, string
literals with language tags or ``^^`` datatypes, ``_:label`` and ``[]``
blank nodes, comments, and "." statement terminators. Collections and
numeric/boolean shorthand are deliberately out; they lex as errors.

Parsing is total: any input yields either a graph or a list of
positioned diagnostics (one per bad statement; recovery skips to the
next top-level "."). A failed parse never returns a partial graph.

The tokenizer is shared with the query parser, which is why it also
knows about ``?var``, braces, and bare keywords.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rdf import (
    RDF,
    XSD_STRING,
    BlankNode,
    Graph,
    IRI,
    Literal,
    Term,
    TermError,
    Triple,
    UnknownPrefixError,
    compact_iri,
    expand_qname,
    term_key,
)

UNKNOWN_PREFIX = "UnknownPrefix"
BAD_IRI = "BadIRI"
BAD_LITERAL = "BadLiteral"
UNEXPECTED_TOKEN = "UnexpectedToken"
UNTERMINATED_STATEMENT = "UnterminatedStatement"
UNSUPPORTED_KEYWORD = "UnsupportedKeyword"


@dataclass(frozen=True, slots=True)
class ParseDiagnostic:
    line: int
    column: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.code}: {self.message}"


class ParseError(ValueError):
    """Carries every diagnostic collected over the whole document."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    value: object
    line: int
    column: int


_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}

# Characters an IRIREF may not contain unescaped.
_IRI_FORBIDDEN = set('<"{}|^`')


def _is_name_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_name_char(c: str) -> bool:
    return c.isalnum() or c in "_-."


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def advance(self) -> str:
        c = self.text[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c


def tokenize(text: str) -> list[Token]:
    """Lex a document into tokens; lexical failures become error tokens.

    Error tokens have kind "error" and a ParseDiagnostic as value, so the
    parser can report them and resynchronize at the next ".".
    """
    sc = _Scanner(text)
    tokens: list[Token] = []

    def emit(kind: str, value: object, line: int, col: int) -> None:
        tokens.append(Token(kind, value, line, col))

    def error(code: str, message: str, line: int, col: int) -> None:
        emit("error", ParseDiagnostic(line, col, code, message), line, col)

    punct = {
        ".": "dot",
        ";": "semicolon",
        ",": "comma",
        "{": "lbrace",
        "}": "rbrace",
        "*": "star",
    }

    while not sc.eof():
        c = sc.peek()
        line, col = sc.line, sc.col
        if c.isspace():
            sc.advance()
            continue
        if c == "#":
            while not sc.eof() and sc.peek() != "\n":
                sc.advance()
            continue
        if c in punct:
            sc.advance()
            emit(punct[c], c, line, col)
            continue
        if c == "[":
            sc.advance()
            while not sc.eof() and sc.peek().isspace():
                sc.advance()
            if sc.peek() == "]":
                sc.advance()
                emit("anon", "[]", line, col)
            else:
                error(
                    UNEXPECTED_TOKEN,
                    "blank node property lists are not supported; only []",
                    line,
                    col,
                )
            continue
        if c == "<":
            sc.advance()
            value, ok = _scan_iriref(sc, line, col, error)
            if ok:
                emit("iriref", value, line, col)
            continue
        if c == '"':
            sc.advance()
            value, ok = _scan_string(sc, line, col, error)
            if ok:
                emit("string", value, line, col)
            continue
        if c == "^":
            if sc.peek(1) == "^":
                sc.advance()
                sc.advance()
                emit("dtmarker", "^^", line, col)
            else:
                sc.advance()
                error(UNEXPECTED_TOKEN, "stray '^' (expected '^^')", line, col)
            continue
        if c == "@":
            sc.advance()
            word = ""
            while not sc.eof() and (sc.peek().isalnum() or sc.peek() == "-"):
                word += sc.advance()
            if word in ("prefix", "base"):
                emit("directive", word, line, col)
            elif _valid_langtag(word):
                emit("langtag", word, line, col)
            else:
                error(BAD_LITERAL, f"malformed language tag @{word!r}", line, col)
            continue
        if c == "?":
            sc.advance()
            name = ""
            while not sc.eof() and (sc.peek().isalnum() or sc.peek() == "_"):
                name += sc.advance()
            if name:
                emit("var", name, line, col)
            else:
                error(UNEXPECTED_TOKEN, "'?' without a variable name", line, col)
            continue
        if c == "_" and sc.peek(1) == ":":
            sc.advance()
            sc.advance()
            label = ""
            while not sc.eof() and _is_name_char(sc.peek()):
                label += sc.advance()
            label, dots = _split_trailing_dots(label)
            if label:
                emit("bnode", label, line, col)
            else:
                error(UNEXPECTED_TOKEN, "blank node label missing", line, col)
            _emit_dots(emit, dots, sc)
            continue
        if _is_name_start(c) or c.isdigit():
            word = ""
            while not sc.eof() and (_is_name_char(sc.peek()) or sc.peek() == ":"):
                word += sc.advance()
            word, dots = _split_trailing_dots(word)
            if ":" in word:
                prefix, _, local = word.partition(":")
                emit("pname", (prefix, local), line, col)
            elif word:
                emit("name", word, line, col)
            else:
                error(UNEXPECTED_TOKEN, f"unexpected character {c!r}", line, col)
            _emit_dots(emit, dots, sc)
            continue
        sc.advance()
        error(UNEXPECTED_TOKEN, f"unexpected character {c!r}", line, col)

    last_line = sc.line
    last_col = max(sc.col - 1, 1)
    tokens.append(Token("eof", None, last_line, last_col))
    return tokens


def _split_trailing_dots(word: str) -> tuple[str, int]:
    # "i40c:Object1." ends a statement; trailing dots re-enter as tokens.
    n = 0
    while word.endswith("."):
        word = word[:-1]
        n += 1
    return word, n


def _emit_dots(emit, count: int, sc: _Scanner) -> None:
    for i in range(count):
        emit("dot", ".", sc.line, max(sc.col - count + i, 1))


def _valid_langtag(tag: str) -> bool:
    if not tag:
        return False
    parts = tag.split("-")
    if not parts[0].isalpha() or not 1 <= len(parts[0]) <= 8:
        return False
    return all(p.isalnum() and 1 <= len(p) <= 8 for p in parts[1:])


def _scan_uchar(sc: _Scanner, width: int) -> str | None:
    digits = ""
    for _ in range(width):
        if sc.eof() or sc.peek() not in "0123456789abcdefABCDEF":
            return None
        digits += sc.advance()
    code = int(digits, 16)
    if code > 0x10FFFF:
        return None
    return chr(code)


def _scan_iriref(sc: _Scanner, line: int, col: int, error) -> tuple[str, bool]:
    out = []
    while True:
        if sc.eof() or sc.peek() == "\n":
            error(BAD_IRI, "unterminated IRI (missing '>')", line, col)
            return "", False
        c = sc.advance()
        if c == ">":
            return "".join(out), True
        if c == "\\":
            width = {"u": 4, "U": 8}.get(sc.peek())
            if width is None:
                error(BAD_IRI, "only \\u and \\U escapes are allowed in IRIs", line, col)
                return "", False
            sc.advance()
            decoded = _scan_uchar(sc, width)
            if decoded is None:
                error(BAD_IRI, "bad numeric escape in IRI", line, col)
                return "", False
            out.append(decoded)
            continue
        if c in _IRI_FORBIDDEN or ord(c) <= 0x20:
            error(BAD_IRI, f"character {c!r} must be escaped inside an IRI", line, col)
            return "", False
        out.append(c)


def _scan_string(sc: _Scanner, line: int, col: int, error) -> tuple[str, bool]:
    out = []
    while True:
        if sc.eof() or sc.peek() in "\n\r":
            error(BAD_LITERAL, "unterminated string literal", line, col)
            return "", False
        c = sc.advance()
        if c == '"':
            return "".join(out), True
        if c == "\\":
            if sc.eof():
                error(BAD_LITERAL, "unterminated string escape", line, col)
                return "", False
            e = sc.advance()
            if e in _ESCAPES:
                out.append(_ESCAPES[e])
            elif e in ("u", "U"):
                decoded = _scan_uchar(sc, 4 if e == "u" else 8)
                if decoded is None:
                    error(BAD_LITERAL, "bad numeric escape in string", line, col)
                    return "", False
                out.append(decoded)
            else:
                error(BAD_LITERAL, f"unknown escape \\{e}", line, col)
                return "", False
        else:
            out.append(c)


class _TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, *kinds: str) -> bool:
        return self.tokens[self.pos].kind in kinds


class _StatementError(Exception):
    """Internal: aborts the current statement after recording a diagnostic."""


class _TurtleParser:
    def __init__(self, text: str):
        self.stream = _TokenStream(tokenize(text))
        self.graph = Graph()
        self.diagnostics: list[ParseDiagnostic] = []
        self._anon_count = 0
        self._doc_labels = {
            tok.value for tok in self.stream.tokens if tok.kind == "bnode"
        }

    def fail(self, tok: Token, code: str, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(tok.line, tok.column, code, message))
        raise _StatementError

    def fail_token(self, tok: Token) -> None:
        if tok.kind == "error":
            self.diagnostics.append(tok.value)
            raise _StatementError
        if tok.kind == "eof":
            self.fail(tok, UNTERMINATED_STATEMENT, "statement not closed before end of input")
        self.fail(tok, UNEXPECTED_TOKEN, f"unexpected {_describe(tok)}")

    def skip_statement(self) -> None:
        while not self.stream.at("eof"):
            if self.stream.next().kind == "dot":
                return

    def parse(self) -> Graph:
        while not self.stream.at("eof"):
            try:
                self.statement()
            except _StatementError:
                self.skip_statement()
        if self.diagnostics:
            raise ParseError(self.diagnostics)
        return self.graph

    def statement(self) -> None:
        tok = self.stream.peek()
        if tok.kind == "directive":
            self.directive()
        else:
            self.triples()

    def directive(self) -> None:
        tok = self.stream.next()
        if tok.value == "base":
            self.fail(tok, UNSUPPORTED_KEYWORD, "@base is not supported")
        pname = self.stream.next()
        if pname.kind != "pname" or pname.value[1] != "":
            self.fail_token(pname)
        iri = self.stream.next()
        if iri.kind != "iriref":
            self.fail_token(iri)
        dot = self.stream.next()
        if dot.kind != "dot":
            self.fail_token(dot)
        self.graph.bind(pname.value[0], iri.value)

    def triples(self) -> None:
        subject = self.term(position="subject")
        self.predicate_object_list(subject)
        dot = self.stream.next()
        if dot.kind != "dot":
            self.fail_token(dot)

    def predicate_object_list(self, subject: Term) -> None:
        while True:
            predicate = self.verb()
            self.object_list(subject, predicate)
            if self.stream.at("semicolon"):
                while self.stream.at("semicolon"):
                    self.stream.next()
                if self.stream.at("dot"):
                    return
                continue
            return

    def object_list(self, subject: Term, predicate: Term) -> None:
        while True:
            obj = self.term(position="object")
            try:
                self.graph.insert(Triple(subject, predicate, obj))
            except TermError as exc:
                self.fail(self.stream.peek(), UNEXPECTED_TOKEN, str(exc))
            if self.stream.at("comma"):
                self.stream.next()
                continue
            return

    def verb(self) -> Term:
        tok = self.stream.peek()
        if tok.kind == "name" and tok.value == "a":
            self.stream.next()
            return RDF.type
        term = self.term(position="predicate")
        if not isinstance(term, IRI):
            self.fail(tok, UNEXPECTED_TOKEN, "predicate must be an IRI")
        return term

    def term(self, position: str) -> Term:
        tok = self.stream.next()
        if tok.kind == "iriref":
            return self._make_iri(tok)
        if tok.kind == "pname":
            return self._expand(tok)
        if tok.kind == "bnode":
            if position == "predicate":
                self.fail(tok, UNEXPECTED_TOKEN, "blank node cannot be a predicate")
            return BlankNode(tok.value)
        if tok.kind == "anon":
            if position == "predicate":
                self.fail(tok, UNEXPECTED_TOKEN, "blank node cannot be a predicate")
            return self._fresh_anon()
        if tok.kind == "string":
            if position != "object":
                self.fail(tok, UNEXPECTED_TOKEN, f"literal cannot be a {position}")
            return self.literal_rest(tok)
        self.fail_token(tok)
        raise AssertionError("unreachable")

    def literal_rest(self, string_tok: Token) -> Literal:
        if self.stream.at("langtag"):
            tag = self.stream.next()
            return Literal(string_tok.value, language=tag.value)
        if self.stream.at("dtmarker"):
            self.stream.next()
            dt_tok = self.stream.next()
            if dt_tok.kind == "iriref":
                dt = self._make_iri(dt_tok)
            elif dt_tok.kind == "pname":
                dt = self._expand(dt_tok)
            else:
                self.fail_token(dt_tok)
            try:
                return Literal(string_tok.value, datatype=dt.value)
            except TermError as exc:
                self.fail(string_tok, BAD_LITERAL, str(exc))
        return Literal(string_tok.value)

    def _make_iri(self, tok: Token) -> IRI:
        try:
            return IRI(tok.value)
        except TermError:
            self.fail(tok, BAD_IRI, f"IRI is not absolute: <{tok.value}>")
            raise AssertionError("unreachable")

    def _expand(self, tok: Token) -> IRI:
        prefix, local = tok.value
        try:
            return expand_qname(self.graph.prefixes, f"{prefix}:{local}")
        except UnknownPrefixError:
            self.fail(tok, UNKNOWN_PREFIX, f"prefix {prefix!r} is not declared")
            raise AssertionError("unreachable")

    def _fresh_anon(self) -> BlankNode:
        while True:
            self._anon_count += 1
            label = f"anon{self._anon_count}"
            if label not in self._doc_labels:
                self._doc_labels.add(label)
                return BlankNode(label)


def _describe(tok: Token) -> str:
    if tok.kind == "pname":
        return f"name {tok.value[0]}:{tok.value[1]}"
    if tok.kind in ("name", "directive"):
        return f"{tok.value!r}"
    return f"{tok.kind} token"


def parse_turtle(text: str) -> Graph:
    """Parse a Turtle document; raises ParseError carrying all diagnostics."""
    return _TurtleParser(text).parse()


_LITERAL_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


def _escape_lexical(value: str) -> str:
    out = []
    for c in value:
        if c in _LITERAL_ESCAPES:
            out.append(_LITERAL_ESCAPES[c])
        elif ord(c) < 0x20 or ord(c) == 0x7F:
            out.append(f"\\u{ord(c):04X}")
        else:
            out.append(c)
    return "".join(out)


def _iri_text(iri: IRI, prefixes: dict[str, str]) -> str:
    compacted = compact_iri(prefixes, iri)
    if compacted is not None:
        return compacted
    escaped = "".join(
        f"\\u{ord(c):04X}" if (ord(c) <= 0x20 or c in _IRI_FORBIDDEN or c == ">") else c
        for c in iri.value
    )
    return f"<{escaped}>"


def term_to_turtle(term: Term, prefixes: dict[str, str] | None = None) -> str:
    """Render one term the way serialize_turtle would."""
    prefixes = prefixes or {}
    if isinstance(term, IRI):
        return _iri_text(term, prefixes)
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    body = f'"{_escape_lexical(term.lexical)}"'
    if term.language is not None:
        return f"{body}@{term.language}"
    if term.datatype == XSD_STRING:
        return body
    return f"{body}^^{_iri_text(IRI(term.datatype), prefixes)}"


def serialize_turtle(graph: Graph) -> str:
    """Write a graph as Turtle.

    Prefix lines sort by label, subjects sort lexicographically, rdf:type
    comes first within a subject (as "a"), repeated predicates group
    their objects with ",". The output re-parses to an equal graph.
    """
    lines = [
        f"@prefix {prefix}: <{ns}> ."
        for prefix, ns in sorted(graph.prefixes.items())
    ]
    subjects = sorted({t.subject for t in graph.match()}, key=term_key)
    if lines and subjects:
        lines.append("")
    rdf_type = RDF.type
    for subject in subjects:
        by_pred: dict[Term, list[Term]] = {}
        for t in graph.match(subject, None, None):
            by_pred.setdefault(t.predicate, []).append(t.object)
        preds = sorted(by_pred, key=lambda p: (p != rdf_type, term_key(p)))
        entries = []
        for pred in preds:
            verb = "a" if pred == rdf_type else term_to_turtle(pred, graph.prefixes)
            objects = ", ".join(
                term_to_turtle(o, graph.prefixes)
                for o in sorted(by_pred[pred], key=term_key)
            )
            entries.append(f"{verb} {objects}")
        head = term_to_turtle(subject, graph.prefixes)
        body = " ;\n    ".join(entries)
        lines.append(f"{head} {body} .")
    return "\n".join(lines) + ("\n" if lines else "")
