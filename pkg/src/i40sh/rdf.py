"""RDF data model: terms, triples, and an indexed in-memory graph.

Terms are immutable value objects; a graph keeps its triples in three
orderings (subject-first, predicate-first, object-first) so that any
partially bound lookup walks the index with the most bound leading
positions. Iteration order is deterministic everywhere: terms sort by
their N-Triples-style serialization, which keeps serializer output and
golden test files stable.

Concurrency model: a graph tolerates many concurrent readers or one
writer. Writers must not interleave with readers; components that share
a graph across threads (the registry does) swap whole-graph references
instead of mutating in place.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
SKOS_NS = "http://www.w3.org/2004/02/skos/core#"
DCTERMS_NS = "http://purl.org/dc/terms/"
I40C_NS = "http://purl.org/eis/i40c/"
IEC_NS = "http://purl.org/eis/ieccdd/"
PARTOF_NS = "http://www.ontologydesignpatterns.org/cp/owl/partof.owl#"

XSD_STRING = XSD_NS + "string"
XSD_DATE = XSD_NS + "date"
RDF_LANG_STRING = RDF_NS + "langString"

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")
_LANG_TAG_RE = re.compile(r"^[A-Za-z]{1,8}(?:-[A-Za-z0-9]{1,8})*$")


class TermError(ValueError):
    """Raised when a term or triple violates a structural invariant."""


@dataclass(frozen=True, slots=True)
class IRI:
    """An absolute IRI (must carry a scheme)."""

    value: str

    def __post_init__(self) -> None:
        if not _SCHEME_RE.match(self.value):
            raise TermError(f"IRI is not absolute: {self.value!r}")

    def __repr__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class BlankNode:
    """A document-scoped blank node with a local label."""

    label: str

    def __repr__(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, slots=True)
class Literal:
    """A literal: lexical form plus datatype IRI and optional language tag.

    Normalization rules applied at construction:
    - no datatype and no language -> plain string datatype
    - a language tag forces the language-string datatype and is lowercased
    - a language-string datatype without a tag is rejected
    Equality is lexical; "1.0" and "1.00" are different literals.
    """

    lexical: str
    datatype: str = XSD_STRING
    language: str | None = None

    def __post_init__(self) -> None:
        if self.language is not None:
            if not _LANG_TAG_RE.match(self.language):
                raise TermError(f"malformed language tag: {self.language!r}")
            object.__setattr__(self, "language", self.language.lower())
            object.__setattr__(self, "datatype", RDF_LANG_STRING)
        elif self.datatype == RDF_LANG_STRING:
            raise TermError("language-string literal without a language tag")

    def __repr__(self) -> str:
        return term_key(self)


Term = IRI | BlankNode | Literal


def term_key(t: Term) -> str:
    """Deterministic sort/serialization key (N-Triples flavored)."""
    if isinstance(t, IRI):
        return f"<{t.value}>"
    if isinstance(t, BlankNode):
        return f"_:{t.label}"
    if t.language is not None:
        return f'"{t.lexical}"@{t.language}'
    if t.datatype == XSD_STRING:
        return f'"{t.lexical}"'
    return f'"{t.lexical}"^^<{t.datatype}>'


@dataclass(frozen=True, slots=True)
class Triple:
    """A subject-predicate-object statement.

    The predicate is always an IRI and the subject is never a literal.
    """

    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.predicate, IRI):
            raise TermError(f"predicate must be an IRI, got {self.predicate!r}")
        if isinstance(self.subject, Literal):
            raise TermError("subject must not be a literal")
        if not isinstance(self.subject, (IRI, BlankNode)):
            raise TermError(f"bad subject: {self.subject!r}")
        if not isinstance(self.object, (IRI, BlankNode, Literal)):
            raise TermError(f"bad object: {self.object!r}")

    def __repr__(self) -> str:
        return (
            f"{term_key(self.subject)} {term_key(self.predicate)} "
            f"{term_key(self.object)} ."
        )


class Namespace:
    """Builds IRI terms below a common namespace: ``NS.Actuator``."""

    def __init__(self, base: str):
        self.base = base

    def __getattr__(self, local: str) -> IRI:
        if local.startswith("_"):
            raise AttributeError(local)
        return IRI(self.base + local)

    def term(self, local: str) -> IRI:
        return IRI(self.base + local)

    def __contains__(self, iri: Term) -> bool:
        return isinstance(iri, IRI) and iri.value.startswith(self.base)


RDF = Namespace(RDF_NS)
RDFS = Namespace(RDFS_NS)
XSD = Namespace(XSD_NS)
OWL = Namespace(OWL_NS)
SKOS = Namespace(SKOS_NS)
DCTERMS = Namespace(DCTERMS_NS)
I40C = Namespace(I40C_NS)
IEC = Namespace(IEC_NS)
PARTOF = Namespace(PARTOF_NS)

#: Prefix bindings shared by the vocabulary, fixtures, and CLI output.
WELL_KNOWN_PREFIXES: dict[str, str] = {
    "i40c": I40C_NS,
    "iec": IEC_NS,
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "xsd": XSD_NS,
    "owl": OWL_NS,
    "skos": SKOS_NS,
    "dcterms": DCTERMS_NS,
    "partof": PARTOF_NS,
}


class UnknownPrefixError(KeyError):
    """A qualified name used a prefix that is not declared."""

    def __init__(self, prefix: str):
        super().__init__(prefix)
        self.prefix = prefix

    def __str__(self) -> str:
        return f"unknown prefix {self.prefix!r}"


def expand_qname(prefixes: dict[str, str], qname: str) -> IRI:
    """Expand ``prefix:local`` against a prefix map into an IRI term."""
    prefix, sep, local = qname.partition(":")
    if not sep:
        raise ValueError(f"not a qualified name: {qname!r}")
    if prefix not in prefixes:
        raise UnknownPrefixError(prefix)
    return IRI(prefixes[prefix] + local)


# Local parts the serializer will re-emit as prefixed names. Anything
# else (dots, slashes, percent escapes) is written as a full IRI.
_SAFE_LOCAL_RE = re.compile(r"^(?:[A-Za-z_][A-Za-z0-9_-]*)?$")


def compact_iri(prefixes: dict[str, str], iri: IRI) -> str | None:
    """Shrink an IRI to ``prefix:local`` if a declared namespace covers it.

    The longest matching namespace wins; ties break on the prefix label.
    Returns None when no binding applies or the local part would not
    re-parse as a prefixed name.
    """
    best: tuple[int, str, str] | None = None
    for prefix, ns in prefixes.items():
        if iri.value.startswith(ns):
            local = iri.value[len(ns):]
            if not _SAFE_LOCAL_RE.match(local):
                continue
            cand = (len(ns), prefix, local)
            if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                best = cand
    if best is None:
        return None
    return f"{best[1]}:{best[2]}"


class Graph:
    """A duplicate-free set of triples with three lookup orderings.

    The same triples live in subject->predicate->object,
    predicate->object->subject, and object->subject->predicate maps;
    ``match`` picks whichever index has the most bound leading positions
    and yields results in sorted term order.
    """

    def __init__(self, prefixes: dict[str, str] | None = None):
        self._spo: dict[Term, dict[Term, set[Term]]] = {}
        self._pos: dict[Term, dict[Term, set[Term]]] = {}
        self._osp: dict[Term, dict[Term, set[Term]]] = {}
        self._size = 0
        self.prefixes: dict[str, str] = dict(prefixes or {})
        self._bnode_counter = 0

    def __len__(self) -> int:
        return self._size

    def __contains__(self, t: Triple) -> bool:
        objs = self._spo.get(t.subject, {}).get(t.predicate)
        return objs is not None and t.object in objs

    def __iter__(self) -> Iterator[Triple]:
        return self.match()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.triple_set() == other.triple_set()

    def __repr__(self) -> str:
        return f"Graph({self._size} triples, {len(self.prefixes)} prefixes)"

    def bind(self, prefix: str, namespace: str) -> None:
        self.prefixes[prefix] = namespace

    def triple_set(self) -> frozenset[Triple]:
        return frozenset(self.match())

    def insert(self, t: Triple) -> bool:
        """Add a triple; returns False if it was already present."""
        if t in self:
            return False
        for index, a, b, c in (
            (self._spo, t.subject, t.predicate, t.object),
            (self._pos, t.predicate, t.object, t.subject),
            (self._osp, t.object, t.subject, t.predicate),
        ):
            index.setdefault(a, {}).setdefault(b, set()).add(c)
        self._size += 1
        return True

    def add(self, subject: Term, predicate: Term, obj: Term) -> bool:
        return self.insert(Triple(subject, predicate, obj))

    def remove(self, t: Triple) -> bool:
        """Remove a triple; returns False if it was absent."""
        if t not in self:
            return False
        for index, a, b, c in (
            (self._spo, t.subject, t.predicate, t.object),
            (self._pos, t.predicate, t.object, t.subject),
            (self._osp, t.object, t.subject, t.predicate),
        ):
            level = index[a]
            level[b].discard(c)
            if not level[b]:
                del level[b]
            if not level:
                del index[a]
        self._size -= 1
        return True

    def match(
        self,
        s: Term | None = None,
        p: Term | None = None,
        o: Term | None = None,
    ) -> Iterator[Triple]:
        """Yield the triples matching the bound positions, sorted.

        Index choice: (s,*,*) and (s,p,*) walk SPO; (*,p,*) and (*,p,o)
        walk POS; (*,*,o) and (s,*,o) walk OSP; fully bound is a direct
        membership probe.
        """
        if s is not None and p is not None and o is not None:
            t = Triple(s, p, o)
            if t in self:
                yield t
            return
        if s is not None and o is None:
            by_pred = self._spo.get(s, {})
            preds = [p] if p is not None else sorted(by_pred, key=term_key)
            for pred in preds:
                for obj in sorted(by_pred.get(pred, ()), key=term_key):
                    yield Triple(s, pred, obj)
            return
        if p is not None and s is None:
            by_obj = self._pos.get(p, {})
            objs = [o] if o is not None else sorted(by_obj, key=term_key)
            for obj in objs:
                for subj in sorted(by_obj.get(obj, ()), key=term_key):
                    yield Triple(subj, p, obj)
            return
        if o is not None:
            by_subj = self._osp.get(o, {})
            subjects = [s] if s is not None else sorted(by_subj, key=term_key)
            for subj in subjects:
                for pred in sorted(by_subj.get(subj, ()), key=term_key):
                    yield Triple(subj, pred, o)
            return
        for subj in sorted(self._spo, key=term_key):
            by_pred = self._spo[subj]
            for pred in sorted(by_pred, key=term_key):
                for obj in sorted(by_pred[pred], key=term_key):
                    yield Triple(subj, pred, obj)

    def subjects(self, p: Term | None = None, o: Term | None = None) -> list[Term]:
        """Distinct subjects of triples matching (p, o), sorted."""
        return sorted({t.subject for t in self.match(None, p, o)}, key=term_key)

    def objects(self, s: Term | None = None, p: Term | None = None) -> list[Term]:
        """Distinct objects of triples matching (s, p), sorted."""
        return sorted({t.object for t in self.match(s, p, None)}, key=term_key)

    def value(self, s: Term, p: Term) -> Term | None:
        """First object of (s, p, *) in sorted order, or None."""
        for t in self.match(s, p, None):
            return t.object
        return None

    def terms(self) -> list[Term]:
        """Every distinct term appearing in any position, sorted."""
        seen: set[Term] = set()
        for t in self.match():
            seen.update((t.subject, t.predicate, t.object))
        return sorted(seen, key=term_key)

    def blank_labels(self) -> set[str]:
        labels: set[str] = set()
        for t in self.match():
            for term in (t.subject, t.object):
                if isinstance(term, BlankNode):
                    labels.add(term.label)
        return labels

    def fresh_blank(self) -> BlankNode:
        """A blank node whose label collides with nothing in this graph."""
        used = self.blank_labels()
        while True:
            self._bnode_counter += 1
            label = f"b{self._bnode_counter}"
            if label not in used:
                return BlankNode(label)

    def copy(self) -> Graph:
        g = Graph(self.prefixes)
        g._bnode_counter = self._bnode_counter
        for t in self.match():
            g.insert(t)
        return g


def merge(a: Graph, b: Graph) -> Graph:
    """Set-union of two graphs into a fresh graph.

    Blank nodes from ``b`` whose labels collide with ``a`` are renamed
    from a fresh monotonic counter (sorted label order, so the result is
    deterministic). Prefix maps are merged with ``a`` winning conflicts.
    """
    result = a.copy()
    for prefix, ns in b.prefixes.items():
        result.prefixes.setdefault(prefix, ns)
    taken = result.blank_labels()
    renames: dict[str, BlankNode] = {}
    for label in sorted(b.blank_labels()):
        if label in taken:
            fresh = result.fresh_blank()
            renames[label] = fresh
            taken.add(fresh.label)

    def rewrite(term: Term) -> Term:
        if isinstance(term, BlankNode) and term.label in renames:
            return renames[term.label]
        return term

    for t in b.match():
        result.insert(Triple(rewrite(t.subject), t.predicate, rewrite(t.object)))
    return result


def concise_bounded_description(graph: Graph, resource: Term) -> Graph:
    """Triples with ``resource`` as subject, closing over blank-node objects."""
    result = Graph(graph.prefixes)
    queue = [resource]
    visited: set[Term] = set()
    while queue:
        node = queue.pop()
        if node in visited:
            continue
        visited.add(node)
        for t in graph.match(node, None, None):
            result.insert(t)
            if isinstance(t.object, BlankNode):
                queue.append(t.object)
    return result


def isomorphic(a: Graph, b: Graph) -> bool:
    """Equality up to a bijective renaming of blank nodes.

    Ground triples must match exactly; blank nodes are first partitioned
    by an iteratively refined neighborhood signature, then remaining
    ambiguity is resolved by backtracking (graphs here are small).
    """
    if len(a) != len(b):
        return False

    def split(g: Graph) -> tuple[set[Triple], list[Triple]]:
        ground, bnodey = set(), []
        for t in g.match():
            if isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode):
                bnodey.append(t)
            else:
                ground.add(t)
        return ground, bnodey

    ground_a, tri_a = split(a)
    ground_b, tri_b = split(b)
    if ground_a != ground_b or len(tri_a) != len(tri_b):
        return False
    if not tri_a:
        return True

    def signatures(triples: list[Triple]) -> dict[str, str]:
        sig = {
            t.label: ""
            for tr in triples
            for t in (tr.subject, tr.object)
            if isinstance(t, BlankNode)
        }
        for _ in range(len(sig) + 1):
            nxt: dict[str, list[str]] = {label: [] for label in sig}
            for tr in triples:
                s_b = isinstance(tr.subject, BlankNode)
                o_b = isinstance(tr.object, BlankNode)
                s_key = sig[tr.subject.label] if s_b else term_key(tr.subject)
                o_key = sig[tr.object.label] if o_b else term_key(tr.object)
                p_key = term_key(tr.predicate)
                if s_b:
                    nxt[tr.subject.label].append(f"+{p_key}|{o_key}")
                if o_b:
                    nxt[tr.object.label].append(f"-{p_key}|{s_key}")
            new_sig = {lbl: ";".join(sorted(parts)) for lbl, parts in nxt.items()}
            if new_sig == sig:
                break
            sig = new_sig
        return sig

    sig_a, sig_b = signatures(tri_a), signatures(tri_b)
    if sorted(sig_a.values()) != sorted(sig_b.values()):
        return False

    labels_a = sorted(sig_a)
    candidates = {
        la: sorted(lb for lb in sig_b if sig_b[lb] == sig_a[la]) for la in labels_a
    }
    set_b = set(tri_b)

    def check(mapping: dict[str, str]) -> bool:
        for tr in tri_a:
            s = (
                BlankNode(mapping[tr.subject.label])
                if isinstance(tr.subject, BlankNode)
                else tr.subject
            )
            o = (
                BlankNode(mapping[tr.object.label])
                if isinstance(tr.object, BlankNode)
                else tr.object
            )
            if Triple(s, tr.predicate, o) not in set_b:
                return False
        return True

    def assign(i: int, mapping: dict[str, str], used: set[str]) -> bool:
        if i == len(labels_a):
            return check(mapping)
        la = labels_a[i]
        for lb in candidates[la]:
            if lb in used:
                continue
            mapping[la] = lb
            used.add(lb)
            if assign(i + 1, mapping, used):
                return True
            used.discard(lb)
            del mapping[la]
        return False

    return assign(0, {}, set())
