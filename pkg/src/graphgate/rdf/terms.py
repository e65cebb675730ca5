"""RDF term and quad model: IRIs, literals, blank nodes, quads.

Terms are immutable value objects; equality and hashing are structural so
quads can live in sets and index maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

XSD_STRING = "http://www.w3.org/2001/XMLSchema#string"
XSD_BOOLEAN = "http://www.w3.org/2001/XMLSchema#boolean"
XSD_INTEGER = "http://www.w3.org/2001/XMLSchema#integer"
XSD_DECIMAL = "http://www.w3.org/2001/XMLSchema#decimal"
XSD_DATETIME = "http://www.w3.org/2001/XMLSchema#dateTime"
XSD_DATE = "http://www.w3.org/2001/XMLSchema#date"

_BOOL_LEXICAL = {"true": "true", "false": "false", "1": "true", "0": "false"}


class TermError(ValueError):
    """Raised when a term violates its structural invariants."""


def _is_absolute_iri(value: str) -> bool:
    # Absolute IRI: a scheme (letter followed by letters/digits/+/-/.)
    # terminated by ':'. Whitespace and angle brackets are never legal.
    if not value or any(c in value for c in ' <>"{}|\\^`\n\r\t'):
        return False
    head, sep, _ = value.partition(":")
    if not sep or not head:
        return False
    if not head[0].isalpha():
        return False
    return all(c.isalnum() or c in "+-." for c in head)


@dataclass(frozen=True)
class Iri:
    """An absolute IRI."""

    value: str

    def __post_init__(self) -> None:
        if not _is_absolute_iri(self.value):
            raise TermError(f"not an absolute IRI: {self.value!r}")

    def __repr__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True)
class Literal:
    """A literal with a lexical form and either a datatype IRI or a language tag.

    The datatype defaults to xsd:string. Boolean lexical forms are normalized
    to exactly "true"/"false" at construction time.
    """

    lexical: str
    datatype: str = XSD_STRING
    lang: str | None = None

    def __post_init__(self) -> None:
        if self.lang is not None and self.datatype != XSD_STRING:
            raise TermError("a language-tagged literal cannot carry a datatype")
        if self.datatype == XSD_BOOLEAN:
            canon = _BOOL_LEXICAL.get(self.lexical)
            if canon is None:
                raise TermError(f"bad boolean lexical form: {self.lexical!r}")
            object.__setattr__(self, "lexical", canon)

    def __repr__(self) -> str:
        if self.lang:
            return f'"{self.lexical}"@{self.lang}'
        if self.datatype != XSD_STRING:
            return f'"{self.lexical}"^^<{self.datatype}>'
        return f'"{self.lexical}"'


@dataclass(frozen=True)
class BlankNode:
    """A blank node with a store-scoped label."""

    label: str

    def __post_init__(self) -> None:
        if not self.label or not all(c.isalnum() or c in "_-." for c in self.label):
            raise TermError(f"bad blank node label: {self.label!r}")

    def __repr__(self) -> str:
        return f"_:{self.label}"


Term = Union[Iri, Literal, BlankNode]


def lit(value: str, datatype: str = XSD_STRING, lang: str | None = None) -> Literal:
    return Literal(value, datatype=datatype, lang=lang)


def lit_bool(value: bool) -> Literal:
    return Literal("true" if value else "false", datatype=XSD_BOOLEAN)


def lit_int(value: int) -> Literal:
    return Literal(str(value), datatype=XSD_INTEGER)


def lit_datetime(iso: str) -> Literal:
    return Literal(iso, datatype=XSD_DATETIME)


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


# NEL and the Unicode line/paragraph separators would break the
# line-oriented format if written raw, so they are escaped alongside
# the ASCII control range.
_FORCED_ESCAPE = {0x85, 0x2028, 0x2029}


def _escape_lexical(s: str) -> str:
    out = []
    for c in s:
        if c in _ESCAPES:
            out.append(_ESCAPES[c])
        elif ord(c) < 0x20 or ord(c) in _FORCED_ESCAPE:
            out.append(f"\\u{ord(c):04X}")
        else:
            out.append(c)
    return "".join(out)


def term_to_nt(term: Term) -> str:
    """Canonical N-Triples serialization of a single term."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if isinstance(term, Literal):
        body = f'"{_escape_lexical(term.lexical)}"'
        if term.lang:
            return f"{body}@{term.lang}"
        if term.datatype != XSD_STRING:
            return f"{body}^^<{term.datatype}>"
        return body
    raise TermError(f"not a term: {term!r}")


@dataclass(frozen=True)
class Quad:
    """One graph statement in a named graph."""

    subject: Term
    predicate: Term
    object: Term
    graph: Iri = field(default_factory=lambda: Iri("urn:graph:default"))

    def __post_init__(self) -> None:
        if not isinstance(self.subject, (Iri, BlankNode)):
            raise TermError(f"quad subject must be an IRI or blank node: {self.subject!r}")
        if not isinstance(self.predicate, Iri):
            raise TermError(f"quad predicate must be an IRI: {self.predicate!r}")
        if not isinstance(self.object, (Iri, Literal, BlankNode)):
            raise TermError(f"quad object must be a term: {self.object!r}")
        if not isinstance(self.graph, Iri):
            raise TermError(f"quad graph must be an IRI: {self.graph!r}")

    def triple_nt(self) -> str:
        return f"{term_to_nt(self.subject)} {term_to_nt(self.predicate)} {term_to_nt(self.object)} ."


def term_sort_key(term: Term) -> tuple[int, str]:
    """Total order over terms: blank nodes, then IRIs, then literals."""
    if isinstance(term, BlankNode):
        return (0, term.label)
    if isinstance(term, Iri):
        return (1, term.value)
    return (2, term_to_nt(term))
