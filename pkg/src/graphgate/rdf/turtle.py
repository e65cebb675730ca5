"""Reader for the small Turtle subset used by policy pack files.

Supported: @prefix directives, prefixed names, <> IRIs, the 'a' keyword,
';' and ',' abbreviations, string literals with ^^datatype or @lang, bare
booleans and integers, and '#' comments. This is intentionally not a full
Turtle parser; N-Triples remains the exchange format.
"""

from __future__ import annotations

import re

from .ntriples import ParseError
from .terms import (
    XSD_BOOLEAN,
    XSD_INTEGER,
    Iri,
    Literal,
    Quad,
    Term,
    TermError,
)

RDF_TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<prefix_decl>@prefix\b)
  | (?P<iri><[^<>"\s]*>)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<dtype>\^\^)
  | (?P<lang>@[A-Za-z][A-Za-z0-9-]*)
  | (?P<punct>[.;,])
  | (?P<pname>[A-Za-z][\w.-]*:[\w][\w.-]*|[A-Za-z][\w.-]*:)
  | (?P<keyword>\b(?:a|true|false)\b)
  | (?P<integer>[+-]?\d+)
    """,
    re.VERBOSE,
)

_UNESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(body: str, line: int) -> str:
    out: list[str] = []
    i = 0
    while i < len(body):
        c = body[i]
        if c != "\\":
            out.append(c)
            i += 1
            continue
        esc = body[i + 1]
        if esc in _UNESCAPES:
            out.append(_UNESCAPES[esc])
            i += 2
        elif esc == "u":
            out.append(chr(int(body[i + 2 : i + 6], 16)))
            i += 6
        elif esc == "U":
            out.append(chr(int(body[i + 2 : i + 10], 16)))
            i += 10
        else:
            raise ParseError(f"unknown escape \\{esc}", line)
    return "".join(out)


class _Tokens:
    def __init__(self, text: str):
        self.items: list[tuple[str, str, int]] = []
        line = 1
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", line)
            kind = m.lastgroup or ""
            value = m.group()
            if kind not in ("ws", "comment"):
                self.items.append((kind, value, line))
            line += value.count("\n")
            pos = m.end()
        self.index = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.items[self.index] if self.index < len(self.items) else None

    def next(self) -> tuple[str, str, int]:
        item = self.peek()
        if item is None:
            last_line = self.items[-1][2] if self.items else 1
            raise ParseError("unexpected end of input", last_line)
        self.index += 1
        return item


def parse_turtle(text: str | bytes, graph: Iri) -> list[Quad]:
    """Parse the Turtle subset into quads, preserving statement order."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    tokens = _Tokens(text)
    prefixes: dict[str, str] = {}
    quads: list[Quad] = []

    def resolve_pname(pname: str, line: int) -> Iri:
        prefix, _, local = pname.partition(":")
        base = prefixes.get(prefix)
        if base is None:
            raise ParseError(f"undeclared prefix {prefix!r}", line)
        try:
            return Iri(base + local)
        except TermError as exc:
            raise ParseError(str(exc), line) from exc

    def read_node(allow_literal: bool) -> Term:
        kind, value, line = tokens.next()
        if kind == "iri":
            try:
                return Iri(value[1:-1])
            except TermError as exc:
                raise ParseError(str(exc), line) from exc
        if kind == "pname":
            return resolve_pname(value, line)
        if kind == "keyword" and value in ("true", "false"):
            if not allow_literal:
                raise ParseError("boolean literal not allowed here", line)
            return Literal(value, datatype=XSD_BOOLEAN)
        if kind == "integer":
            if not allow_literal:
                raise ParseError("numeric literal not allowed here", line)
            return Literal(value, datatype=XSD_INTEGER)
        if kind == "string":
            if not allow_literal:
                raise ParseError("string literal not allowed here", line)
            lexical = _unescape(value[1:-1], line)
            nxt = tokens.peek()
            if nxt and nxt[0] == "lang":
                tokens.next()
                return Literal(lexical, lang=nxt[1][1:])
            if nxt and nxt[0] == "dtype":
                tokens.next()
                dt = read_node(allow_literal=False)
                if not isinstance(dt, Iri):
                    raise ParseError("datatype must be an IRI", line)
                try:
                    return Literal(lexical, datatype=dt.value)
                except TermError as exc:
                    raise ParseError(str(exc), line) from exc
            return Literal(lexical)
        raise ParseError(f"unexpected token {value!r}", line)

    def read_predicate() -> Iri:
        nxt = tokens.peek()
        if nxt and nxt[0] == "keyword" and nxt[1] == "a":
            tokens.next()
            return RDF_TYPE
        node = read_node(allow_literal=False)
        if not isinstance(node, Iri):
            raise ParseError("predicate must be an IRI", nxt[2] if nxt else 1)
        return node

    while tokens.peek() is not None:
        kind, value, line = tokens.next()
        if kind == "prefix_decl":
            pkind, pvalue, pline = tokens.next()
            if pkind != "pname" or not pvalue.endswith(":"):
                raise ParseError("@prefix expects 'name:'", pline)
            ikind, ivalue, iline = tokens.next()
            if ikind != "iri":
                raise ParseError("@prefix expects an IRI", iline)
            dkind, _, dline = tokens.next()
            if dkind != "punct":
                raise ParseError("@prefix must end with '.'", dline)
            prefixes[pvalue[:-1]] = ivalue[1:-1]
            continue

        # A statement: rewind one token and read subject / predicate lists.
        tokens.index -= 1
        subject = read_node(allow_literal=False)
        while True:
            predicate = read_predicate()
            while True:
                obj = read_node(allow_literal=True)
                try:
                    quads.append(Quad(subject, predicate, obj, graph))
                except TermError as exc:
                    raise ParseError(str(exc), line) from exc
                nxt = tokens.peek()
                if nxt and nxt[0] == "punct" and nxt[1] == ",":
                    tokens.next()
                    continue
                break
            kind2, value2, line2 = tokens.next()
            if kind2 != "punct":
                raise ParseError(f"expected '.' or ';', got {value2!r}", line2)
            if value2 == ".":
                break
            if value2 == ";":
                nxt = tokens.peek()
                # allow a dangling ';' before '.'
                if nxt and nxt[0] == "punct" and nxt[1] == ".":
                    tokens.next()
                    break
                continue
            raise ParseError(f"unexpected {value2!r} in statement", line2)

    return quads


def parse_policy_text(text: str | bytes, graph: Iri) -> list[Quad]:
    """Parse a policy file in either N-Triples or the Turtle subset.

    Files containing an @prefix directive are treated as Turtle.
    """
    probe = text.decode("utf-8", errors="replace") if isinstance(text, bytes) else text
    if "@prefix" in probe:
        return parse_turtle(text, graph)
    from .ntriples import parse_ntriples

    return parse_ntriples(text, graph)
