"""Line-based N-Triples reader and canonical writer.

The reader accepts one triple per line, `#` comments and blank lines. Any
syntax error aborts the whole load and reports the offending line number so
callers never end up with a partially loaded graph.
"""

from __future__ import annotations

from .terms import BlankNode, Iri, Literal, Quad, Term, TermError


class ParseError(ValueError):
    """Syntax error in an N-Triples or Turtle-subset document."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_UNESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


class _Scanner:
    """Cursor over a single physical line."""

    def __init__(self, text: str, line_no: int):
        self.text = text
        self.pos = 0
        self.line_no = line_no

    def error(self, message: str) -> ParseError:
        return ParseError(f"{message} (at column {self.pos + 1})", self.line_no)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char: str) -> None:
        if self.peek() != char:
            raise self.error(f"expected {char!r}")
        self.pos += 1

    def read_iri(self) -> Iri:
        self.expect("<")
        end = self.text.find(">", self.pos)
        if end < 0:
            raise self.error("unterminated IRI")
        raw = self.text[self.pos : end]
        self.pos = end + 1
        try:
            return Iri(raw)
        except TermError as exc:
            raise self.error(str(exc)) from exc

    def read_bnode(self) -> BlankNode:
        self.expect("_")
        self.expect(":")
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] in "_-."):
            self.pos += 1
        if self.pos == start:
            raise self.error("empty blank node label")
        try:
            return BlankNode(self.text[start : self.pos])
        except TermError as exc:
            raise self.error(str(exc)) from exc

    def read_string(self) -> str:
        self.expect('"')
        out: list[str] = []
        while True:
            if self.at_end():
                raise self.error("unterminated string literal")
            c = self.text[self.pos]
            self.pos += 1
            if c == '"':
                return "".join(out)
            if c == "\\":
                if self.at_end():
                    raise self.error("dangling escape")
                esc = self.text[self.pos]
                self.pos += 1
                if esc in _UNESCAPES:
                    out.append(_UNESCAPES[esc])
                elif esc == "u":
                    out.append(self._read_hex(4))
                elif esc == "U":
                    out.append(self._read_hex(8))
                else:
                    raise self.error(f"unknown escape \\{esc}")
            else:
                out.append(c)

    def _read_hex(self, width: int) -> str:
        digits = self.text[self.pos : self.pos + width]
        if len(digits) != width:
            raise self.error("truncated unicode escape")
        try:
            code = int(digits, 16)
        except ValueError as exc:
            raise self.error(f"bad unicode escape: {digits!r}") from exc
        self.pos += width
        return chr(code)

    def read_langtag(self) -> str:
        self.expect("@")
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalpha() or self.text[self.pos] == "-"):
            self.pos += 1
        tag = self.text[start : self.pos]
        if not tag or tag.startswith("-") or tag.endswith("-"):
            raise self.error(f"bad language tag: {tag!r}")
        return tag

    def read_literal(self) -> Literal:
        lexical = self.read_string()
        if self.peek() == "@":
            return Literal(lexical, lang=self.read_langtag())
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            datatype = self.read_iri()
            try:
                return Literal(lexical, datatype=datatype.value)
            except TermError as exc:
                raise self.error(str(exc)) from exc
        return Literal(lexical)

    def read_term(self, position: str) -> Term:
        c = self.peek()
        if c == "<":
            return self.read_iri()
        if c == "_":
            return self.read_bnode()
        if c == '"':
            if position != "object":
                raise self.error(f"literal not allowed as {position}")
            return self.read_literal()
        raise self.error(f"expected a term for {position}")


def parse_ntriples(text: str | bytes, graph: Iri) -> list[Quad]:
    """Parse N-Triples text into quads bound to `graph`.

    Raises ParseError (with the line number) on the first bad line; nothing
    is returned partially.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}", 0) from exc
    quads: list[Quad] = []
    # Split strictly on '\n': other Unicode line separators may appear
    # escaped inside literals but never as line boundaries.
    for line_no, raw_line in enumerate(text.split("\n"), start=1):
        raw_line = raw_line.rstrip("\r")
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        sc = _Scanner(raw_line, line_no)
        sc.skip_ws()
        subject = sc.read_term("subject")
        sc.skip_ws()
        predicate = sc.read_term("predicate")
        if not isinstance(predicate, Iri):
            raise sc.error("predicate must be an IRI")
        sc.skip_ws()
        obj = sc.read_term("object")
        sc.skip_ws()
        sc.expect(".")
        sc.skip_ws()
        if not sc.at_end() and sc.peek() != "#":
            raise sc.error("trailing content after '.'")
        try:
            quads.append(Quad(subject, predicate, obj, graph))
        except TermError as exc:
            raise sc.error(str(exc)) from exc
    return quads


def quads_to_ntriples(quads: list[Quad] | set[Quad]) -> bytes:
    """Serialize quads (graph component dropped) as sorted canonical lines.

    Guaranteed stable: the same quad set always yields byte-identical output,
    and parse_ntriples(quads_to_ntriples(q)) reproduces q as a set.
    """
    lines = sorted(q.triple_nt() for q in quads)
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")
