"""JSON wire format for terms, patterns, filters and bindings.

The query endpoints speak pattern documents rather than a query language:
{"pattern": [[s, p, o], ...], "filters": [...], "limit": n} where each slot
is a term object or {"var": name}.
"""

from __future__ import annotations

from ..rdf import (
    Binding,
    BlankNode,
    Filter,
    Iri,
    Literal,
    Term,
    TermError,
    Var,
    XSD_STRING,
)


class WireError(ValueError):
    """The request body does not follow the wire schema."""


def term_to_json(term: Term) -> dict:
    if isinstance(term, Iri):
        return {"type": "iri", "value": term.value}
    if isinstance(term, BlankNode):
        return {"type": "bnode", "value": term.label}
    if isinstance(term, Literal):
        out: dict = {"type": "literal", "value": term.lexical}
        if term.lang:
            out["lang"] = term.lang
        elif term.datatype != XSD_STRING:
            out["datatype"] = term.datatype
        return out
    raise WireError(f"not a term: {term!r}")


def term_from_json(obj: object) -> Term:
    if not isinstance(obj, dict) or "type" not in obj:
        raise WireError(f"bad term object: {obj!r}")
    kind = obj["type"]
    try:
        if kind == "iri":
            return Iri(str(obj["value"]))
        if kind == "bnode":
            return BlankNode(str(obj["value"]))
        if kind == "literal":
            return Literal(
                str(obj["value"]),
                datatype=str(obj.get("datatype", XSD_STRING)),
                lang=obj.get("lang"),
            )
    except (KeyError, TermError) as exc:
        raise WireError(f"bad term object: {exc}") from exc
    raise WireError(f"unknown term type: {kind!r}")


def slot_to_json(slot: Term | Var) -> dict:
    if isinstance(slot, Var):
        return {"var": slot.name}
    return term_to_json(slot)


def slot_from_json(obj: object) -> Term | Var:
    if isinstance(obj, dict) and "var" in obj:
        name = obj["var"]
        if not isinstance(name, str) or not name:
            raise WireError("variable name must be a non-empty string")
        return Var(name)
    return term_from_json(obj)


def triples_to_json(triples: list[tuple]) -> list[list[dict]]:
    return [[slot_to_json(s), slot_to_json(p), slot_to_json(o)] for s, p, o in triples]


def triples_from_json(obj: object) -> list[tuple]:
    if not isinstance(obj, list):
        raise WireError("pattern must be a list of triples")
    out = []
    for item in obj:
        if not isinstance(item, list) or len(item) != 3:
            raise WireError("each triple pattern must be a 3-element list")
        out.append(tuple(slot_from_json(slot) for slot in item))
    return out


def filter_to_json(f: Filter) -> dict:
    out: dict = {"op": f.op, "var": f.var}
    if isinstance(f.other, Var):
        out["other_var"] = f.other.name
    elif f.other is not None:
        out["term"] = term_to_json(f.other)
    return out


def filter_from_json(obj: object) -> Filter:
    if not isinstance(obj, dict) or "op" not in obj or "var" not in obj:
        raise WireError(f"bad filter object: {obj!r}")
    op = obj["op"]
    if op not in ("eq", "ne", "true", "false"):
        raise WireError(f"unknown filter op: {op!r}")
    other: Term | Var | None = None
    if "other_var" in obj:
        other = Var(str(obj["other_var"]))
    elif "term" in obj:
        other = term_from_json(obj["term"])
    return Filter(op=op, var=str(obj["var"]), other=other)


def bindings_to_json(bindings: list[Binding]) -> list[dict]:
    return [{name: term_to_json(term) for name, term in b.items()} for b in bindings]


def bindings_from_json(obj: object) -> list[Binding]:
    if not isinstance(obj, list):
        raise WireError("bindings must be a list")
    out = []
    for item in obj:
        if not isinstance(item, dict):
            raise WireError("each binding must be an object")
        out.append({name: term_from_json(value) for name, value in item.items()})
    return out


def parse_query_body(body: object) -> tuple[list[tuple], list[Filter], int | None]:
    """Validate a query document into (triples, filters, limit)."""
    if not isinstance(body, dict):
        raise WireError("query body must be a JSON object")
    triples = triples_from_json(body.get("pattern", []))
    filters = [filter_from_json(f) for f in body.get("filters", [])]
    limit = body.get("limit")
    if limit is not None and (not isinstance(limit, int) or limit < 0):
        raise WireError("limit must be a non-negative integer")
    return triples, filters, limit
