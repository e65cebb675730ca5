"""Quad store, term model, pattern matcher and triple-format IO."""

from .ntriples import ParseError, parse_ntriples, quads_to_ntriples
from .pattern import Binding, Filter, Pattern, Var, match, match_oracle, pattern
from .store import (
    DKG_GRAPH,
    PKG_GRAPH,
    Dataset,
    EvaluationError,
    StoreError,
    TransactionError,
    TransactionReceipt,
)
from .terms import (
    XSD_BOOLEAN,
    XSD_DATETIME,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    Quad,
    Term,
    TermError,
    lit,
    lit_bool,
    lit_datetime,
    lit_int,
    term_to_nt,
)
from .turtle import parse_policy_text, parse_turtle

__all__ = [
    "Binding",
    "BlankNode",
    "Dataset",
    "DKG_GRAPH",
    "EvaluationError",
    "Filter",
    "Iri",
    "Literal",
    "ParseError",
    "Pattern",
    "PKG_GRAPH",
    "Quad",
    "StoreError",
    "Term",
    "TermError",
    "TransactionError",
    "TransactionReceipt",
    "Var",
    "XSD_BOOLEAN",
    "XSD_DATETIME",
    "XSD_INTEGER",
    "XSD_STRING",
    "lit",
    "lit_bool",
    "lit_datetime",
    "lit_int",
    "match",
    "match_oracle",
    "parse_ntriples",
    "parse_policy_text",
    "parse_turtle",
    "pattern",
    "quads_to_ntriples",
    "term_to_nt",
]
