"""Basic graph pattern matching over the quad store.

A pattern is a conjunction of triple patterns evaluated inside one named
graph, optionally constrained by equality/boolean filters over the bound
variables. Solutions come back in a deterministic order (sorted by the
canonical serialization of each binding).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .store import Dataset, EvaluationError
from .terms import XSD_BOOLEAN, Iri, Literal, Quad, Term, term_to_nt


@dataclass(frozen=True)
class Var:
    """A named pattern variable."""

    name: str

    def __repr__(self) -> str:
        return f"?{self.name}"


Slot = Term | Var
Binding = dict[str, Term]


@dataclass(frozen=True)
class TriplePattern:
    subject: Slot
    predicate: Slot
    object: Slot

    def variables(self) -> set[str]:
        return {s.name for s in (self.subject, self.predicate, self.object) if isinstance(s, Var)}


@dataclass(frozen=True)
class Filter:
    """Variable constraint: op is one of eq, ne, true, false.

    eq/ne compare a variable against a concrete term or another variable;
    true/false require the variable to be a boolean literal of that value.
    """

    op: str
    var: str
    other: Term | Var | None = None

    def holds(self, binding: Binding) -> bool:
        value = binding.get(self.var)
        if value is None:
            return False
        if self.op in ("eq", "ne"):
            if isinstance(self.other, Var):
                other = binding.get(self.other.name)
            else:
                other = self.other
            if other is None:
                return False
            return (value == other) if self.op == "eq" else (value != other)
        if self.op in ("true", "false"):
            want = "true" if self.op == "true" else "false"
            return (
                isinstance(value, Literal)
                and value.datatype == XSD_BOOLEAN
                and value.lexical == want
            )
        raise EvaluationError(f"unknown filter op: {self.op}")


@dataclass(frozen=True)
class Pattern:
    """A conjunctive pattern over a single named graph."""

    graph: Iri
    triples: tuple[TriplePattern, ...]
    filters: tuple[Filter, ...] = field(default=())

    def variables(self) -> set[str]:
        names: set[str] = set()
        for tp in self.triples:
            names |= tp.variables()
        return names


def pattern(graph: Iri, triples: list[tuple[Slot, Slot, Slot]], filters: list[Filter] | None = None) -> Pattern:
    return Pattern(
        graph=graph,
        triples=tuple(TriplePattern(s, p, o) for s, p, o in triples),
        filters=tuple(filters or ()),
    )


def binding_sort_key(binding: Binding) -> str:
    return "\x1f".join(f"{name}={term_to_nt(binding[name])}" for name in sorted(binding))


def _resolve(slot: Slot, binding: Binding) -> Term | None:
    if isinstance(slot, Var):
        return binding.get(slot.name)
    return slot


def _bound_count(tp: TriplePattern, binding: Binding) -> int:
    return sum(1 for s in (tp.subject, tp.predicate, tp.object) if _resolve(s, binding) is not None)


def match(dataset: Dataset, pat: Pattern) -> list[Binding]:
    """All bindings satisfying the pattern, deterministically ordered.

    An unknown graph yields an empty result. Internal evaluation faults
    surface as EvaluationError so callers can fail closed.
    """
    try:
        solutions = _solve(dataset, pat)
    except EvaluationError:
        raise
    except Exception as exc:  # fold any internal fault into the closed error type
        raise EvaluationError(f"pattern evaluation failed: {exc}") from exc
    solutions.sort(key=binding_sort_key)
    return solutions


def _solve(dataset: Dataset, pat: Pattern) -> list[Binding]:
    results: list[Binding] = []

    def extend(remaining: list[TriplePattern], binding: Binding) -> None:
        if not remaining:
            if all(f.holds(binding) for f in pat.filters):
                results.append(dict(binding))
            return
        # Most-constrained-first keeps the search narrow without a planner.
        tp = max(remaining, key=lambda t: _bound_count(t, binding))
        rest = [t for t in remaining if t is not tp]
        s = _resolve(tp.subject, binding)
        p = _resolve(tp.predicate, binding)
        o = _resolve(tp.object, binding)
        for quad in dataset.quads_for(pat.graph, s, p, o):
            extension = dict(binding)
            if not _absorb(tp, quad, extension):
                continue
            extend(rest, extension)

    extend(list(pat.triples), {})
    # Conjunctive semantics are set-based: identical bindings collapse.
    unique: dict[str, Binding] = {binding_sort_key(b): b for b in results}
    return list(unique.values())


def _absorb(tp: TriplePattern, quad: Quad, binding: Binding) -> bool:
    for slot, value in ((tp.subject, quad.subject), (tp.predicate, quad.predicate), (tp.object, quad.object)):
        if isinstance(slot, Var):
            seen = binding.get(slot.name)
            if seen is None:
                binding[slot.name] = value
            elif seen != value:
                return False
        elif slot != value:
            return False
    return True


def match_oracle(dataset: Dataset, pat: Pattern) -> list[Binding]:
    """Linear-scan reference evaluator, kept free of index shortcuts.

    Used by tests to cross-check `match`; do not optimize.
    """
    graph_quads = sorted(dataset.graph(pat.graph), key=lambda q: q.triple_nt())

    partials: list[Binding] = [{}]
    for tp in pat.triples:
        step: list[Binding] = []
        for binding in partials:
            for quad in graph_quads:
                extension = dict(binding)
                if _absorb(tp, quad, extension):
                    step.append(extension)
        partials = step
    solutions = [b for b in partials if all(f.holds(b) for f in pat.filters)]
    unique = {binding_sort_key(b): b for b in solutions}
    return sorted(unique.values(), key=binding_sort_key)
