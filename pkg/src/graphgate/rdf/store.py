"""In-memory indexed quad store with named graphs and serialized transactions.

Reads operate on immutable snapshots swapped in atomically by the single
writer, so concurrent readers never observe a half-applied transaction.
Indexes are keyed by (graph, subject), (graph, predicate, object) and
(graph, subject, predicate).
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from typing import Callable, Iterable

from .ntriples import parse_ntriples, quads_to_ntriples
from .terms import Iri, Quad, Term, TermError

DKG_GRAPH = Iri("urn:graph:dkg")
PKG_GRAPH = Iri("urn:graph:pkg")


class StoreError(Exception):
    """Base class for store failures."""


class TransactionError(StoreError):
    """A transaction was rejected; the dataset is unchanged."""


class EvaluationError(StoreError):
    """Query evaluation failed; callers must treat the result as unknown."""


@dataclass(frozen=True)
class TransactionReceipt:
    txn_id: int
    inserted: int
    deleted: int


@dataclass(frozen=True)
class _Snapshot:
    quads: frozenset[Quad]
    by_gs: dict[tuple[Iri, Term], frozenset[Quad]]
    by_gpo: dict[tuple[Iri, Term, Term], frozenset[Quad]]
    by_gsp: dict[tuple[Iri, Term, Term], frozenset[Quad]]
    by_graph: dict[Iri, frozenset[Quad]]


_EMPTY: frozenset[Quad] = frozenset()


def _indexed(quads: frozenset[Quad]) -> _Snapshot:
    by_gs: dict[tuple[Iri, Term], set[Quad]] = {}
    by_gpo: dict[tuple[Iri, Term, Term], set[Quad]] = {}
    by_gsp: dict[tuple[Iri, Term, Term], set[Quad]] = {}
    by_graph: dict[Iri, set[Quad]] = {}
    for q in quads:
        by_gs.setdefault((q.graph, q.subject), set()).add(q)
        by_gpo.setdefault((q.graph, q.predicate, q.object), set()).add(q)
        by_gsp.setdefault((q.graph, q.subject, q.predicate), set()).add(q)
        by_graph.setdefault(q.graph, set()).add(q)
    return _Snapshot(
        quads=quads,
        by_gs={k: frozenset(v) for k, v in by_gs.items()},
        by_gpo={k: frozenset(v) for k, v in by_gpo.items()},
        by_gsp={k: frozenset(v) for k, v in by_gsp.items()},
        by_graph={k: frozenset(v) for k, v in by_graph.items()},
    )


class Dataset:
    """Named-graph quad store with set semantics.

    Thread-safety: one handle may be shared freely; writes serialize on an
    internal lock and readers see the last committed snapshot.

    `fault_hook` is a testing seam: when set, it is called with the operation
    name ("match", "insert", ...) before the operation runs and may raise to
    simulate infrastructure failure. Production code leaves it unset.
    """

    def __init__(self) -> None:
        self._snapshot = _indexed(frozenset())
        self._write_lock = threading.RLock()
        self._txn_counter = 0
        self.fault_hook: Callable[[str], None] | None = None

    # -- read side ---------------------------------------------------------

    def _check_fault(self, op: str) -> None:
        hook = self.fault_hook
        if hook is not None:
            hook(op)

    def snapshot(self) -> frozenset[Quad]:
        return self._snapshot.quads

    def __len__(self) -> int:
        return len(self._snapshot.quads)

    def __contains__(self, quad: Quad) -> bool:
        return quad in self._snapshot.quads

    def graph(self, graph: Iri) -> frozenset[Quad]:
        return self._snapshot.by_graph.get(graph, _EMPTY)

    def graph_size(self, graph: Iri) -> int:
        return len(self.graph(graph))

    def quads_for(
        self,
        graph: Iri,
        subject: Term | None = None,
        predicate: Term | None = None,
        obj: Term | None = None,
    ) -> Iterable[Quad]:
        """All quads in `graph` matching the given concrete positions."""
        self._check_fault("match")
        snap = self._snapshot
        if subject is not None and predicate is not None:
            candidates = snap.by_gsp.get((graph, subject, predicate), _EMPTY)
        elif predicate is not None and obj is not None:
            candidates = snap.by_gpo.get((graph, predicate, obj), _EMPTY)
        elif subject is not None:
            candidates = snap.by_gs.get((graph, subject), _EMPTY)
        else:
            candidates = snap.by_graph.get(graph, _EMPTY)
        for q in candidates:
            if subject is not None and q.subject != subject:
                continue
            if predicate is not None and q.predicate != predicate:
                continue
            if obj is not None and q.object != obj:
                continue
            yield q

    def content_hash(self) -> str:
        """Hash of the full quad set; used to assert read-only behavior."""
        digest = hashlib.sha256()
        for g in sorted(self._snapshot.by_graph, key=lambda i: i.value):
            digest.update(g.value.encode())
            digest.update(quads_to_ntriples(self._snapshot.by_graph[g]))
        return digest.hexdigest()

    def verify_indexes(self) -> None:
        """Cross-check every index against the quad set.

        Raises EvaluationError on disagreement so callers can fail closed.
        """
        snap = self._snapshot
        rebuilt = _indexed(snap.quads)
        if (
            rebuilt.by_gs != snap.by_gs
            or rebuilt.by_gpo != snap.by_gpo
            or rebuilt.by_gsp != snap.by_gsp
            or rebuilt.by_graph != snap.by_graph
        ):
            raise EvaluationError("index disagrees with quad set")

    # -- write side ----------------------------------------------------------

    def _validate(self, quads: Iterable[Quad]) -> list[Quad]:
        validated = []
        for q in quads:
            if not isinstance(q, Quad):
                raise TransactionError(f"not a quad: {q!r}")
            validated.append(q)
        return validated

    def insert(self, quads: Iterable[Quad]) -> TransactionReceipt:
        """Insert quads as one transaction. Duplicate quads are no-ops."""
        self._check_fault("insert")
        try:
            batch = self._validate(quads)
        except TermError as exc:
            raise TransactionError(str(exc)) from exc
        with self._write_lock:
            before = self._snapshot.quads
            added = [q for q in batch if q not in before]
            if added:
                self._snapshot = _indexed(before | frozenset(added))
            self._txn_counter += 1
            return TransactionReceipt(self._txn_counter, inserted=len(added), deleted=0)

    def delete(self, quads: Iterable[Quad]) -> TransactionReceipt:
        """Delete quads as one transaction. Absent quads are no-ops."""
        self._check_fault("delete")
        batch = self._validate(quads)
        with self._write_lock:
            before = self._snapshot.quads
            removed = [q for q in batch if q in before]
            if removed:
                self._snapshot = _indexed(before - frozenset(removed))
            self._txn_counter += 1
            return TransactionReceipt(self._txn_counter, inserted=0, deleted=len(removed))

    # -- file load/dump ------------------------------------------------------

    def load_ntriples(self, text: str | bytes, graph: Iri) -> TransactionReceipt:
        """Parse and insert in one step; a parse error loads nothing."""
        quads = parse_ntriples(text, graph)
        return self.insert(quads)

    def dump_ntriples(self, graph: Iri) -> bytes:
        """Canonical sorted N-Triples for one graph (empty graph is fine)."""
        self._check_fault("dump")
        return quads_to_ntriples(self.graph(graph))
