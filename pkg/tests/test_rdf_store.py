"""Quad store: set semantics, transactions, index coherence, determinism."""

from __future__ import annotations

import random
import threading

import pytest

from graphgate.rdf import (
    Dataset,
    DKG_GRAPH,
    EvaluationError,
    Iri,
    Quad,
    TermError,
    TransactionError,
    Var,
    lit,
    lit_bool,
    match,
    match_oracle,
    pattern,
)
from graphgate.vocab import DM, IOTREG, RDF_TYPE


def q(s: str, p: str, o) -> Quad:
    obj = o if not isinstance(o, str) else Iri(o)
    return Quad(Iri(s), Iri(p), obj, DKG_GRAPH)


EX = "http://example.org/"


def test_duplicate_insert_is_noop():
    d = Dataset()
    quad = q(EX + "a", EX + "p", EX + "b")
    d.insert([quad])
    size = len(d)
    receipt = d.insert([quad])
    assert len(d) == size
    assert receipt.inserted == 0


def test_receipts_monotonic():
    d = Dataset()
    r1 = d.insert([q(EX + "a", EX + "p", EX + "b")])
    r2 = d.delete([q(EX + "a", EX + "p", EX + "b")])
    r3 = d.insert([])
    assert r1.txn_id < r2.txn_id < r3.txn_id


def test_gold_fixture_dual_typing(gold_store):
    from graphgate.goldset import IMG_RAW

    types = {quad.object for quad in gold_store.quads_for(DKG_GRAPH, subject=IMG_RAW, predicate=RDF_TYPE)}
    assert DM.Image in types and IOTREG.Image in types


def test_insert_delete_roundtrip_counts():
    # Randomized round-trip: insert N, delete k, count is N - k.
    rng = random.Random(4)
    d = Dataset()
    quads = [q(f"{EX}s{i}", f"{EX}p{rng.randrange(5)}", f"{EX}o{rng.randrange(50)}") for i in range(600)]
    unique = list(dict.fromkeys(quads))
    d.insert(unique)
    assert len(d) == len(unique)
    victims = unique[:173]
    d.delete(victims)
    assert len(d) == len(unique) - len(victims)


def test_malformed_term_rejects_whole_transaction():
    d = Dataset()
    d.insert([q(EX + "keep", EX + "p", EX + "v")])
    before = d.snapshot()
    with pytest.raises((TransactionError, TermError)):
        d.insert([q(EX + "a", EX + "p", EX + "b"), "not a quad"])  # type: ignore[list-item]
    assert d.snapshot() == before


def test_match_concrete_quad_yields_one_empty_binding():
    d = Dataset()
    d.insert([q(EX + "a", EX + "p", EX + "b")])
    rows = match(d, pattern(DKG_GRAPH, [(Iri(EX + "a"), Iri(EX + "p"), Iri(EX + "b"))]))
    assert rows == [{}]


def test_match_unknown_graph_is_empty_not_error():
    d = Dataset()
    d.insert([q(EX + "a", EX + "p", EX + "b")])
    rows = match(d, pattern(Iri("urn:graph:nowhere"), [(Var("s"), Var("p"), Var("o"))]))
    assert rows == []


def test_match_gold_fixture_image_count(gold_store):
    # Brute-force count of iot-reg:Image typed artifacts in the fixture.
    expected = sum(
        1 for quad in gold_store.graph(DKG_GRAPH) if quad.predicate == RDF_TYPE and quad.object == IOTREG.Image
    )
    rows = match(gold_store, pattern(DKG_GRAPH, [(Var("img"), RDF_TYPE, IOTREG.Image)]))
    assert len(rows) == expected == 10


def test_match_matches_linear_scan_oracle_on_random_data():
    rng = random.Random(11)
    d = Dataset()
    subjects = [Iri(f"{EX}s{i}") for i in range(12)]
    predicates = [Iri(f"{EX}p{i}") for i in range(4)]
    objects = [Iri(f"{EX}o{i}") for i in range(8)] + [lit("x"), lit_bool(True)]
    quads = [Quad(rng.choice(subjects), rng.choice(predicates), rng.choice(objects), DKG_GRAPH) for _ in range(300)]
    d.insert(quads)
    d.delete(rng.sample(quads, 60))

    s, p, o, o2 = Var("s"), Var("p"), Var("o"), Var("o2")
    candidates = [
        [(s, p, o)],
        [(s, predicates[0], o)],
        [(s, predicates[0], o), (s, predicates[1], o2)],
        [(s, predicates[2], o), (o, predicates[0], o2)],
        [(subjects[0], p, o)],
    ]
    for triples in candidates:
        assert match(d, pattern(DKG_GRAPH, triples)) == match_oracle(d, pattern(DKG_GRAPH, triples))


def test_match_deterministic_order():
    from graphgate.rdf.pattern import binding_sort_key

    d = Dataset()
    quads = [q(f"{EX}s{i}", EX + "p", f"{EX}o{i}") for i in range(30)]
    d.insert(quads)
    pat = pattern(DKG_GRAPH, [(Var("s"), Iri(EX + "p"), Var("o"))])
    first = match(d, pat)
    assert first == match(d, pat)
    keys = [binding_sort_key(b) for b in first]
    assert keys == sorted(keys)


def test_filters_restrict_bindings():
    from graphgate.rdf import Filter

    d = Dataset()
    d.insert([q(EX + "a", EX + "flag", lit_bool(True)), q(EX + "b", EX + "flag", lit_bool(False))])
    pat = pattern(DKG_GRAPH, [(Var("s"), Iri(EX + "flag"), Var("v"))], [Filter("true", "v")])
    rows = match(d, pat)
    assert [r["s"].value for r in rows] == [EX + "a"]


def test_failed_transaction_leaves_matches_unchanged():
    d = Dataset()
    d.insert([q(EX + "a", EX + "p", EX + "b")])
    pat = pattern(DKG_GRAPH, [(Var("s"), Var("p"), Var("o"))])
    before = match(d, pat)
    with pytest.raises(TransactionError):
        d.insert([q(EX + "c", EX + "p", EX + "d"), 17])  # type: ignore[list-item]
    assert match(d, pat) == before


def test_fault_hook_surfaces_evaluation_error():
    d = Dataset()
    d.insert([q(EX + "a", EX + "p", EX + "b")])

    def boom(op: str) -> None:
        raise EvaluationError("injected")

    d.fault_hook = boom
    with pytest.raises(EvaluationError):
        match(d, pattern(DKG_GRAPH, [(Var("s"), Var("p"), Var("o"))]))


def test_verify_indexes_passes_after_random_transactions():
    rng = random.Random(8)
    d = Dataset()
    live: list[Quad] = []
    for _ in range(40):
        if live and rng.random() < 0.4:
            victims = rng.sample(live, min(len(live), rng.randint(1, 5)))
            d.delete(victims)
            live = [x for x in live if x not in victims]
        else:
            batch = [q(f"{EX}s{rng.randrange(20)}", f"{EX}p{rng.randrange(4)}", f"{EX}o{rng.randrange(30)}") for _ in range(rng.randint(1, 6))]
            d.insert(batch)
            live.extend(x for x in batch if x not in live)
        d.verify_indexes()


def test_concurrent_readers_and_writer():
    d = Dataset()
    stop = threading.Event()
    errors: list[Exception] = []

    def reader():
        pat = pattern(DKG_GRAPH, [(Var("s"), Iri(EX + "p"), Var("o"))])
        while not stop.is_set():
            try:
                for binding in match(d, pat):
                    assert "s" in binding and "o" in binding
            except Exception as exc:  # pragma: no cover - failure path
                errors.append(exc)
                return

    threads = [threading.Thread(target=reader) for _ in range(4)]
    for t in threads:
        t.start()
    for i in range(150):
        d.insert([q(f"{EX}s{i}", EX + "p", f"{EX}o{i}")])
        if i % 3 == 0:
            d.delete([q(f"{EX}s{i}", EX + "p", f"{EX}o{i}")])
    stop.set()
    for t in threads:
        t.join()
    assert not errors
