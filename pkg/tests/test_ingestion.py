"""Synthetic graph generation, QA checks and CSV loading."""

from __future__ import annotations

import pytest

from graphgate.ingestion import CsvLoadError, CsvMapping, SyntheticConfig, generate_dkg, load_csv_summaries, qa_check
from graphgate.rdf import DKG_GRAPH, Iri, Quad, lit, lit_bool
from graphgate.vocab import DM, IOTREG, PROV, RDF_TYPE


def test_all_zero_config_gives_empty_graph():
    d = generate_dkg(SyntheticConfig(events=0, declarations=0, requests=0, locations=0, geofeatures=0, images=0))
    assert len(d) == 0
    assert qa_check(d).all_zero()


def test_default_desk_config_passes_qa():
    d = generate_dkg(SyntheticConfig())
    report = qa_check(d)
    assert report.all_zero(), report.as_dict()


def test_negative_count_rejected():
    with pytest.raises(ValueError):
        SyntheticConfig(events=-1)


def test_reproducible_dump():
    cfg = SyntheticConfig(seed=123)
    first = generate_dkg(cfg).dump_ntriples(DKG_GRAPH)
    second = generate_dkg(cfg).dump_ntriples(DKG_GRAPH)
    assert first == second
    different = generate_dkg(SyntheticConfig(seed=124)).dump_ntriples(DKG_GRAPH)
    assert different != first


def test_geofeature_fraction():
    cfg = SyntheticConfig(geofeature_fraction=0.234)
    d = generate_dkg(cfg)
    events_with_links = {q.object for q in d.quads_for(DKG_GRAPH, predicate=DM.describes)}
    share = len(events_with_links) / cfg.events
    assert 0.23 <= share <= 0.24


def test_schema_closure():
    # Generator output uses only predicates from the vocabulary tables.
    from graphgate.vocab import GEO

    allowed_bases = (DM.base, IOTREG.base, GEO.base, "http://www.w3.org/1999/02/22-rdf-syntax-ns#")
    d = generate_dkg(SyntheticConfig(events=5, declarations=5, requests=2, locations=5, geofeatures=2, images=10))
    for quad in d.graph(DKG_GRAPH):
        assert quad.predicate.value.startswith(allowed_bases), quad.predicate


def test_qa_counters_match_linear_scan():
    d = generate_dkg(SyntheticConfig(events=20, declarations=20, requests=5, locations=10, geofeatures=5, images=50))
    report = qa_check(d)
    quads = list(d.graph(DKG_GRAPH))
    events = {q.subject for q in quads if q.predicate == RDF_TYPE and q.object == DM.DisasterEvent}
    located = {q.subject for q in quads if q.predicate == DM.occured_in}
    assert report.events_without_locations == len(events - located)
    declarations = {q.subject for q in quads if q.predicate == RDF_TYPE and q.object == DM.Declaration}
    declared = {q.object for q in quads if q.predicate == DM.has_declaration}
    assert report.declarations_without_events == len(declarations - declared)


def test_corrupted_fixtures_trip_exactly_their_counter():
    base = SyntheticConfig(events=10, declarations=10, requests=2, locations=10, geofeatures=3, images=20)

    orphan_event = generate_dkg(base)
    orphan_event.insert([Quad(Iri(DM.base + "DisasterEvent_orphan"), RDF_TYPE, DM.DisasterEvent, DKG_GRAPH)])
    report = qa_check(orphan_event)
    assert report.events_without_locations == 1
    assert report.declarations_without_events == 0
    assert report.derived_images_without_provenance == 0
    assert report.conflicting_flags == 0

    orphan_decl = generate_dkg(base)
    orphan_decl.insert([Quad(Iri(DM.base + "Declaration_orphan"), RDF_TYPE, DM.Declaration, DKG_GRAPH)])
    report = qa_check(orphan_decl)
    assert report.declarations_without_events == 1
    assert report.events_without_locations == 0

    unlinked_derived = generate_dkg(base)
    bad = Iri(DM.base + "Image_derived_bad")
    unlinked_derived.insert(
        [
            Quad(bad, RDF_TYPE, IOTREG.Image, DKG_GRAPH),
            Quad(bad, DM.transformedBy, lit("decision-1"), DKG_GRAPH),
        ]
    )
    report = qa_check(unlinked_derived)
    assert report.derived_images_without_provenance == 1
    assert report.conflicting_flags == 0

    conflicting = generate_dkg(base)
    bad2 = Iri(DM.base + "Image_conflict")
    conflicting.insert(
        [
            Quad(bad2, RDF_TYPE, IOTREG.Image, DKG_GRAPH),
            Quad(bad2, IOTREG.isAnonymized, lit_bool(True), DKG_GRAPH),
            Quad(bad2, DM.containsPII, lit_bool(True), DKG_GRAPH),
        ]
    )
    report = qa_check(conflicting)
    assert report.conflicting_flags == 1
    assert report.derived_images_without_provenance == 0


def test_derived_with_provenance_is_clean():
    d = generate_dkg(SyntheticConfig(events=2, declarations=2, requests=0, locations=2, geofeatures=0, images=2))
    derived = Iri(DM.base + "Image_derived_good")
    d.insert(
        [
            Quad(derived, RDF_TYPE, IOTREG.Image, DKG_GRAPH),
            Quad(derived, DM.transformedBy, lit("decision-2"), DKG_GRAPH),
            Quad(derived, PROV.wasDerivedFrom, Iri(DM.base + "Image_000000"), DKG_GRAPH),
        ]
    )
    assert qa_check(d).derived_images_without_provenance == 0


# --- CSV loading ---------------------------------------------------------------


MAPPING = CsvMapping.from_json(
    {
        "class": "dm:Declaration",
        "key_column": "femaDeclarationString",
        "columns": {
            "femaDeclarationString": "dm:femaDeclarationString",
            "declarationType": "dm:declarationType",
            "disasterNumber": "dm:disasterNumber",
        },
        "integer_columns": ["disasterNumber"],
    }
)


def test_csv_three_rows(tmp_path):
    path = tmp_path / "decl.csv"
    path.write_text(
        "femaDeclarationString,declarationType,disasterNumber,ignored\n"
        "DR-4332-TX,DR,4332,zzz\n"
        "EM-3381-LA,EM,3381,zzz\n"
        "FM-5311-CA,FM,5311,zzz\n",
        encoding="utf-8",
    )
    d = load_csv_summaries(path, MAPPING)
    individuals = {q.subject for q in d.quads_for(DKG_GRAPH, predicate=RDF_TYPE, obj=DM.Declaration)}
    assert len(individuals) == 3
    strings = {q.object.lexical for q in d.quads_for(DKG_GRAPH, predicate=DM.femaDeclarationString)}
    assert strings == {"DR-4332-TX", "EM-3381-LA", "FM-5311-CA"}
    # Unmapped column is ignored.
    assert not any("ignored" in q.predicate.value for q in d.graph(DKG_GRAPH))


def test_csv_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("femaDeclarationString,declarationType,disasterNumber\n", encoding="utf-8")
    d = load_csv_summaries(path, MAPPING)
    assert len(d) == 0


def test_csv_missing_key_aborts_with_row_index(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "femaDeclarationString,declarationType,disasterNumber\nDR-1-TX,DR,1\n,EM,2\n",
        encoding="utf-8",
    )
    with pytest.raises(CsvLoadError) as info:
        load_csv_summaries(path, MAPPING)
    assert "row 2" in str(info.value)


def test_csv_missing_key_column_aborts(tmp_path):
    path = tmp_path / "cols.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(CsvLoadError):
        load_csv_summaries(path, MAPPING)
