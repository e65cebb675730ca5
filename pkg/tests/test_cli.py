"""CLI contract: commands, outputs, exit codes."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from graphgate.cli import main
from graphgate.goldset import REC_RAWPII, build_gold_fixture

runner = CliRunner()


@pytest.fixture()
def workspace(tmp_path):
    fixture = build_gold_fixture(tmp_path / "fx")
    config = {
        "dkg_file": "state/dkg.nt",
        "pkg_file": "state/pkg.ttl",
        "staging_dir": "state/staging",
        "derived_dir": "state/derived",
        "key_dir": "state/keys",
        "decision_log": "state/decisions.jsonl",
        "seed": 12,
    }
    config_path = tmp_path / "graphgate.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    (tmp_path / "state").mkdir()
    (tmp_path / "state" / "pkg.ttl").write_bytes((fixture / "pkg_fema.ttl").read_bytes())
    (tmp_path / "state" / "dkg.nt").write_bytes((fixture / "dkg.nt").read_bytes())
    return tmp_path, config_path, fixture


def test_load_reports_counts(workspace):
    tmp, config, fixture = workspace
    result = runner.invoke(main, ["load", "--config", str(config), "--graph", "dkg", str(fixture / "dkg.nt")])
    assert result.exit_code == 0, result.output
    assert "quads" in result.output


def test_load_pkg_reports_deontic_count(workspace):
    tmp, config, fixture = workspace
    result = runner.invoke(main, ["load", "--config", str(config), "--graph", "pkg", str(fixture / "pkg_fema.ttl")])
    assert result.exit_code == 0
    assert "15 deontic statements" in result.output


def test_load_bad_file_exits_nonzero_with_line(workspace, tmp_path):
    tmp, config, _ = workspace
    bad = tmp_path / "bad.nt"
    bad.write_text("<http://a> nonsense here\n", encoding="utf-8")
    result = runner.invoke(main, ["load", "--config", str(config), "--graph", "dkg", str(bad)])
    assert result.exit_code == 3
    assert "line 1" in result.output


def test_missing_config_key_names_it(tmp_path):
    config_path = tmp_path / "partial.json"
    config_path.write_text(json.dumps({"dkg_file": "x.nt"}), encoding="utf-8")
    result = runner.invoke(main, ["load", "--config", str(config_path), "--graph", "dkg", "whatever.nt"])
    assert result.exit_code == 3
    assert "pkg_file" in result.output


def test_decide_allow_family_exit_zero(workspace):
    tmp, config, fixture = workspace
    packet = json.loads((fixture / "packets" / "p1.json").read_text())
    packet["file_url"] = str(fixture / packet["file_url"])
    packet_path = tmp / "p1.json"
    packet_path.write_text(json.dumps(packet), encoding="utf-8")
    result = runner.invoke(main, ["decide", "--config", str(config), str(packet_path)])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["final_verdict"] == "Allow"
    # The derived artifact persisted into the store file.
    assert "_anonymized" in (tmp / "state" / "dkg.nt").read_text()


def test_decide_block_exit_two_with_incident(workspace):
    tmp, config, fixture = workspace
    packet_path = tmp / "p5.json"
    packet_path.write_text(
        json.dumps({"artifact_uri": REC_RAWPII.value, "audience": "policy-ext:PublicAudience", "activity": "iot-reg:DataSharing"}),
        encoding="utf-8",
    )
    result = runner.invoke(main, ["decide", "--config", str(config), str(packet_path)])
    assert result.exit_code == 2
    payload = json.loads(result.output)
    assert payload["incident"] is not None


def test_decide_malformed_packet_exit_three(workspace):
    tmp, config, _ = workspace
    packet_path = tmp / "empty.json"
    packet_path.write_text("{}", encoding="utf-8")
    result = runner.invoke(main, ["decide", "--config", str(config), str(packet_path)])
    assert result.exit_code == 3


def test_goldgen_and_goldrun(tmp_path):
    target = tmp_path / "gold"
    result = runner.invoke(main, ["goldgen", str(target)])
    assert result.exit_code == 0
    assert (target / "expected.json").is_file()
    assert len(list((target / "packets").glob("*.json"))) == 24

    run = runner.invoke(main, ["goldrun", "--fixture", str(target), "--work", str(tmp_path / "work")])
    assert run.exit_code == 0, run.output
    assert "accuracy: 24/24" in run.output
    assert "latency:" in run.output


def test_goldrun_report_byte_identical_across_runs(tmp_path):
    target = tmp_path / "gold"
    runner.invoke(main, ["goldgen", str(target)])
    first = tmp_path / "r1.json"
    second = tmp_path / "r2.json"
    for work, report in (("w1", first), ("w2", second)):
        result = runner.invoke(
            main, ["goldrun", "--fixture", str(target), "--work", str(tmp_path / work), "--report", str(report)]
        )
        assert result.exit_code == 0
    assert first.read_bytes() == second.read_bytes()


def test_goldrun_detects_flipped_expectation(tmp_path):
    target = tmp_path / "gold"
    runner.invoke(main, ["goldgen", str(target)])
    manifest = json.loads((target / "expected.json").read_text())
    manifest[0]["expected"]["final_verdict"] = "Block"  # flip P1
    (target / "expected.json").write_text(json.dumps(manifest), encoding="utf-8")
    run = runner.invoke(main, ["goldrun", "--fixture", str(target), "--work", str(tmp_path / "work")])
    assert run.exit_code == 1
    assert "accuracy: 23/24" in run.output


def test_goldrun_missing_fixture_aborts(tmp_path):
    run = runner.invoke(main, ["goldrun", "--fixture", str(tmp_path / "nope"), "--work", str(tmp_path / "w")])
    assert run.exit_code == 3


def test_generate_and_qa(tmp_path):
    out = tmp_path / "dkg.nt"
    result = runner.invoke(main, ["generate", "--out", str(out), "--images", "20", "--events", "5", "--declarations", "5", "--locations", "5", "--geofeatures", "2", "--requests", "2"])
    assert result.exit_code == 0
    qa = runner.invoke(main, ["qa", str(out)])
    assert qa.exit_code == 0, qa.output
    assert "conflicting_flags: 0" in qa.output


def test_query_command_prints_table(workspace):
    tmp, config, _ = workspace
    result = runner.invoke(main, ["query", "--config", str(config), "global_compliance_dashboard"])
    assert result.exit_code == 0, result.output
    assert "image" in result.output and "status" in result.output
    assert "NON_COMPLIANT" in result.output

    missing = runner.invoke(main, ["query", "--config", str(config), "disasters_by_state"])
    assert missing.exit_code == 3  # parameter not supplied

    unknown = runner.invoke(main, ["query", "--config", str(config), "not_a_template"])
    assert unknown.exit_code == 3


def test_templates_listing():
    result = runner.invoke(main, ["templates"])
    assert result.exit_code == 0
    assert len(result.output.strip().splitlines()) == 26


def test_qa_flags_corrupted_graph(tmp_path):
    from graphgate.ingestion import SyntheticConfig, generate_dkg
    from graphgate.rdf import DKG_GRAPH, Iri, Quad
    from graphgate.vocab import DM, RDF_TYPE

    store = generate_dkg(SyntheticConfig(events=3, declarations=3, requests=1, locations=3, geofeatures=1, images=5))
    store.insert([Quad(Iri(DM.base + "DisasterEvent_orphan"), RDF_TYPE, DM.DisasterEvent, DKG_GRAPH)])
    out = tmp_path / "bad.nt"
    out.write_bytes(store.dump_ntriples(DKG_GRAPH))
    result = runner.invoke(main, ["qa", str(out)])
    assert result.exit_code == 1
    assert "events_without_locations: 1" in result.output
