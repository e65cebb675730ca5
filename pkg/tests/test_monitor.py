"""Monitoring layer: wire format, HTTP endpoints, federation, templates."""

from __future__ import annotations

import json
import urllib.error
import urllib.request

import pytest

from graphgate.enforcement import RunnerConfig
from graphgate.goldset import IMG_RAW, REC_RAWPII, build_gold_fixture, gold_dkg
from graphgate.monitor import (
    FEDERATED_TEMPLATES,
    FederationError,
    HttpEndpoint,
    LocalEndpoint,
    SINGLE_TEMPLATES,
    ServiceConfig,
    compliance_status,
    get_template,
    run_federated,
    serve_endpoints,
    template_library,
)
from graphgate.monitor.wire import (
    WireError,
    bindings_from_json,
    bindings_to_json,
    filter_from_json,
    filter_to_json,
    term_from_json,
    term_to_json,
)
from graphgate.rdf import Dataset, DKG_GRAPH, Filter, Iri, Literal, PKG_GRAPH, Var, lit_bool
from graphgate.vocab import DM, IOTREG, RDF_TYPE


# --- wire format ----------------------------------------------------------------


def test_term_json_roundtrip():
    from graphgate.rdf import BlankNode

    terms = [
        Iri("http://a.example/x"),
        Literal("plain"),
        Literal("tagged", lang="en"),
        Literal("5", datatype="http://www.w3.org/2001/XMLSchema#integer"),
        BlankNode("b1"),
    ]
    for term in terms:
        assert term_from_json(term_to_json(term)) == term


def test_binding_json_roundtrip():
    bindings = [{"s": Iri("http://a/x"), "v": lit_bool(True)}]
    assert bindings_from_json(bindings_to_json(bindings)) == bindings


def test_filter_json_roundtrip():
    for f in (Filter("true", "v"), Filter("eq", "a", Iri("http://x/y")), Filter("ne", "a", Var("b"))):
        assert filter_from_json(filter_to_json(f)) == f


def test_bad_wire_objects_rejected():
    with pytest.raises(WireError):
        term_from_json({"type": "mystery", "value": "x"})
    with pytest.raises(WireError):
        filter_from_json({"op": "between", "var": "x"})


# --- service ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def service(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("svc")
    fixture = build_gold_fixture(tmp / "fx")
    store = gold_dkg()
    from graphgate.policy import load_policy_pack

    pack = load_policy_pack(fixture / "pkg_fema.ttl", PKG_GRAPH)
    store.insert(pack.quads)
    svc = serve_endpoints(
        store,
        pack,
        RunnerConfig(staging_dir=tmp / "staging", derived_dir=tmp / "derived", key_dir=tmp / "keys"),
        ServiceConfig(),
    )
    yield svc, fixture
    svc.stop()


def _post(url: str, body: dict) -> tuple[int, dict]:
    data = json.dumps(body).encode()
    request = urllib.request.Request(url, data=data, headers={"Content-Type": "application/json"}, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=10) as response:
            return response.status, json.loads(response.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def test_dkg_endpoint_pattern_query(service):
    svc, _ = service
    status, payload = _post(
        svc.url("dkg") + "/query",
        {"pattern": [[{"var": "img"}, {"type": "iri", "value": RDF_TYPE.value}, {"type": "iri", "value": IOTREG.Image.value}]]},
    )
    assert status == 200
    assert len(payload["bindings"]) == 10


def test_endpoint_isolation(service):
    svc, _ = service
    # Policy triples are invisible through the dkg endpoint and vice versa.
    perm_pattern = {
        "pattern": [[{"var": "s"}, {"type": "iri", "value": RDF_TYPE.value}, {"type": "iri", "value": IOTREG.Permission.value}]]
    }
    _, via_dkg = _post(svc.url("dkg") + "/query", perm_pattern)
    _, via_pkg = _post(svc.url("pkg") + "/query", perm_pattern)
    assert via_dkg["bindings"] == []
    assert len(via_pkg["bindings"]) == 5
    image_pattern = {
        "pattern": [[{"var": "s"}, {"type": "iri", "value": RDF_TYPE.value}, {"type": "iri", "value": IOTREG.Image.value}]]
    }
    _, images_via_pkg = _post(svc.url("pkg") + "/query", image_pattern)
    assert images_via_pkg["bindings"] == []


def test_malformed_body_gets_400(service):
    svc, _ = service
    status, payload = _post(svc.url("dkg") + "/query", {"pattern": [["bad"]]})
    assert status == 400 and "error" in payload


def test_limit_applies(service):
    svc, _ = service
    status, payload = _post(
        svc.url("dkg") + "/query",
        {
            "pattern": [[{"var": "s"}, {"var": "p"}, {"var": "o"}]],
            "limit": 3,
        },
    )
    assert status == 200 and len(payload["bindings"]) == 3


def test_decide_endpoint_runs_gold_p1(service):
    svc, fixture = service
    packet = json.loads((fixture / "packets" / "p1.json").read_text())
    packet["file_url"] = str(fixture / packet["file_url"])
    status, payload = _post(svc.url("control") + "/decide", packet)
    assert status == 200
    assert payload["initial_verdict"] == "Allow-with-Transform"
    assert payload["final_verdict"] == "Allow"
    assert payload["approved_artifact"].endswith("_anonymized")


def test_decide_endpoint_rejects_bad_packet(service):
    svc, _ = service
    status, payload = _post(svc.url("control") + "/decide", {"artifact_uri": ""})
    assert status == 400


def test_incident_listing(service):
    svc, _ = service
    status, payload = _post(svc.url("control") + "/decide", {"artifact_uri": REC_RAWPII.value, "audience": "policy-ext:PublicAudience", "activity": "iot-reg:DataSharing"})
    assert status == 200 and payload["incident"]
    with urllib.request.urlopen(svc.url("control") + "/incidents", timeout=10) as response:
        listing = json.loads(response.read())
    assert any(i["category"] == "Prohibited_Share" for i in listing["incidents"])


def test_template_endpoint(service):
    svc, _ = service
    status, payload = _post(svc.url("control") + "/query/disasters_by_state", {"params": {"state": "Texas"}})
    assert status == 200
    assert all("event" in row for row in payload["rows"])
    status, _ = _post(svc.url("control") + "/query/disasters_by_state", {"params": {}})
    assert status == 400  # missing parameter
    status, _ = _post(svc.url("control") + "/query/not_a_template", {"params": {}})
    assert status == 400


def test_internal_store_fault_yields_500_on_query(service):
    svc, _ = service
    from graphgate.rdf import EvaluationError

    def hook(op):
        raise EvaluationError("injected")

    svc.store.fault_hook = hook
    try:
        status, payload = _post(
            svc.url("dkg") + "/query",
            {"pattern": [[{"var": "s"}, {"var": "p"}, {"var": "o"}]]},
        )
        assert status == 500
    finally:
        svc.store.fault_hook = None


def test_decide_fail_closes_on_store_fault(service):
    svc, fixture = service
    from graphgate.rdf import EvaluationError

    calls = {"n": 0}

    def hook(op):
        calls["n"] += 1
        if calls["n"] > 1:
            raise EvaluationError("injected")

    svc.store.fault_hook = hook
    try:
        status, payload = _post(
            svc.url("control") + "/decide",
            {"artifact_uri": IMG_RAW.value, "audience": "policy-ext:PublicAudience", "activity": "iot-reg:DataSharing"},
        )
        assert status == 200
        assert payload["final_verdict"] == "Block"
    finally:
        svc.store.fault_hook = None


# --- template library -------------------------------------------------------------


def test_library_sizes():
    assert len(SINGLE_TEMPLATES) == 21
    assert len(FEDERATED_TEMPLATES) == 5
    assert len(template_library()) == 26


def test_named_templates_exist():
    assert get_template("disasters_with_geofeatures_in_state").workload == "single"
    assert get_template("incidents_by_category").workload == "single"
    assert get_template("unaudited_incidents").workload == "single"
    assert get_template("global_compliance_dashboard").workload == "federated"
    with pytest.raises(KeyError):
        get_template("nope")


def test_template_names_unique():
    names = [t.name for t in template_library()]
    assert len(names) == len(set(names))


def test_compliance_status_rule():
    assert compliance_status("iot-reg:isAnonymized", True) == "COMPLIANT"
    assert compliance_status("iot-reg:isAnonymized", False) == "NON_COMPLIANT"
    assert compliance_status("iot-reg:isAnonymized", None) == "NON_COMPLIANT"
    assert compliance_status("iot-reg:usesSecureChannel", True) == "UNKNOWN"


# --- federation -----------------------------------------------------------------


@pytest.fixture()
def local_endpoints(policy_pack):
    store = gold_dkg()
    store.insert(policy_pack.quads)
    return LocalEndpoint(store, DKG_GRAPH), LocalEndpoint(store, PKG_GRAPH)


def test_dashboard_matches_hand_computed_rows(policy_pack):
    # Two-image store: one anonymized, one raw. Every permission/obligation
    # rule row joins against both images.
    store = Dataset()
    from graphgate.rdf import Quad

    img_a = Iri(DM.base + "Image_dash_a")
    img_b = Iri(DM.base + "Image_dash_b")
    store.insert(
        [
            Quad(img_a, RDF_TYPE, IOTREG.Image, DKG_GRAPH),
            Quad(img_a, IOTREG.isAnonymized, lit_bool(True), DKG_GRAPH),
            Quad(img_b, RDF_TYPE, IOTREG.Image, DKG_GRAPH),
        ]
    )
    store.insert(policy_pack.quads)
    dkg, pkg = LocalEndpoint(store, DKG_GRAPH), LocalEndpoint(store, PKG_GRAPH)
    rows = run_federated(get_template("global_compliance_dashboard"), {}, dkg, pkg)
    by_pair = {(r["image"], r["audience"], r["status"]) for r in rows}
    assert ("Image_dash_a", "PublicAudience", "COMPLIANT") in by_pair
    assert ("Image_dash_b", "PublicAudience", "NON_COMPLIANT") in by_pair
    # The secure-channel obligation has an unrecognized flag property.
    assert any(status == "UNKNOWN" for _, _, status in by_pair)


def test_plans_return_identical_rows(local_endpoints):
    dkg, pkg = local_endpoints
    for template in FEDERATED_TEMPLATES:
        params = template.sample_params(dkg)
        pushed = run_federated(template, params, dkg, pkg, plan="pkg_first")
        naive = run_federated(template, params, dkg, pkg, plan="naive")
        assert pushed == naive, template.name


def test_transform_backlog_matches_decide(local_endpoints, policy_pack):
    # Backlog rows for the public audience are exactly the images whose
    # decide verdict is Allow-with-Transform.
    from graphgate.decision import ReleaseRequest, VerdictKind, decide, infer_data_type
    from graphgate.vocab import POLICYEXT, local_name

    dkg, pkg = local_endpoints
    store = dkg.store
    rows = run_federated(get_template("transform_backlog"), {}, dkg, pkg)
    backlog_public = {row["image"] for row in rows if row["audience"] == "PublicAudience"}

    expected = set()
    for quad in store.quads_for(DKG_GRAPH, predicate=RDF_TYPE, obj=IOTREG.Image):
        artifact = quad.subject
        request = ReleaseRequest(artifact, POLICYEXT.PublicAudience, IOTREG.DataSharing, infer_data_type(store, artifact))
        verdict, _ = decide(store, policy_pack, request)
        if verdict.kind == VerdictKind.ALLOW_WITH_TRANSFORM:
            expected.add(local_name(artifact))
    assert backlog_public == expected


def test_explanation_returns_blocking_prohibition(local_endpoints):
    dkg, pkg = local_endpoints
    rows = run_federated(
        get_template("decision_explanation"),
        {"artifact": REC_RAWPII.value, "audience": "policy-ext:PublicAudience"},
        dkg,
        pkg,
    )
    assert rows == [{"kind": "prohibition", "statement": "policy-ext:Prohibit_Partner_Reshare"}]


def test_shareability_lists_compliant_images(local_endpoints):
    dkg, pkg = local_endpoints
    rows = run_federated(get_template("audience_shareability"), {"audience": "policy-ext:PublicAudience"}, dkg, pkg)
    names = {row["image"] for row in rows}
    assert "Image_26bd9fa01c44_2018_Camp_Fire" in names  # pre-anonymized
    assert "Image_0a1b2c3d4e5f_2017_Hurricane_Harvey" not in names  # raw


def test_unaudited_incidents_resolve_after_audit(policy_pack):
    from graphgate.decision import REASON_PROHIBITION, ReleaseRequest, block
    from graphgate.incidents import log_incident, record_audit
    from graphgate.vocab import POLICYEXT

    store = gold_dkg()
    store.insert(policy_pack.quads)
    request = ReleaseRequest(REC_RAWPII, POLICYEXT.PublicAudience, IOTREG.DataSharing, IOTREG.PersonalData)
    incident = log_incident(store, request, block(REASON_PROHIBITION, "x"), REASON_PROHIBITION)
    dkg = LocalEndpoint(store, DKG_GRAPH)
    template = get_template("unaudited_incidents")
    names = {row["incident"] for row in template.run_single(dkg, {})}
    assert any(incident.uri.value.endswith(name) for name in names)
    record_audit(store, incident.uri, "triaged")
    names_after = {row["incident"] for row in template.run_single(dkg, {})}
    assert not any(incident.uri.value.endswith(name) for name in names_after)


def test_shareability_consistent_with_decide(local_endpoints, policy_pack):
    # Restricted dashboard-engine consistency: whenever some permission
    # matches the artifact's data type and no prohibition matches, the
    # shareability listing agrees with an Allow-and-no-transform verdict.
    from graphgate.decision import ReleaseRequest, VerdictKind, decide, infer_data_type
    from graphgate.policy import DeonticKind
    from graphgate.vocab import POLICYEXT, local_name

    dkg, pkg = local_endpoints
    store = dkg.store
    for audience in (POLICYEXT.PublicAudience, POLICYEXT.PartnerAgency):
        rows = run_federated(get_template("audience_shareability"), {"audience": audience.value}, dkg, pkg)
        listed = {row["image"] for row in rows}
        for quad in store.quads_for(DKG_GRAPH, predicate=RDF_TYPE, obj=IOTREG.Image):
            artifact = quad.subject
            inferred = infer_data_type(store, artifact)
            perms = [
                p
                for p in policy_pack.of_kind(DeonticKind.PERMISSION)
                if p.matches(audience, IOTREG.DataSharing, inferred)
            ]
            prohibited = [
                p
                for p in policy_pack.of_kind(DeonticKind.PROHIBITION)
                if p.matches(audience, IOTREG.DataSharing, inferred)
            ]
            if not perms or prohibited:
                continue
            verdict, _ = decide(store, policy_pack, ReleaseRequest(artifact, audience, IOTREG.DataSharing, inferred))
            engine_clears = verdict.kind == VerdictKind.ALLOW and not verdict.transforms
            assert (local_name(artifact) in listed) == engine_clears, artifact.value


def test_bench_single_sample_and_ordering(local_endpoints):
    from graphgate.monitor import bench

    dkg, pkg = local_endpoints
    results = bench(dkg, pkg, repetitions=1)
    assert results["single"]["executions"] == len(SINGLE_TEMPLATES)
    assert results["federated"]["executions"] == len(FEDERATED_TEMPLATES)
    assert results["single"]["pass_rate"] == 1.0 and results["federated"]["pass_rate"] == 1.0
    # Single-graph queries sit well under the federated ones.
    assert results["single"]["median_s"] < results["federated"]["median_s"]


def test_stopped_endpoint_raises_federation_error(tmp_path, policy_pack):
    store = gold_dkg()
    store.insert(policy_pack.quads)
    svc = serve_endpoints(
        store,
        policy_pack,
        RunnerConfig(staging_dir=tmp_path / "s", derived_dir=tmp_path / "d", key_dir=tmp_path / "k"),
        ServiceConfig(),
    )
    dkg = HttpEndpoint(svc.url("dkg"), timeout=3)
    pkg = HttpEndpoint(svc.url("pkg"), timeout=3)
    svc.stop("pkg")
    try:
        with pytest.raises(FederationError):
            run_federated(get_template("global_compliance_dashboard"), {}, dkg, pkg)
    finally:
        svc.stop()
