"""Query template library: 21 single-graph templates over the disaster
graph and 5 federated templates that join policy rules with artifact state.

Templates are parameterized and hand-authored; analysts pick one and fill
its parameters instead of writing queries. Compliance status follows one
rule everywhere: a known flag bound true is COMPLIANT, a known flag bound
false or absent is NON_COMPLIANT, an unrecognized flag property is UNKNOWN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..rdf import Binding, Iri, Literal, Term, Var, lit, lit_bool
from ..vocab import DM, FLAG_PROPERTIES, GEO, IOTREG, PROV, RDF_TYPE, compact, expand, local_name
from .federate import (
    ArtifactState,
    RuleRows,
    fetch_rule_rows,
    fetch_state_naive,
    fetch_state_pushed,
    infer_type_from,
)

__all__ = ["template_library", "get_template", "compliance_status", "QueryTemplate", "SINGLE_TEMPLATES", "FEDERATED_TEMPLATES"]

STATUS_COMPLIANT = "COMPLIANT"
STATUS_NON_COMPLIANT = "NON_COMPLIANT"
STATUS_UNKNOWN = "UNKNOWN"


def compliance_status(flag_name: str, value: bool | None) -> str:
    """The dashboard status rule over one (flag property, bound value) pair."""
    if flag_name not in FLAG_PROPERTIES:
        return STATUS_UNKNOWN
    return STATUS_COMPLIANT if value is True else STATUS_NON_COMPLIANT


def _label(term: Term) -> str:
    if isinstance(term, Iri):
        return local_name(term)
    if isinstance(term, Literal):
        return term.lexical
    return str(term)


def _rows(bindings: list[Binding]) -> list[dict]:
    return [{name: _label(term) for name, term in b.items()} for b in bindings]


@dataclass(frozen=True)
class QueryTemplate:
    """One library entry; federated templates carry a two-graph runner."""

    name: str
    description: str
    workload: str  # "single" | "federated"
    params: tuple[str, ...]
    runner: Callable
    sampler: Callable | None = None

    def run_single(self, dkg, params: dict[str, str]) -> list[dict]:
        if self.workload != "single":
            raise ValueError(f"{self.name} is a federated template")
        return self.runner(dkg, params)

    def run_federated(self, params: dict[str, str], dkg, pkg, plan: str) -> list[dict]:
        if self.workload != "federated":
            raise ValueError(f"{self.name} is a single-graph template")
        return self.runner(params, dkg, pkg, plan)

    def sample_params(self, dkg) -> dict[str, str]:
        """Live defaults for benchmarking: pulled from the fixture itself."""
        if self.sampler is None:
            return {}
        return self.sampler(dkg)

    def check_params(self, params: dict[str, str]) -> None:
        missing = [p for p in self.params if p not in params]
        if missing:
            raise ValueError(f"{self.name}: missing parameters {missing}")


def _require(params: dict[str, str], name: str) -> str:
    value = params.get(name)
    if value is None:
        raise ValueError(f"missing parameter {name!r}")
    return value


def _first_of_type(dkg, cls: Iri) -> Iri | None:
    rows = dkg.query([(Var("s"), RDF_TYPE, cls)], limit=None)
    subjects = sorted({b["s"].value for b in rows if isinstance(b["s"], Iri)})
    return Iri(subjects[0]) if subjects else None


# --- single-graph templates -----------------------------------------------------


def _single(name: str, description: str, params: tuple[str, ...], runner, sampler=None) -> QueryTemplate:
    return QueryTemplate(name, description, "single", params, runner, sampler)


def _t_disasters_by_state(dkg, params):
    state = _require(params, "state")
    ev, loc = Var("event"), Var("loc")
    return _rows(dkg.query([(ev, RDF_TYPE, DM.DisasterEvent), (ev, DM.occured_in, loc), (loc, DM.stateName, lit(state))]))


def _t_disasters_by_year(dkg, params):
    year = _require(params, "year")
    ev, d = Var("event"), Var("date")
    rows = dkg.query([(ev, RDF_TYPE, DM.DisasterEvent), (ev, DM.incidentBeginDate, d)])
    return _rows([b for b in rows if isinstance(b["date"], Literal) and b["date"].lexical.startswith(year)])


def _t_disasters_by_incident_type(dkg, params):
    ev = Var("event")
    return _rows(dkg.query([(ev, RDF_TYPE, DM.DisasterEvent), (ev, DM.incidentType, lit(_require(params, "incident_type")))]))


def _t_disasters_with_geofeatures_in_state(dkg, params):
    geo, ev, loc = Var("geofeature"), Var("event"), Var("loc")
    return _rows(
        dkg.query(
            [
                (geo, RDF_TYPE, DM.GeoFeature),
                (geo, DM.describes, ev),
                (ev, DM.occured_in, loc),
                (loc, DM.stateName, lit(_require(params, "state"))),
            ]
        )
    )


def _t_declarations_for_event(dkg, params):
    event = expand(_require(params, "event"))
    return _rows(dkg.query([(event, DM.has_declaration, Var("declaration"))]))


def _t_declarations_by_type(dkg, params):
    decl = Var("declaration")
    return _rows(dkg.query([(decl, RDF_TYPE, DM.Declaration), (decl, DM.declarationType, lit(_require(params, "declaration_type")))]))


def _t_requests_by_status(dkg, params):
    req = Var("request")
    return _rows(dkg.query([(req, RDF_TYPE, DM.DeclarationRequest), (req, DM.requestStatus, lit(_require(params, "status")))]))


def _t_locations_in_state(dkg, params):
    loc = Var("loc")
    return _rows(dkg.query([(loc, RDF_TYPE, DM.Location), (loc, DM.stateName, lit(_require(params, "state")))]))


def _t_events_for_location(dkg, params):
    location = expand(_require(params, "location"))
    return _rows(dkg.query([(Var("event"), DM.occured_in, location)]))


def _t_images_for_event(dkg, params):
    event = expand(_require(params, "event"))
    return _rows(dkg.query([(Var("image"), DM.captures, event)]))


def _t_images_by_flag(dkg, params):
    flag = _require(params, "flag")
    prop = FLAG_PROPERTIES.get(flag)
    if prop is None:
        raise ValueError(f"unknown flag {flag!r}")
    value = _require(params, "value") == "true"
    img = Var("image")
    return _rows(dkg.query([(img, RDF_TYPE, IOTREG.Image), (img, prop, lit_bool(value))]))


def _t_images_with_pii(dkg, params):
    img = Var("image")
    return _rows(dkg.query([(img, RDF_TYPE, IOTREG.Image), (img, DM.containsPII, lit_bool(True))]))


def _t_anonymized_images(dkg, params):
    return _rows(dkg.query([(Var("image"), IOTREG.isAnonymized, lit_bool(True))]))


def _t_encrypted_artifacts(dkg, params):
    return _rows(dkg.query([(Var("artifact"), IOTREG.isEncrypted, lit_bool(True))]))


def _t_image_provenance(dkg, params):
    artifact = expand(_require(params, "artifact"))
    rows = dkg.query([(artifact, Var("property"), Var("value"))])
    out = [{"property": compact(b["property"]) if isinstance(b["property"], Iri) else _label(b["property"]), "value": _label(b["value"])} for b in rows]
    return out


def _t_derived_artifacts_of(dkg, params):
    original = expand(_require(params, "artifact"))
    return _rows(dkg.query([(Var("derived"), PROV.wasDerivedFrom, original)]))


def _t_geofeatures_for_event(dkg, params):
    event = expand(_require(params, "event"))
    geo = Var("geofeature")
    return _rows(dkg.query([(geo, DM.describes, event), (geo, GEO.asWKT, Var("wkt"))]))


def _t_incidents_all(dkg, params):
    inc = Var("incident")
    rows = dkg.query([(inc, RDF_TYPE, IOTREG.PersonalDataBreach), (inc, DM.incidentCategory, Var("category"))])
    return _rows(rows)


def _t_incidents_by_category(dkg, params):
    rows = dkg.query([(Var("incident"), DM.incidentCategory, Var("category"))])
    counts: dict[str, int] = {}
    for b in rows:
        counts[_label(b["category"])] = counts.get(_label(b["category"]), 0) + 1
    return [{"category": category, "count": count} for category, count in sorted(counts.items())]


def _t_incident_audit_history(dkg, params):
    incident = expand(_require(params, "incident"))
    audit = Var("audit")
    rows = dkg.query([(audit, DM.auditsIncident, incident), (audit, DM.auditTime, Var("time"))])
    out = _rows(rows)
    out.sort(key=lambda r: r["time"])
    return out


def _t_unaudited_incidents(dkg, params):
    incidents = {b["incident"] for b in dkg.query([(Var("incident"), RDF_TYPE, IOTREG.PersonalDataBreach)])}
    audited = {b["i"] for b in dkg.query([(Var("a"), DM.auditsIncident, Var("i"))])}
    return [{"incident": _label(i)} for i in sorted(incidents - audited, key=lambda t: t.value)]


def _sample_state(dkg):
    rows = dkg.query([(Var("l"), DM.stateName, Var("s"))], limit=None)
    states = sorted({b["s"].lexical for b in rows if isinstance(b["s"], Literal)})
    return {"state": states[0] if states else "Texas"}


def _sample_year(dkg):
    rows = dkg.query([(Var("e"), DM.incidentBeginDate, Var("d"))])
    years = sorted({b["d"].lexical[:4] for b in rows if isinstance(b["d"], Literal)})
    return {"year": years[0] if years else "2005"}


def _sample_incident_type(dkg):
    rows = dkg.query([(Var("e"), DM.incidentType, Var("t"))])
    kinds = sorted({b["t"].lexical for b in rows if isinstance(b["t"], Literal)})
    return {"incident_type": kinds[0] if kinds else "Hurricane"}


def _sample_event(dkg):
    event = _first_of_type(dkg, DM.DisasterEvent)
    return {"event": event.value if event else DM.base + "DisasterEvent_0000"}


def _sample_location(dkg):
    loc = _first_of_type(dkg, DM.Location)
    return {"location": loc.value if loc else DM.base + "Location_0000"}


def _sample_image(dkg):
    image = _first_of_type(dkg, IOTREG.Image)
    return {"artifact": image.value if image else DM.base + "Image_000000"}


def _sample_incident(dkg):
    incident = _first_of_type(dkg, IOTREG.PersonalDataBreach)
    return {"incident": incident.value if incident else DM.base + "Incident_none"}


SINGLE_TEMPLATES: tuple[QueryTemplate, ...] = (
    _single("disasters_by_state", "Disasters that occurred in a state", ("state",), _t_disasters_by_state, _sample_state),
    _single("disasters_by_year", "Disasters beginning in a year", ("year",), _t_disasters_by_year, _sample_year),
    _single("disasters_by_incident_type", "Disasters of one incident type", ("incident_type",), _t_disasters_by_incident_type, _sample_incident_type),
    _single("disasters_with_geofeatures_in_state", "Disasters with geofeatures in a state", ("state",), _t_disasters_with_geofeatures_in_state, _sample_state),
    _single("declarations_for_event", "Declarations attached to an event", ("event",), _t_declarations_for_event, _sample_event),
    _single("declarations_by_type", "Declarations of one declaration type", ("declaration_type",), _t_declarations_by_type, lambda d: {"declaration_type": "DR"}),
    _single("declaration_requests_by_status", "Declaration requests by status", ("status",), _t_requests_by_status, lambda d: {"status": "Approved"}),
    _single("locations_in_state", "Locations within a state", ("state",), _t_locations_in_state, _sample_state),
    _single("events_for_location", "Events that occurred in a location", ("location",), _t_events_for_location, _sample_location),
    _single("images_for_event", "Imagery capturing an event", ("event",), _t_images_for_event, _sample_event),
    _single("images_by_flag", "Images with one privacy flag set to a value", ("flag", "value"), _t_images_by_flag, lambda d: {"flag": "dm:containsPII", "value": "true"}),
    _single("images_with_pii", "Images currently flagged as containing PII", (), _t_images_with_pii),
    _single("anonymized_images", "Artifacts flagged as anonymized", (), _t_anonymized_images),
    _single("encrypted_artifacts", "Artifacts flagged as encrypted", (), _t_encrypted_artifacts),
    _single("image_provenance", "All recorded statements about one artifact", ("artifact",), _t_image_provenance, _sample_image),
    _single("derived_artifacts_of", "Artifacts derived from an original", ("artifact",), _t_derived_artifacts_of, _sample_image),
    _single("geofeatures_for_event", "Geofeature footprints describing an event", ("event",), _t_geofeatures_for_event, _sample_event),
    _single("incidents_all", "All registered privacy incidents", (), _t_incidents_all),
    _single("incidents_by_category", "Incident counts grouped by category", (), _t_incidents_by_category),
    _single("incident_audit_history", "Audit records for one incident, in time order", ("incident",), _t_incident_audit_history, _sample_incident),
    _single("unaudited_incidents", "Incidents with no audit attached", (), _t_unaudited_incidents),
)


# --- federated templates ------------------------------------------------------------


def _fetch_state(dkg, rules: RuleRows, plan: str, subjects_pattern: list[tuple]) -> ArtifactState:
    if plan == "pkg_first":
        return fetch_state_pushed(dkg, subjects_pattern, rules.flag_names())
    return fetch_state_naive(dkg, subjects_pattern)


def _images(dkg) -> list[Iri]:
    rows = dkg.query([(Var("s"), RDF_TYPE, IOTREG.Image)])
    return sorted({b["s"] for b in rows if isinstance(b["s"], Iri)}, key=lambda i: i.value)


def _image_pattern() -> list[tuple]:
    return [(Var("s"), RDF_TYPE, IOTREG.Image)]


def _f_global_dashboard(params, dkg, pkg, plan):
    if plan == "pkg_first":
        rules = fetch_rule_rows(pkg)
        images = _images(dkg)
        state = _fetch_state(dkg, rules, plan, _image_pattern())
    else:
        images = _images(dkg)
        state = fetch_state_naive(dkg, _image_pattern())
        rules = fetch_rule_rows(pkg)
    rows = []
    for perm in rules.permissions:
        if perm.recipient is None:
            continue
        for oblig_id in perm.obligations:
            oblig = rules.obligations.get(oblig_id)
            if oblig is None:
                continue
            for image in images:
                status = compliance_status(oblig.flag_name, state.flag(image, oblig.flag_name))
                rows.append({"image": local_name(image), "audience": local_name(perm.recipient), "status": status})
    return rows


def _prohibited(rules: RuleRows, recipient: Iri, data_type: Iri | None) -> Iri | None:
    sharing = IOTREG.DataSharing
    for proh in rules.prohibitions:
        if proh.recipient is not None and proh.recipient != recipient:
            continue
        if proh.activity is not None and proh.activity != sharing:
            continue
        if proh.data_type is not None and proh.data_type != data_type:
            continue
        return proh.prohibition
    return None


def _f_transform_backlog(params, dkg, pkg, plan):
    if plan == "pkg_first":
        rules = fetch_rule_rows(pkg)
        images = _images(dkg)
        state = _fetch_state(dkg, rules, plan, _image_pattern())
    else:
        images = _images(dkg)
        state = fetch_state_naive(dkg, _image_pattern())
        rules = fetch_rule_rows(pkg)
    rows = []
    for image in images:
        inferred = infer_type_from(state.types.get(image, frozenset()))
        for perm in rules.permissions:
            if perm.recipient is None or perm.data_type != inferred:
                continue
            if _prohibited(rules, perm.recipient, inferred) is not None:
                continue
            for oblig_id in perm.obligations:
                oblig = rules.obligations.get(oblig_id)
                if oblig is None or not oblig.transforms:
                    continue
                if state.flag(image, oblig.flag_name) is not True:
                    rows.append(
                        {
                            "image": local_name(image),
                            "audience": local_name(perm.recipient),
                            "transform": ",".join(oblig.transforms),
                        }
                    )
    return rows


def _f_audience_shareability(params, dkg, pkg, plan):
    audience = expand(_require(params, "audience"))
    if plan == "pkg_first":
        rules = fetch_rule_rows(pkg)
        images = _images(dkg)
        state = _fetch_state(dkg, rules, plan, _image_pattern())
    else:
        images = _images(dkg)
        state = fetch_state_naive(dkg, _image_pattern())
        rules = fetch_rule_rows(pkg)
    rows = []
    for image in images:
        inferred = infer_type_from(state.types.get(image, frozenset()))
        if _prohibited(rules, audience, inferred) is not None:
            continue
        for perm in rules.permissions:
            if perm.recipient != audience or perm.data_type != inferred:
                continue
            satisfied = all(
                rules.obligations[o].flag_name in FLAG_PROPERTIES
                and state.flag(image, rules.obligations[o].flag_name) is True
                for o in perm.obligations
                if o in rules.obligations
            )
            if satisfied:
                rows.append({"image": local_name(image), "audience": local_name(audience)})
                break
    return rows


def _f_decision_explanation(params, dkg, pkg, plan):
    artifact = expand(_require(params, "artifact"))
    audience = expand(_require(params, "audience"))
    if plan == "pkg_first":
        # The artifact is a bound parameter, so the pushed plan narrows
        # every state lookup to that one subject.
        rules = fetch_rule_rows(pkg)
        state = fetch_state_pushed(dkg, [], rules.flag_names(), subject=artifact)
    else:
        state = fetch_state_naive(dkg, [(Var("s"), RDF_TYPE, Var("anytype"))])
        rules = fetch_rule_rows(pkg)
    inferred = infer_type_from(state.types.get(artifact, frozenset()))
    proh = _prohibited(rules, audience, inferred)
    if proh is not None:
        return [{"kind": "prohibition", "statement": compact(proh)}]
    rows = []
    matched_any = False
    for perm in rules.permissions:
        if perm.recipient != audience or perm.data_type != inferred:
            continue
        matched_any = True
        for oblig_id in perm.obligations:
            oblig = rules.obligations.get(oblig_id)
            if oblig is None:
                continue
            if state.flag(artifact, oblig.flag_name) is not True:
                rows.append({"kind": "unsatisfied_obligation", "statement": compact(oblig.obligation), "flag": oblig.flag_name})
    if not matched_any:
        return [{"kind": "no_permission", "statement": ""}]
    if not rows:
        return [{"kind": "allowed", "statement": ""}]
    return rows


def _f_event_cross_audience(params, dkg, pkg, plan):
    event = expand(_require(params, "event"))
    event_images_pattern = [(Var("s"), DM.captures, event)]
    if plan == "pkg_first":
        rules = fetch_rule_rows(pkg)
        image_rows = dkg.query(event_images_pattern)
        state = _fetch_state(dkg, rules, plan, event_images_pattern)
    else:
        image_rows = dkg.query(event_images_pattern)
        state = fetch_state_naive(dkg, event_images_pattern)
        rules = fetch_rule_rows(pkg)
    images = sorted({b["s"] for b in image_rows if isinstance(b["s"], Iri)}, key=lambda i: i.value)
    rows = []
    for perm in rules.permissions:
        if perm.recipient is None:
            continue
        for oblig_id in perm.obligations:
            oblig = rules.obligations.get(oblig_id)
            if oblig is None:
                continue
            for image in images:
                status = compliance_status(oblig.flag_name, state.flag(image, oblig.flag_name))
                rows.append({"audience": local_name(perm.recipient), "image": local_name(image), "status": status})
    return rows


def _federated(name, description, params, runner, sampler=None) -> QueryTemplate:
    return QueryTemplate(name, description, "federated", params, runner, sampler)


FEDERATED_TEMPLATES: tuple[QueryTemplate, ...] = (
    _federated("global_compliance_dashboard", "Compliance status of every image per audience", (), _f_global_dashboard),
    _federated("transform_backlog", "Images needing transforms before release, with the required remediation", (), _f_transform_backlog),
    _federated("audience_shareability", "Images shareable with an audience right now", ("audience",), _f_audience_shareability, lambda d: {"audience": "policy-ext:PublicAudience"}),
    _federated("decision_explanation", "The policy basis blocking (or clearing) one artifact for one audience", ("artifact", "audience"), _f_decision_explanation, lambda d: {**_sample_image(d), "audience": "policy-ext:PublicAudience"}),
    _federated("event_cross_audience_summary", "Cross-audience compliance matrix for one event's imagery", ("event",), _f_event_cross_audience, _sample_event),
)


def template_library() -> tuple[QueryTemplate, ...]:
    """Every template, single-graph first."""
    return SINGLE_TEMPLATES + FEDERATED_TEMPLATES


def get_template(name: str) -> QueryTemplate:
    for template in template_library():
        if template.name == name:
            return template
    raise KeyError(name)
