"""Privacy incident registration and audit records.

A blocked release of personal data becomes a PersonalDataBreach individual
in the disaster graph: five triples inserted in one transaction (type,
derivation link, category, reason, detection time). Audits attach to
incidents and make them show up as resolved in monitoring queries.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .clocks import IdMinter, SystemClock, isoformat_utc
from .decision import (
    REASON_AUDIENCE_UNKNOWN,
    REASON_NO_PERMISSION,
    REASON_PROHIBITION,
    REASON_TRANSFORM_FAILED,
    ReleaseRequest,
    Verdict,
    VerdictKind,
)
from .rdf import Dataset, DKG_GRAPH, Iri, Quad, lit, lit_datetime
from .vocab import DM, IOTREG, POLICYEXT, PROV, RDF_TYPE

CATEGORY_PROHIBITED = "Prohibited_Share"
CATEGORY_NO_PERMISSION = "No_Permission"
CATEGORY_INVALID_AUDIENCE = "Invalid_Audience"
CATEGORY_TRANSFORM_FAILURE = "Transform_Failure"
CATEGORY_OTHER = "Other"

CATEGORIES = (
    CATEGORY_PROHIBITED,
    CATEGORY_NO_PERMISSION,
    CATEGORY_INVALID_AUDIENCE,
    CATEGORY_TRANSFORM_FAILURE,
    CATEGORY_OTHER,
)

_CATEGORY_BY_REASON = {
    REASON_PROHIBITION: CATEGORY_PROHIBITED,
    REASON_NO_PERMISSION: CATEGORY_NO_PERMISSION,
    REASON_AUDIENCE_UNKNOWN: CATEGORY_INVALID_AUDIENCE,
    REASON_TRANSFORM_FAILED: CATEGORY_TRANSFORM_FAILURE,
}


def classify(reason: str) -> str:
    """Map a machine reason code to an incident category; total function."""
    return _CATEGORY_BY_REASON.get(reason, CATEGORY_OTHER)


@dataclass(frozen=True)
class Incident:
    uri: Iri
    category: str
    reason: str
    detected_at: datetime
    derived_from: Iri


class IncidentLogError(Exception):
    """The incident could not be written after a retry."""


def log_incident(
    dkg: Dataset,
    request: ReleaseRequest,
    verdict: Verdict,
    reason: str,
    clock=None,
    ids: IdMinter | None = None,
) -> Incident | None:
    """Register a privacy incident when a personal-data release was blocked.

    Returns None for any non-blocking verdict or non-personal data type.
    The write is retried once; a second failure surfaces as
    IncidentLogError, but the caller's Block verdict stands regardless.
    """
    if verdict.kind != VerdictKind.BLOCK or request.data_type != IOTREG.PersonalData:
        return None
    clock = clock or SystemClock()
    ids = ids or IdMinter()
    category = classify(reason)
    detected = clock.now()
    uri = Iri(DM.base + f"Incident_{ids.mint()[:12]}")
    quads = [
        Quad(uri, RDF_TYPE, IOTREG.PersonalDataBreach, DKG_GRAPH),
        Quad(uri, PROV.wasDerivedFrom, request.artifact, DKG_GRAPH),
        Quad(uri, DM.incidentCategory, lit(category), DKG_GRAPH),
        Quad(uri, DM.incidentReason, lit(verdict.detail or reason), DKG_GRAPH),
        Quad(uri, DM.incidentDetectedAt, lit_datetime(isoformat_utc(detected)), DKG_GRAPH),
    ]
    try:
        dkg.insert(quads)
    except Exception:
        try:
            dkg.insert(quads)
        except Exception as exc:
            raise IncidentLogError(f"incident write failed twice: {exc}") from exc
    return Incident(uri=uri, category=category, reason=verdict.detail or reason, detected_at=detected, derived_from=request.artifact)


def list_incidents(dkg: Dataset) -> list[Incident]:
    """All registered incidents, ordered by URI."""
    found = []
    for q in dkg.quads_for(DKG_GRAPH, predicate=RDF_TYPE, obj=IOTREG.PersonalDataBreach):
        uri = q.subject
        if not isinstance(uri, Iri):
            continue
        props = {quad.predicate: quad.object for quad in dkg.quads_for(DKG_GRAPH, subject=uri)}
        category = props.get(DM.incidentCategory)
        reason = props.get(DM.incidentReason)
        detected = props.get(DM.incidentDetectedAt)
        derived = props.get(PROV.wasDerivedFrom)
        found.append(
            Incident(
                uri=uri,
                category=getattr(category, "lexical", ""),
                reason=getattr(reason, "lexical", ""),
                detected_at=datetime.fromisoformat(detected.lexical.replace("Z", "+00:00")) if detected else datetime.min,
                derived_from=derived if isinstance(derived, Iri) else uri,
            )
        )
    found.sort(key=lambda i: i.uri.value)
    return found


def record_audit(
    dkg: Dataset,
    incident: Iri,
    notes: str,
    clock=None,
    ids: IdMinter | None = None,
) -> Iri:
    """Attach an audit record to an existing incident."""
    clock = clock or SystemClock()
    ids = ids or IdMinter()
    is_incident = any(
        True for _ in dkg.quads_for(DKG_GRAPH, subject=incident, predicate=RDF_TYPE, obj=IOTREG.PersonalDataBreach)
    )
    if not is_incident:
        raise ValueError(f"not a registered incident: {incident.value}")
    uri = Iri(POLICYEXT.base + f"Audit_{ids.mint()[:12]}")
    dkg.insert(
        [
            Quad(uri, RDF_TYPE, POLICYEXT.IncidentAudit, DKG_GRAPH),
            Quad(uri, DM.auditsIncident, incident, DKG_GRAPH),
            Quad(uri, DM.auditTime, lit_datetime(isoformat_utc(clock.now())), DKG_GRAPH),
            Quad(uri, DM.auditNotes, lit(notes), DKG_GRAPH),
        ]
    )
    return uri
