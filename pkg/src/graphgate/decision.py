"""Release decision engine: prohibition dominance, fail-closed permissions,
obligation evaluation with transform mapping.

`decide` is pure over the graph snapshot and never raises: every internal
fault folds into a Block verdict with a machine reason code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .clocks import IdMinter, SystemClock
from .policy import DeonticKind, DeonticStatement, PolicyPack
from .rdf import Dataset, DKG_GRAPH, Iri
from .vocab import IOTREG, RDF_TYPE, compact, flag_value

# Machine reason codes carried by Block verdicts. The incident module keys
# its category mapping off these, so the set is closed.
REASON_PROHIBITION = "prohibition_matched"
REASON_NO_PERMISSION = "no_permission"
REASON_AUDIENCE_UNKNOWN = "audience_unknown"
REASON_TRANSFORM_FAILED = "transform_failed"
REASON_NOT_FOUND = "artifact_not_found"
REASON_MALFORMED = "malformed_uri"
REASON_STORE_ERROR = "store_error"

REASON_CODES = frozenset(
    {
        REASON_PROHIBITION,
        REASON_NO_PERMISSION,
        REASON_AUDIENCE_UNKNOWN,
        REASON_TRANSFORM_FAILED,
        REASON_NOT_FOUND,
        REASON_MALFORMED,
        REASON_STORE_ERROR,
    }
)


class VerdictKind(Enum):
    ALLOW = "Allow"
    BLOCK = "Block"
    ALLOW_WITH_TRANSFORM = "Allow-with-Transform"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    transforms: tuple[str, ...] = ()
    reason: str | None = None
    detail: str = ""

    def __post_init__(self) -> None:
        if self.kind == VerdictKind.ALLOW and self.transforms:
            raise ValueError("Allow carries no transforms")
        if self.kind == VerdictKind.ALLOW_WITH_TRANSFORM and not self.transforms:
            raise ValueError("Allow-with-Transform needs at least one transform")
        if self.kind == VerdictKind.BLOCK and self.reason is None:
            raise ValueError("Block needs a reason code")

    @property
    def allows(self) -> bool:
        return self.kind != VerdictKind.BLOCK


def allow() -> Verdict:
    return Verdict(VerdictKind.ALLOW)


def block(reason: str, detail: str = "") -> Verdict:
    return Verdict(VerdictKind.BLOCK, reason=reason, detail=detail)


def allow_with_transform(transforms: list[str] | tuple[str, ...]) -> Verdict:
    return Verdict(VerdictKind.ALLOW_WITH_TRANSFORM, transforms=tuple(transforms))


@dataclass(frozen=True)
class ReleaseRequest:
    """The tuple driving every decision: artifact, audience, activity, type."""

    artifact: Iri
    audience: Iri
    activity: Iri
    data_type: Iri | None = None


@dataclass(frozen=True)
class TraceEntry:
    phase: str
    graph: str | None
    lookup: str
    result: str

    def as_dict(self) -> dict[str, str | None]:
        return {"phase": self.phase, "graph": self.graph, "lookup": self.lookup, "result": self.result}


@dataclass
class DecisionRecord:
    """Append-only audit record for one decision."""

    decision_id: str
    request: ReleaseRequest
    verdict: Verdict
    selected_permission: Iri | None = None
    matched_prohibition: Iri | None = None
    unsatisfied_obligations: list[Iri] = field(default_factory=list)
    phase_trace: list[TraceEntry] = field(default_factory=list)
    timestamp: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def as_dict(self) -> dict:
        return {
            "decision_id": self.decision_id,
            "artifact": self.request.artifact.value,
            "audience": self.request.audience.value,
            "activity": self.request.activity.value,
            "data_type": self.request.data_type.value if self.request.data_type else None,
            "verdict": self.verdict.kind.value,
            "transforms": list(self.verdict.transforms),
            "reason": self.verdict.reason,
            "detail": self.verdict.detail,
            "selected_permission": self.selected_permission.value if self.selected_permission else None,
            "matched_prohibition": self.matched_prohibition.value if self.matched_prohibition else None,
            "unsatisfied_obligations": [o.value for o in self.unsatisfied_obligations],
            "trace": [t.as_dict() for t in self.phase_trace],
            "timestamp": self.timestamp.isoformat(),
        }


def infer_data_type(dkg: Dataset, artifact: Iri) -> Iri | None:
    """Abstract data type of an artifact from its RDF types.

    Precedence: PersonalData over Image over any other declared type
    (deterministically the smallest). Returns None when the artifact has no
    type triples, which callers must treat as unresolvable.
    """
    types = sorted(
        {q.object for q in dkg.quads_for(DKG_GRAPH, subject=artifact, predicate=RDF_TYPE) if isinstance(q.object, Iri)},
        key=lambda t: t.value,
    )
    if not types:
        return None
    if IOTREG.PersonalData in types:
        return IOTREG.PersonalData
    if IOTREG.Image in types:
        return IOTREG.Image
    return types[0]


def match_statements(
    pack: PolicyPack, kind: DeonticKind, audience: Iri, activity: Iri, data_type: Iri | None
) -> list[DeonticStatement]:
    """Statements of one kind whose selectors accept the request tuple.

    Unset selectors are wildcards; results sort by priority (highest first)
    then IRI for deterministic selection.
    """
    hits = [s for s in pack.of_kind(kind) if s.matches(audience, activity, data_type)]
    hits.sort(key=lambda s: (-s.priority, s.id.value))
    return hits


def _unsatisfied(dkg: Dataset, artifact: Iri, pack: PolicyPack, permission: DeonticStatement) -> list[DeonticStatement]:
    # Absent-or-false counts as violating: a flag nobody ever set cannot
    # witness obligation satisfaction.
    missing = []
    for oblig in pack.obligations_of(permission):
        if flag_value(dkg, artifact, oblig.checks_flag or "") is not True:
            missing.append(oblig)
    return missing


def decide(
    dkg: Dataset,
    pack: PolicyPack,
    request: ReleaseRequest,
    clock=None,
    ids: IdMinter | None = None,
) -> tuple[Verdict, DecisionRecord]:
    """Evaluate one release request against the policy pack and graph state.

    Never raises and never writes: all evaluation faults map to a Block
    verdict with reason "store_error".
    """
    clock = clock or SystemClock()
    ids = ids or IdMinter()
    record = DecisionRecord(
        decision_id=ids.mint(),
        request=request,
        verdict=block(REASON_STORE_ERROR, "not evaluated"),
        timestamp=clock.now(),
    )
    try:
        verdict = _decide_inner(dkg, pack, request, record)
    except Exception as exc:  # fail closed on any evaluation fault
        verdict = block(REASON_STORE_ERROR, f"evaluation fault: {exc}")
        record.phase_trace.append(TraceEntry("fault", None, "evaluation_fault", str(exc)))
    record.verdict = verdict
    record.phase_trace.append(TraceEntry("verdict", None, "initial_verdict", _verdict_label(verdict)))
    return verdict, record


def _verdict_label(verdict: Verdict) -> str:
    if verdict.kind == VerdictKind.ALLOW_WITH_TRANSFORM:
        return f"Allow-with-Transform [{', '.join(verdict.transforms)}]"
    if verdict.kind == VerdictKind.BLOCK:
        return f"Block ({verdict.reason})"
    return "Allow"


def _decide_inner(dkg: Dataset, pack: PolicyPack, request: ReleaseRequest, record: DecisionRecord) -> Verdict:
    if request.data_type is None:
        record.phase_trace.append(TraceEntry("phase1", "dkg", "data_type", "unresolved"))
        return block(REASON_NOT_FOUND, "data type unresolved")

    # Phase 1: prohibitions, fail fast.
    prohibitions = match_statements(pack, DeonticKind.PROHIBITION, request.audience, request.activity, request.data_type)
    record.phase_trace.append(
        TraceEntry("phase1", "pkg", "prohibition_match", prohibitions[0].id.value if prohibitions else "none")
    )
    if prohibitions:
        record.matched_prohibition = prohibitions[0].id
        return block(REASON_PROHIBITION, f"prohibited by {compact(prohibitions[0].id)}")

    # Phase 2: permissions, fail closed.
    permissions = match_statements(pack, DeonticKind.PERMISSION, request.audience, request.activity, request.data_type)
    if not permissions:
        record.phase_trace.append(TraceEntry("phase2", "pkg", "permission_match", "none"))
        if request.audience not in pack.known_recipients:
            return block(REASON_AUDIENCE_UNKNOWN, f"audience {compact(request.audience)} is not a known recipient")
        return block(REASON_NO_PERMISSION, "no permission matches the request")

    # Phase 3: select the highest-priority permission; ties prefer fewer
    # unsatisfied obligations, then the smallest IRI.
    scored = [(p, _unsatisfied(dkg, request.artifact, pack, p)) for p in permissions]
    scored.sort(key=lambda item: (-item[0].priority, len(item[1]), item[0].id.value))
    selected, missing = scored[0]
    record.selected_permission = selected.id
    record.unsatisfied_obligations = [o.id for o in missing]
    record.phase_trace.append(TraceEntry("phase2", "pkg", "permission_match", selected.id.value))

    transforms: list[str] = []
    for oblig in pack.obligations_of(selected):
        record.phase_trace.append(TraceEntry("phase3", "pkg", "attached_obligation", oblig.id.value))
        record.phase_trace.append(TraceEntry("phase3", "pkg", "checks_flag", oblig.checks_flag or ""))
        value = flag_value(dkg, request.artifact, oblig.checks_flag or "")
        label = "absent" if value is None else ("true" if value else "false")
        record.phase_trace.append(TraceEntry("phase3", "dkg", "flag_satisfied", label))
        if value is True:
            continue
        if oblig.requires_transform:
            for name in oblig.requires_transform:
                if name not in transforms:
                    transforms.append(name)
            record.phase_trace.append(
                TraceEntry("phase3", "pkg", "requires_transform", ", ".join(oblig.requires_transform))
            )
        else:
            # Alg. phase 3: an unsatisfied obligation with no mapped
            # transform makes the permission unusable.
            record.phase_trace.append(TraceEntry("phase3", "pkg", "requires_transform", "none"))
            return block(REASON_NO_PERMISSION, f"obligation unsatisfiable: {compact(oblig.id)}")

    # Phase 4: final verdict.
    if not transforms:
        return allow()
    return allow_with_transform(transforms)
