"""Release decision runner: packet intake, transform execution, artifact
derivation with provenance, post-transform verification and incident hooks.

Originals in the disaster graph are never mutated; every transform run
yields a new provenance-linked individual, and the runner re-checks the
derived artifact before anything is released.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from .clocks import IdMinter, SystemClock, isoformat_utc
from .decision import (
    REASON_MALFORMED,
    REASON_NOT_FOUND,
    REASON_STORE_ERROR,
    REASON_TRANSFORM_FAILED,
    DecisionRecord,
    ReleaseRequest,
    TraceEntry,
    Verdict,
    VerdictKind,
    allow,
    block,
    decide,
)
from .incidents import Incident, log_incident
from .policy import PolicyPack
from .rdf import Dataset, DKG_GRAPH, Iri, Quad, TermError, lit, lit_bool, lit_datetime
from .transforms import TransformContext, run_pipeline
from .vocab import DM, IOTREG, PROV, RDF_TYPE, VocabError, expand, local_name


class PacketError(ValueError):
    """The request packet is not usable (bad JSON shape or fields)."""


class FileMissing(Exception):
    """The artifact file could not be resolved to a local copy."""


@dataclass(frozen=True)
class RequestPacket:
    """JSON release request; the runtime counterpart of the request tuple."""

    artifact_uri: str
    audience: str
    activity: str
    data_type: str | None = None
    file_url: str | None = None

    @staticmethod
    def from_json(obj: object) -> "RequestPacket":
        if isinstance(obj, (str, bytes)):
            try:
                obj = json.loads(obj)
            except json.JSONDecodeError as exc:
                raise PacketError(f"packet is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise PacketError("packet must be a JSON object")
        artifact = obj.get("artifact_uri")
        if not isinstance(artifact, str) or not artifact.strip():
            raise PacketError("artifact_uri must be a non-empty string")
        for key in ("audience", "activity"):
            if not isinstance(obj.get(key), str) or not obj[key].strip():
                raise PacketError(f"{key} must be a non-empty string")
        for key in ("data_type", "file_url"):
            if obj.get(key) is not None and not isinstance(obj[key], str):
                raise PacketError(f"{key} must be a string when present")
        return RequestPacket(
            artifact_uri=artifact,
            audience=obj["audience"],
            activity=obj["activity"],
            data_type=obj.get("data_type"),
            file_url=obj.get("file_url"),
        )


@dataclass(frozen=True)
class DerivedArtifact:
    uri: Iri
    kind: str  # "anonymized" | "encrypted"
    derived_from: Iri
    generated_at: str
    transformed_by: str
    applied_transforms: tuple[str, ...]
    file_url: str
    encryption_method: str | None = None

    def quads(self) -> list[Quad]:
        g = DKG_GRAPH
        out = [Quad(self.uri, RDF_TYPE, IOTREG.Image, g)]
        if self.kind == "encrypted":
            out += [
                Quad(self.uri, RDF_TYPE, IOTREG.PersonalData, g),
                Quad(self.uri, DM.containsPII, lit_bool(True), g),
                Quad(self.uri, IOTREG.isEncrypted, lit_bool(True), g),
            ]
            if self.encryption_method:
                out.append(Quad(self.uri, IOTREG.usesEncryptionMethod, lit(self.encryption_method), g))
        else:
            out += [
                Quad(self.uri, RDF_TYPE, IOTREG.FeatureOfInterest, g),
                Quad(self.uri, DM.containsPII, lit_bool(False), g),
                Quad(self.uri, DM.isRetained, lit_bool(True), g),
                Quad(self.uri, IOTREG.isAnonymized, lit_bool(True), g),
                Quad(self.uri, IOTREG.isEncrypted, lit_bool(False), g),
            ]
        out += [
            Quad(self.uri, PROV.wasDerivedFrom, self.derived_from, g),
            Quad(self.uri, PROV.generatedAtTime, lit_datetime(self.generated_at), g),
            Quad(self.uri, DM.transformedBy, lit(self.transformed_by), g),
            Quad(self.uri, DM.appliedTransforms, lit(",".join(self.applied_transforms)), g),
            Quad(self.uri, DM.fileUrl, lit(self.file_url), g),
        ]
        return out


@dataclass
class RunnerConfig:
    staging_dir: Path
    derived_dir: Path
    key_dir: Path
    decision_log: Path | None = None


@dataclass
class ReleaseOutcome:
    final_verdict: Verdict
    initial_verdict: Verdict | None = None
    approved_artifact: Iri | None = None
    derived_artifact: Iri | None = None
    applied_transforms: list[str] = field(default_factory=list)
    decision_ids: list[str] = field(default_factory=list)
    incident: Incident | None = None
    records: list[DecisionRecord] = field(default_factory=list)
    trace: list[TraceEntry] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "final_verdict": self.final_verdict.kind.value,
            "initial_verdict": self.initial_verdict.kind.value if self.initial_verdict else None,
            "transforms": list(self.initial_verdict.transforms) if self.initial_verdict else [],
            "applied_transforms": list(self.applied_transforms),
            "reason": self.final_verdict.reason,
            "detail": self.final_verdict.detail,
            "approved_artifact": self.approved_artifact.value if self.approved_artifact else None,
            "derived_artifact": self.derived_artifact.value if self.derived_artifact else None,
            "decision_ids": list(self.decision_ids),
            "incident": self.incident.uri.value if self.incident else None,
            "incident_category": self.incident.category if self.incident else None,
            "trace": [t.as_dict() for t in self.trace],
        }


def resolve_file(packet: RequestPacket, staging_dir: Path) -> Path:
    """Copy the packet's file into the staging directory.

    Accepts plain local paths and file:// URLs; anything unreachable raises
    FileMissing.
    """
    if not packet.file_url:
        raise FileMissing("packet carries no file_url")
    raw = packet.file_url
    if raw.startswith("file://"):
        raw = raw[len("file://") :]
    elif "://" in raw:
        raise FileMissing(f"unsupported file scheme: {packet.file_url}")
    source = Path(raw)
    if not source.is_file():
        raise FileMissing(f"file not found: {source}")
    staging_dir.mkdir(parents=True, exist_ok=True)
    target = staging_dir / source.name
    shutil.copyfile(source, target)
    return target


def insert_derived(dkg: Dataset, original: Iri, derived: DerivedArtifact):
    """Insert the derived artifact's triples in one transaction.

    Rejects unknown originals and derived URIs that already exist: a
    collision means the caller should have reused the existing derivation.
    """
    if next(iter(dkg.quads_for(DKG_GRAPH, subject=original)), None) is None:
        raise ValueError(f"original artifact not in DKG: {original.value}")
    if next(iter(dkg.quads_for(DKG_GRAPH, subject=derived.uri)), None) is not None:
        raise ValueError(f"derived URI already exists: {derived.uri.value}")
    return dkg.insert(derived.quads())


class ReleaseRunner:
    """Executes release packets end to end against one store and pack."""

    def __init__(
        self,
        dkg: Dataset,
        pack: PolicyPack,
        config: RunnerConfig,
        clock=None,
        ids: IdMinter | None = None,
    ):
        self.dkg = dkg
        self.pack = pack
        self.config = config
        self.clock = clock or SystemClock()
        self.ids = ids or IdMinter()

    # -- helpers -------------------------------------------------------------

    def _log_record(self, record: DecisionRecord) -> None:
        if self.config.decision_log is None:
            return
        self.config.decision_log.parent.mkdir(parents=True, exist_ok=True)
        with self.config.decision_log.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.as_dict(), sort_keys=True) + "\n")

    def _blocked(
        self,
        outcome: ReleaseOutcome,
        request: ReleaseRequest | None,
        verdict: Verdict,
    ) -> ReleaseOutcome:
        outcome.final_verdict = verdict
        if request is not None:
            outcome.incident = log_incident(self.dkg, request, verdict, verdict.reason or "", self.clock, self.ids)
        outcome.trace.append(TraceEntry("final", None, "final_verdict", f"Block ({verdict.reason})"))
        return outcome

    def _decide(self, request: ReleaseRequest, outcome: ReleaseOutcome) -> Verdict:
        verdict, record = decide(self.dkg, self.pack, request, self.clock, self.ids)
        outcome.records.append(record)
        outcome.decision_ids.append(record.decision_id)
        outcome.trace.extend(record.phase_trace)
        self._log_record(record)
        return verdict

    # -- main entry ------------------------------------------------------------

    def run(self, packet: RequestPacket) -> ReleaseOutcome:
        outcome = ReleaseOutcome(final_verdict=block(REASON_STORE_ERROR, "not evaluated"))
        try:
            return self._run_inner(packet, outcome)
        except Exception as exc:  # no fault may escape as a crash
            return self._blocked(outcome, None, block(REASON_STORE_ERROR, f"runner fault: {exc}"))

    def _run_inner(self, packet: RequestPacket, outcome: ReleaseOutcome) -> ReleaseOutcome:
        claimed_type = None
        if packet.data_type:
            try:
                claimed_type = expand(packet.data_type)
            except (VocabError, TermError) as exc:
                raise PacketError(f"bad data_type: {exc}") from exc
        try:
            audience = expand(packet.audience)
            activity = expand(packet.activity)
        except (VocabError, TermError) as exc:
            raise PacketError(f"bad audience/activity: {exc}") from exc

        # Artifact IRI validation happens before any policy phase.
        try:
            artifact = Iri(packet.artifact_uri)
        except TermError:
            placeholder = Iri("urn:invalid-artifact:" + hashlib.sha1(packet.artifact_uri.encode()).hexdigest()[:16])
            request = ReleaseRequest(placeholder, audience, activity, claimed_type)
            outcome.trace.append(TraceEntry("phase0", None, "validate_uri", "malformed"))
            return self._blocked(outcome, request, block(REASON_MALFORMED, f"malformed artifact URI: {packet.artifact_uri!r}"))

        # The artifact must already exist in the disaster graph.
        if next(iter(self.dkg.quads_for(DKG_GRAPH, subject=artifact)), None) is None:
            request = ReleaseRequest(artifact, audience, activity, claimed_type)
            outcome.trace.append(TraceEntry("phase0", "dkg", "artifact_lookup", "absent"))
            return self._blocked(outcome, request, block(REASON_NOT_FOUND, f"artifact not in DKG: {artifact.value}"))

        from .decision import infer_data_type

        data_type = claimed_type or infer_data_type(self.dkg, artifact)
        if data_type is None:
            request = ReleaseRequest(artifact, audience, activity, claimed_type)
            outcome.trace.append(TraceEntry("phase0", "dkg", "data_type", "unresolvable"))
            return self._blocked(outcome, request, block(REASON_NOT_FOUND, "artifact has no resolvable data type"))

        request = ReleaseRequest(artifact, audience, activity, data_type)
        verdict = self._decide(request, outcome)
        outcome.initial_verdict = verdict

        if verdict.kind == VerdictKind.ALLOW:
            outcome.final_verdict = verdict
            outcome.approved_artifact = artifact
            outcome.trace.append(TraceEntry("final", None, "final_verdict", f"Allow - release {artifact.value}"))
            return outcome
        if verdict.kind == VerdictKind.BLOCK:
            return self._blocked(outcome, request, verdict)

        return self._apply_transforms(packet, request, verdict, outcome)

    # -- transform path -----------------------------------------------------

    def _apply_transforms(
        self,
        packet: RequestPacket,
        request: ReleaseRequest,
        verdict: Verdict,
        outcome: ReleaseOutcome,
    ) -> ReleaseOutcome:
        transforms = list(verdict.transforms)
        kind = "encrypted" if "encrypt_file" in transforms else "anonymized"
        derived_uri = Iri(request.artifact.value + f"_{kind}")
        recheck_type = IOTREG.PersonalData if kind == "encrypted" else IOTREG.Image

        # Idempotency: a previous run may already have derived this artifact.
        if next(iter(self.dkg.quads_for(DKG_GRAPH, subject=derived_uri)), None) is not None:
            outcome.trace.append(TraceEntry("enforce", "dkg", "derived_exists", derived_uri.value))
            recheck = self._decide(ReleaseRequest(derived_uri, request.audience, request.activity, recheck_type), outcome)
            if recheck.kind == VerdictKind.ALLOW:
                outcome.final_verdict = allow()
                outcome.approved_artifact = derived_uri
                outcome.trace.append(TraceEntry("final", None, "final_verdict", f"Allow - release {derived_uri.value}"))
                return outcome
            return self._blocked(
                outcome, request, block(REASON_TRANSFORM_FAILED, "existing derived artifact fails re-verification")
            )

        try:
            staged = resolve_file(packet, self.config.staging_dir)
        except FileMissing as exc:
            outcome.trace.append(TraceEntry("enforce", None, "resolve_file", "missing"))
            return self._blocked(outcome, request, block(REASON_TRANSFORM_FAILED, f"file unavailable: {exc}"))

        ctx = TransformContext(key_dir=self.config.key_dir, artifact_id=local_name(request.artifact))
        result = run_pipeline(transforms, staged, ctx)
        scratch = [staged] + [step.output_path for _, step in result.steps if step.output_path is not None]
        if not result.success or result.final_path is None:
            failed = next((name for name, step in result.steps if not step.success), transforms[0])
            detail = next((step.metadata.get("error", "") for _, step in result.steps if not step.success), "")
            outcome.trace.append(TraceEntry("enforce", None, f"invoke_{failed}", "failed"))
            self._cleanup(scratch)
            return self._blocked(outcome, request, block(REASON_TRANSFORM_FAILED, f"{failed} failed: {detail}"))
        for name, _ in result.steps:
            outcome.trace.append(TraceEntry("enforce", None, f"invoke_{name}", "ok"))

        encryption_method = None
        for _, step in result.steps:
            if "scheme" in step.metadata:
                encryption_method = step.metadata["scheme"]

        final_path = self.config.derived_dir / result.final_path.name
        derived = DerivedArtifact(
            uri=derived_uri,
            kind=kind,
            derived_from=request.artifact,
            generated_at=isoformat_utc(self.clock.now()),
            transformed_by=outcome.decision_ids[0],
            applied_transforms=tuple(transforms),
            file_url=str(final_path),
            encryption_method=encryption_method,
        )
        try:
            insert_derived(self.dkg, request.artifact, derived)
        except Exception as exc:
            self._cleanup(scratch)
            return self._blocked(outcome, request, block(REASON_STORE_ERROR, f"derived insert failed: {exc}"))
        outcome.derived_artifact = derived_uri
        outcome.trace.append(TraceEntry("enforce", "dkg", "insert_derived", derived_uri.value))

        recheck = self._decide(ReleaseRequest(derived_uri, request.audience, request.activity, recheck_type), outcome)
        if recheck.kind != VerdictKind.ALLOW or recheck.transforms:
            outcome.trace.append(TraceEntry("enforce", "dkg", "re_verify", "failed"))
            self._cleanup(scratch)
            return self._blocked(outcome, request, block(REASON_TRANSFORM_FAILED, "re-verification of derived artifact failed"))
        outcome.trace.append(TraceEntry("enforce", "dkg", "re_verify", "satisfied"))

        self.config.derived_dir.mkdir(parents=True, exist_ok=True)
        shutil.move(str(result.final_path), final_path)
        self._cleanup([p for p in scratch if p != result.final_path])

        outcome.applied_transforms = list(transforms)
        outcome.final_verdict = allow()
        outcome.approved_artifact = derived_uri
        outcome.trace.append(TraceEntry("final", None, "final_verdict", f"Allow - release {derived_uri.value}"))
        return outcome

    @staticmethod
    def _cleanup(paths: list[Path]) -> None:
        # Nothing stays in staging after a run, success or failure.
        for path in paths:
            path.unlink(missing_ok=True)


def run_release(
    dkg: Dataset,
    pack: PolicyPack,
    packet: RequestPacket,
    config: RunnerConfig,
    clock=None,
    ids: IdMinter | None = None,
) -> ReleaseOutcome:
    return ReleaseRunner(dkg, pack, config, clock, ids).run(packet)
