"""Typed view over the policy graph: deontic statements and the policy pack.

A pack is immutable after load. Obligation lists and transform lists keep
the order in which they appear in the pack file, because the decision
engine emits transforms in obligation-declaration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .rdf import Iri, Literal, Quad, XSD_INTEGER, parse_policy_text
from .vocab import IOTREG, POLICYEXT, PROV, RDF_TYPE


class DeonticKind(Enum):
    PERMISSION = "Permission"
    OBLIGATION = "Obligation"
    PROHIBITION = "Prohibition"


_KIND_BY_CLASS = {
    IOTREG.Permission: DeonticKind.PERMISSION,
    IOTREG.Obligation: DeonticKind.OBLIGATION,
    IOTREG.Prohibition: DeonticKind.PROHIBITION,
}


class PackValidationError(ValueError):
    """The policy pack violates a structural invariant."""


@dataclass(frozen=True)
class DeonticStatement:
    """One permission, obligation or prohibition with its selectors.

    Unset selectors act as wildcards during matching.
    """

    id: Iri
    kind: DeonticKind
    recipient: Iri | None = None
    activity: Iri | None = None
    data_type: Iri | None = None
    obligations: tuple[Iri, ...] = ()
    checks_flag: str | None = None
    requires_transform: tuple[str, ...] = ()
    source_clause: Iri | None = None
    priority: int = 0

    def matches(self, recipient: Iri, activity: Iri, data_type: Iri | None) -> bool:
        """Selector semantics: each set selector must equal the request value."""
        if self.recipient is not None and self.recipient != recipient:
            return False
        if self.activity is not None and self.activity != activity:
            return False
        if self.data_type is not None and self.data_type != data_type:
            return False
        return True


@dataclass(frozen=True)
class PolicyPack:
    """Immutable bundle of deontic statements plus their raw graph form."""

    statements: tuple[DeonticStatement, ...]
    controller: Iri | None
    policy_root: Iri | None
    known_recipients: frozenset[Iri]
    quads: tuple[Quad, ...] = field(repr=False, default=())

    def by_id(self, statement_id: Iri) -> DeonticStatement | None:
        for stmt in self.statements:
            if stmt.id == statement_id:
                return stmt
        return None

    def of_kind(self, kind: DeonticKind) -> list[DeonticStatement]:
        return [s for s in self.statements if s.kind == kind]

    def obligations_of(self, permission: DeonticStatement) -> list[DeonticStatement]:
        found = []
        for oblig_id in permission.obligations:
            stmt = self.by_id(oblig_id)
            if stmt is not None:
                found.append(stmt)
        return found

    @staticmethod
    def empty() -> "PolicyPack":
        return PolicyPack((), None, None, frozenset(), ())


def _object_iris(quads: list[Quad], subject: Iri, predicate: Iri) -> list[Iri]:
    return [q.object for q in quads if q.subject == subject and q.predicate == predicate and isinstance(q.object, Iri)]


def _object_literals(quads: list[Quad], subject: Iri, predicate: Iri) -> list[Literal]:
    return [q.object for q in quads if q.subject == subject and q.predicate == predicate and isinstance(q.object, Literal)]


def _first(values: list, what: str, subject: Iri, required: bool = False):
    if len(values) > 1:
        raise PackValidationError(f"{subject.value}: more than one {what}")
    if not values:
        if required:
            raise PackValidationError(f"{subject.value}: missing {what}")
        return None
    return values[0]


def build_policy_pack(quads: list[Quad], registered_transforms: frozenset[str]) -> PolicyPack:
    """Assemble and validate the typed pack from parsed quads (file order)."""
    deontic_ids: list[Iri] = []
    kinds: dict[Iri, DeonticKind] = {}
    for q in quads:
        if q.predicate == RDF_TYPE and isinstance(q.object, Iri) and isinstance(q.subject, Iri):
            kind = _KIND_BY_CLASS.get(q.object)
            if kind is not None and q.subject not in kinds:
                kinds[q.subject] = kind
                deontic_ids.append(q.subject)

    statements: list[DeonticStatement] = []
    for sid in deontic_ids:
        kind = kinds[sid]
        recipient = _first(_object_iris(quads, sid, IOTREG.hasRecipient), "recipient", sid)
        activity = _first(_object_iris(quads, sid, IOTREG.concernsActivity), "activity", sid)
        data_type = _first(_object_iris(quads, sid, POLICYEXT.concernsData), "data type", sid)
        source = _first(_object_iris(quads, sid, PROV.wasDerivedFrom), "source clause", sid)
        obligations = tuple(_object_iris(quads, sid, IOTREG.hasObligation))
        flags = [l.lexical for l in _object_literals(quads, sid, POLICYEXT.checksFlag)]
        transforms = tuple(l.lexical for l in _object_literals(quads, sid, POLICYEXT.requiresTransform))
        priority_lit = _first(_object_literals(quads, sid, POLICYEXT.hasPriority), "priority", sid)
        priority = 0
        if priority_lit is not None:
            if priority_lit.datatype != XSD_INTEGER:
                raise PackValidationError(f"{sid.value}: priority must be an integer literal")
            priority = int(priority_lit.lexical)

        if kind == DeonticKind.OBLIGATION:
            if len(flags) != 1:
                raise PackValidationError(f"{sid.value}: an obligation needs exactly one checksFlag")
            checks_flag = flags[0]
        else:
            if flags or transforms:
                raise PackValidationError(f"{sid.value}: only obligations may bind flags or transforms")
            checks_flag = None
        if kind != DeonticKind.PERMISSION and obligations:
            raise PackValidationError(f"{sid.value}: only permissions may attach obligations")
        for name in transforms:
            if name not in registered_transforms:
                raise PackValidationError(f"{sid.value}: unregistered transform {name!r}")

        statements.append(
            DeonticStatement(
                id=sid,
                kind=kind,
                recipient=recipient,
                activity=activity,
                data_type=data_type,
                obligations=obligations,
                checks_flag=checks_flag,
                requires_transform=transforms,
                source_clause=source,
                priority=priority,
            )
        )

    by_id = {s.id: s for s in statements}
    for stmt in statements:
        for oblig_id in stmt.obligations:
            target = by_id.get(oblig_id)
            if target is None or target.kind != DeonticKind.OBLIGATION:
                raise PackValidationError(f"{stmt.id.value}: hasObligation target {oblig_id.value} is not an obligation")

    controller = None
    policy_root = None
    recipients: set[Iri] = set()
    for q in quads:
        if q.predicate == RDF_TYPE and isinstance(q.subject, Iri):
            if q.object == IOTREG.Controller and controller is None:
                controller = q.subject
            elif q.object == IOTREG.Recipient:
                recipients.add(q.subject)
        if q.predicate in (IOTREG.hasPermission, IOTREG.hasProhibition) and isinstance(q.subject, Iri):
            policy_root = policy_root or q.subject

    return PolicyPack(
        statements=tuple(statements),
        controller=controller,
        policy_root=policy_root,
        known_recipients=frozenset(recipients),
        quads=tuple(quads),
    )


def load_policy_pack(source: str | bytes | Path, graph: Iri, registered_transforms: frozenset[str] | None = None) -> PolicyPack:
    """Load a pack from a file path or raw text (N-Triples or Turtle subset)."""
    if registered_transforms is None:
        from .transforms import registered_transform_names

        registered_transforms = registered_transform_names()
    if isinstance(source, Path):
        text: str | bytes = source.read_bytes()
    else:
        text = source
    quads = parse_policy_text(text, graph)
    return build_policy_pack(quads, registered_transforms)
