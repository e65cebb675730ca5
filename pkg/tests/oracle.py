"""Brute-force decision oracle and randomized instance generator.

The oracle re-derives the verdict by linear scans over every statement and
every quad, sharing no evaluation code with the engine: selector matching,
permission selection and obligation checks are reimplemented from the rule
text. Tests compare `decide` against it across randomized instances.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from graphgate.decision import ReleaseRequest
from graphgate.policy import DeonticKind, DeonticStatement, PolicyPack
from graphgate.rdf import Dataset, DKG_GRAPH, Iri, Literal, Quad, XSD_BOOLEAN, lit_bool
from graphgate.vocab import DM, FLAG_PROPERTIES, IOTREG, RDF_TYPE

EX = "http://test.example/"

AUDIENCES = [Iri(EX + f"aud/{n}") for n in ("alpha", "beta", "gamma", "delta")]
ACTIVITIES = [Iri(EX + "act/share"), Iri(EX + "act/process")]
DATA_TYPES = [IOTREG.PersonalData, IOTREG.Image, IOTREG.FeatureOfInterest]
FLAG_NAMES = list(FLAG_PROPERTIES) + ["policy-ext:unknownFlag"]
TRANSFORM_CHOICES = [(), ("strip_exif",), ("encrypt_file",), ("strip_exif", "encrypt_file")]


def _scan_flag(dkg: Dataset, artifact: Iri, flag_name: str) -> bool | None:
    prop = FLAG_PROPERTIES.get(flag_name)
    if prop is None:
        return None
    for quad in dkg.graph(DKG_GRAPH):  # deliberate linear scan
        if quad.subject == artifact and quad.predicate == prop:
            obj = quad.object
            if isinstance(obj, Literal) and obj.datatype == XSD_BOOLEAN:
                return obj.lexical == "true"
    return None


def _selector_match(stmt: DeonticStatement, request: ReleaseRequest) -> bool:
    if stmt.recipient is not None and stmt.recipient != request.audience:
        return False
    if stmt.activity is not None and stmt.activity != request.activity:
        return False
    if stmt.data_type is not None and stmt.data_type != request.data_type:
        return False
    return True


def oracle_decide(dkg: Dataset, pack: PolicyPack, request: ReleaseRequest) -> tuple[str, tuple[str, ...]]:
    """Reference verdict: (kind name, ordered transform tuple)."""
    statements = list(pack.statements)
    if any(s.kind == DeonticKind.PROHIBITION and _selector_match(s, request) for s in statements):
        return ("Block", ())
    permissions = [s for s in statements if s.kind == DeonticKind.PERMISSION and _selector_match(s, request)]
    if not permissions:
        return ("Block", ())

    by_id = {s.id: s for s in statements}

    def unsatisfied_count(perm: DeonticStatement) -> int:
        count = 0
        for oblig_id in perm.obligations:
            oblig = by_id.get(oblig_id)
            if oblig is None:
                continue
            if _scan_flag(dkg, request.artifact, oblig.checks_flag or "") is not True:
                count += 1
        return count

    selected = min(permissions, key=lambda p: (-p.priority, unsatisfied_count(p), p.id.value))
    transforms: list[str] = []
    for oblig_id in selected.obligations:
        oblig = by_id.get(oblig_id)
        if oblig is None:
            continue
        if _scan_flag(dkg, request.artifact, oblig.checks_flag or "") is True:
            continue
        if not oblig.requires_transform:
            return ("Block", ())
        for name in oblig.requires_transform:
            if name not in transforms:
                transforms.append(name)
    if not transforms:
        return ("Allow", ())
    return ("Allow-with-Transform", tuple(transforms))


@dataclass
class Instance:
    dkg: Dataset
    pack: PolicyPack
    request: ReleaseRequest


def random_instance(rng: random.Random) -> Instance:
    """One randomized (pack, graph state, request) triple."""
    obligations: list[DeonticStatement] = []
    for i in range(rng.randint(0, 4)):
        obligations.append(
            DeonticStatement(
                id=Iri(EX + f"oblig/{i}"),
                kind=DeonticKind.OBLIGATION,
                checks_flag=rng.choice(FLAG_NAMES),
                requires_transform=rng.choice(TRANSFORM_CHOICES),
            )
        )

    def maybe(pool):
        return rng.choice(pool) if rng.random() > 0.25 else None

    statements: list[DeonticStatement] = list(obligations)
    for i in range(rng.randint(0, 5)):
        statements.append(
            DeonticStatement(
                id=Iri(EX + f"perm/{i}"),
                kind=DeonticKind.PERMISSION,
                recipient=maybe(AUDIENCES),
                activity=maybe(ACTIVITIES),
                data_type=maybe(DATA_TYPES),
                obligations=tuple(o.id for o in rng.sample(obligations, rng.randint(0, len(obligations)))),
                priority=rng.randint(0, 3),
            )
        )
    for i in range(rng.randint(0, 3)):
        statements.append(
            DeonticStatement(
                id=Iri(EX + f"proh/{i}"),
                kind=DeonticKind.PROHIBITION,
                recipient=maybe(AUDIENCES),
                activity=maybe(ACTIVITIES),
                data_type=maybe(DATA_TYPES),
                priority=rng.randint(0, 3),
            )
        )
    pack = PolicyPack(
        statements=tuple(statements),
        controller=None,
        policy_root=None,
        known_recipients=frozenset(AUDIENCES[:3]),
    )

    artifact = Iri(EX + f"artifact/{rng.randint(0, 5)}")
    dkg = Dataset()
    quads = [Quad(artifact, RDF_TYPE, rng.choice(DATA_TYPES), DKG_GRAPH)]
    for flag_name, prop in FLAG_PROPERTIES.items():
        roll = rng.random()
        if roll < 0.4:
            quads.append(Quad(artifact, prop, lit_bool(roll < 0.2), DKG_GRAPH))
    quads.append(Quad(artifact, DM.fileUrl, _url(rng), DKG_GRAPH))
    dkg.insert(quads)

    request = ReleaseRequest(
        artifact=artifact,
        audience=rng.choice(AUDIENCES),
        activity=rng.choice(ACTIVITIES),
        data_type=rng.choice(DATA_TYPES),
    )
    return Instance(dkg=dkg, pack=pack, request=request)


def _url(rng: random.Random):
    from graphgate.rdf import lit

    return lit(f"files/{rng.randint(0, 999):03d}.bin")
