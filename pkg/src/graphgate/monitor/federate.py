"""Client-side federation over the two graph endpoints.

The mediator never sees store internals: it issues pattern queries against
a DKG endpoint and a PKG endpoint and joins locally. Two plans exist for
every federated template: "pkg_first" queries the small policy graph first
and pushes the discovered flag properties into the disaster-graph lookups;
"naive" fetches both full result sets (including an unpushed whole-graph
property scan) and joins by nested loop. Both return identical row sets.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from dataclasses import dataclass, field

from ..rdf import Binding, Dataset, Filter, Iri, Literal, Var, match, pattern
from ..vocab import IOTREG, POLICYEXT, RDF_TYPE, compact, expand
from .wire import bindings_from_json, filter_to_json, triples_to_json


class EndpointError(Exception):
    """A graph endpoint could not be queried."""


class FederationError(Exception):
    """A federated run failed; no partial rows are returned."""


class LocalEndpoint:
    """Direct in-process endpoint over one named graph."""

    def __init__(self, store: Dataset, graph: Iri):
        self.store = store
        self.graph = graph

    def query(self, triples: list[tuple], filters: list[Filter] | None = None, limit: int | None = None) -> list[Binding]:
        rows = match(self.store, pattern(self.graph, triples, filters or []))
        return rows[:limit] if limit is not None else rows


class HttpEndpoint:
    """Remote endpoint speaking the JSON pattern wire format."""

    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def query(self, triples: list[tuple], filters: list[Filter] | None = None, limit: int | None = None) -> list[Binding]:
        body = {"pattern": triples_to_json(triples), "filters": [filter_to_json(f) for f in filters or []]}
        if limit is not None:
            body["limit"] = limit
        data = json.dumps(body).encode("utf-8")
        request = urllib.request.Request(
            f"{self.base_url}/query", data=data, headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            raise EndpointError(f"endpoint {self.base_url} failed: {exc}") from exc
        return bindings_from_json(payload.get("bindings", []))


# --- policy rule rows -------------------------------------------------------------


@dataclass(frozen=True)
class PermissionRow:
    permission: Iri
    recipient: Iri | None
    data_type: Iri | None
    priority: int
    obligations: tuple[Iri, ...]


@dataclass(frozen=True)
class ObligationRow:
    obligation: Iri
    flag_name: str
    transforms: tuple[str, ...]


@dataclass(frozen=True)
class ProhibitionRow:
    prohibition: Iri
    recipient: Iri | None
    activity: Iri | None
    data_type: Iri | None


@dataclass(frozen=True)
class RuleRows:
    permissions: tuple[PermissionRow, ...]
    obligations: dict[Iri, ObligationRow] = field(default_factory=dict)
    prohibitions: tuple[ProhibitionRow, ...] = ()

    def flag_names(self) -> list[str]:
        return sorted({o.flag_name for o in self.obligations.values()})


def fetch_rule_rows(pkg) -> RuleRows:
    """Rebuild permission/obligation/prohibition rows from pattern queries."""
    s, o_ = Var("s"), Var("o")
    recips = {b["s"]: b["o"] for b in pkg.query([(s, IOTREG.hasRecipient, o_)])}
    dtypes = {b["s"]: b["o"] for b in pkg.query([(s, POLICYEXT.concernsData, o_)])}
    acts = {b["s"]: b["o"] for b in pkg.query([(s, IOTREG.concernsActivity, o_)])}
    priorities = {b["s"]: int(b["o"].lexical) for b in pkg.query([(s, POLICYEXT.hasPriority, o_)]) if isinstance(b["o"], Literal)}
    oblig_links: dict[Iri, list[Iri]] = {}
    for b in pkg.query([(s, IOTREG.hasObligation, o_)]):
        if isinstance(b["s"], Iri) and isinstance(b["o"], Iri):
            oblig_links.setdefault(b["s"], []).append(b["o"])
    for targets in oblig_links.values():
        targets.sort(key=lambda i: i.value)

    permissions = []
    for b in pkg.query([(s, RDF_TYPE, IOTREG.Permission)]):
        perm = b["s"]
        if not isinstance(perm, Iri):
            continue
        permissions.append(
            PermissionRow(
                permission=perm,
                recipient=recips.get(perm) if isinstance(recips.get(perm), Iri) else None,
                data_type=dtypes.get(perm) if isinstance(dtypes.get(perm), Iri) else None,
                priority=priorities.get(perm, 0),
                obligations=tuple(oblig_links.get(perm, [])),
            )
        )
    permissions.sort(key=lambda p: p.permission.value)

    flags = {b["s"]: b["o"].lexical for b in pkg.query([(s, POLICYEXT.checksFlag, o_)]) if isinstance(b["o"], Literal)}
    transforms: dict[Iri, list[str]] = {}
    for b in pkg.query([(s, POLICYEXT.requiresTransform, o_)]):
        if isinstance(b["o"], Literal):
            transforms.setdefault(b["s"], []).append(b["o"].lexical)
    obligations = {}
    for b in pkg.query([(s, RDF_TYPE, IOTREG.Obligation)]):
        oblig = b["s"]
        if isinstance(oblig, Iri) and oblig in flags:
            obligations[oblig] = ObligationRow(oblig, flags[oblig], tuple(sorted(transforms.get(oblig, []))))

    prohibitions = []
    for b in pkg.query([(s, RDF_TYPE, IOTREG.Prohibition)]):
        proh = b["s"]
        if not isinstance(proh, Iri):
            continue
        prohibitions.append(
            ProhibitionRow(
                prohibition=proh,
                recipient=recips.get(proh) if isinstance(recips.get(proh), Iri) else None,
                activity=acts.get(proh) if isinstance(acts.get(proh), Iri) else None,
                data_type=dtypes.get(proh) if isinstance(dtypes.get(proh), Iri) else None,
            )
        )
    prohibitions.sort(key=lambda p: p.prohibition.value)

    return RuleRows(tuple(permissions), obligations, tuple(prohibitions))


# --- artifact state fetch, pushed vs unpushed ---------------------------------------


@dataclass(frozen=True)
class ArtifactState:
    """Flags and types for the artifacts touched by one federated run."""

    types: dict[Iri, frozenset[Iri]]
    flags: dict[tuple[Iri, str], bool]

    def flag(self, subject: Iri, flag_name: str) -> bool | None:
        return self.flags.get((subject, flag_name))


def fetch_state_pushed(dkg, subjects_pattern: list[tuple], flag_names: list[str], subject: Iri | None = None) -> ArtifactState:
    """Pre-filtered fetch: flag lookups push both the property named by the
    rules and the boolean value, so every query is index-backed. A concrete
    `subject` (when the template binds one) restricts the fetch further."""
    from ..rdf import lit_bool

    types: dict[Iri, set[Iri]] = {}
    type_pattern = [(subject, RDF_TYPE, Var("t"))] if subject is not None else subjects_pattern + [(Var("s"), RDF_TYPE, Var("t"))]
    for b in dkg.query(type_pattern):
        key = subject if subject is not None else b["s"]
        if isinstance(key, Iri) and isinstance(b["t"], Iri):
            types.setdefault(key, set()).add(b["t"])
    flags: dict[tuple[Iri, str], bool] = {}
    for name in flag_names:
        try:
            prop = expand(name)
        except Exception:
            continue
        for value in (True, False):
            holder = subject if subject is not None else Var("s")
            for b in dkg.query([(holder, prop, lit_bool(value))]):
                key = subject if subject is not None else b["s"]
                if isinstance(key, Iri):
                    flags[(key, name)] = value
    return ArtifactState({k: frozenset(v) for k, v in types.items()}, flags)


def fetch_state_naive(dkg, subjects_pattern: list[tuple]) -> ArtifactState:
    """Unpushed fetch: transfer every property of the graph and sift locally."""
    from ..rdf import XSD_BOOLEAN

    types: dict[Iri, set[Iri]] = {}
    for b in dkg.query(subjects_pattern + [(Var("s"), RDF_TYPE, Var("t"))]):
        if isinstance(b["s"], Iri) and isinstance(b["t"], Iri):
            types.setdefault(b["s"], set()).add(b["t"])
    flags: dict[tuple[Iri, str], bool] = {}
    for b in dkg.query([(Var("s"), Var("p"), Var("v"))]):
        subject, prop, value = b["s"], b["p"], b["v"]
        if not isinstance(subject, Iri) or not isinstance(prop, Iri):
            continue
        if isinstance(value, Literal) and value.datatype == XSD_BOOLEAN:
            flags[(subject, compact(prop))] = value.lexical == "true"
    return ArtifactState({k: frozenset(v) for k, v in types.items()}, flags)


def infer_type_from(types: frozenset[Iri]) -> Iri | None:
    """Same precedence the decision engine applies, over fetched type rows."""
    if not types:
        return None
    if IOTREG.PersonalData in types:
        return IOTREG.PersonalData
    if IOTREG.Image in types:
        return IOTREG.Image
    return min(types, key=lambda t: t.value)


def run_federated(template, params: dict[str, str], dkg, pkg, plan: str = "pkg_first") -> list[dict]:
    """Execute a federated template over the two endpoints.

    Raises FederationError if either endpoint fails; callers get the full
    row set or nothing.
    """
    if plan not in ("pkg_first", "naive"):
        raise ValueError(f"unknown plan: {plan}")
    try:
        rows = template.run_federated(params, dkg, pkg, plan)
    except EndpointError as exc:
        raise FederationError(str(exc)) from exc
    rows.sort(key=lambda r: json.dumps(r, sort_keys=True))
    return rows
