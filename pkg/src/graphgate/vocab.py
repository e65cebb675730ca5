"""Namespace tables and typed accessors for artifact privacy state.

Two graphs share one vocabulary: the disaster graph (dm:) holds events,
imagery, provenance and incidents; the policy graph reuses the iot-reg
deontic classes plus the policy-ext bindings that tie obligations to
compliance flags and transform names.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rdf import Dataset, DKG_GRAPH, Iri, Literal, XSD_BOOLEAN


class _Namespace:
    """Attribute access mints IRIs under a fixed base."""

    def __init__(self, base: str):
        self.base = base

    def __getattr__(self, local: str) -> Iri:
        return Iri(self.base + local)

    def term(self, local: str) -> Iri:
        return Iri(self.base + local)


DM = _Namespace("http://purl.org/disaster-mgt#")
IOTREG = _Namespace("http://purl.org/iot-reg#")
POLICYEXT = _Namespace("http://purl.org/iot-reg/policy-ext#")
PROV = _Namespace("http://www.w3.org/ns/prov#")
RDF = _Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
GEO = _Namespace("http://www.opengis.net/ont/geosparql#")
XSD = _Namespace("http://www.w3.org/2001/XMLSchema#")

PREFIXES: dict[str, str] = {
    "dm": DM.base,
    "iot-reg": IOTREG.base,
    "policy-ext": POLICYEXT.base,
    "prov": PROV.base,
    "rdf": RDF.base,
    "geo": GEO.base,
    "xsd": XSD.base,
}

RDF_TYPE = RDF.type


class VocabError(ValueError):
    """A name failed to resolve under the namespace tables."""


def expand(name: str) -> Iri:
    """Resolve a prefixed name ("iot-reg:Image") or absolute IRI to an Iri."""
    if ":" not in name:
        raise VocabError(f"not a prefixed name or IRI: {name!r}")
    prefix, _, local = name.partition(":")
    base = PREFIXES.get(prefix)
    if base is not None:
        return Iri(base + local)
    return Iri(name)  # absolute IRI; Iri() validates the scheme


def compact(iri: Iri) -> str:
    """Compact an IRI to its unique prefixed form, or return it verbatim."""
    for prefix, base in PREFIXES.items():
        if iri.value.startswith(base):
            return f"{prefix}:{iri.value[len(base):]}"
    return iri.value


def local_name(iri: Iri) -> str:
    value = iri.value
    for sep in ("#", "/"):
        if sep in value:
            return value.rsplit(sep, 1)[1]
    return value


# Boolean compliance flags carried by artifacts, keyed by the prefixed
# name used in policy-ext:checksFlag values.
FLAG_PROPERTIES: dict[str, Iri] = {
    "dm:containsPII": DM.containsPII,
    "iot-reg:isAnonymized": IOTREG.isAnonymized,
    "iot-reg:isEncrypted": IOTREG.isEncrypted,
    "dm:isRetained": DM.isRetained,
}


@dataclass(frozen=True)
class PrivacyFlags:
    """Artifact compliance flags; None means the property is absent."""

    contains_pii: bool | None = None
    is_anonymized: bool | None = None
    is_encrypted: bool | None = None
    is_retained: bool | None = None

    def conflicting(self) -> bool:
        # An artifact cannot be anonymized yet still flagged as holding PII.
        return self.is_anonymized is True and self.contains_pii is True


def _read_bool(dataset: Dataset, artifact: Iri, prop: Iri) -> bool | None:
    for quad in dataset.quads_for(DKG_GRAPH, subject=artifact, predicate=prop):
        obj = quad.object
        if isinstance(obj, Literal) and obj.datatype == XSD_BOOLEAN:
            return obj.lexical == "true"
    return None


def read_flags(dataset: Dataset, artifact: Iri) -> PrivacyFlags:
    """Current flags for an artifact; missing artifacts are all-absent."""
    return PrivacyFlags(
        contains_pii=_read_bool(dataset, artifact, DM.containsPII),
        is_anonymized=_read_bool(dataset, artifact, IOTREG.isAnonymized),
        is_encrypted=_read_bool(dataset, artifact, IOTREG.isEncrypted),
        is_retained=_read_bool(dataset, artifact, DM.isRetained),
    )


def flag_value(dataset: Dataset, artifact: Iri, flag_name: str) -> bool | None:
    """Value of one flag by its prefixed name; unknown names read as absent."""
    prop = FLAG_PROPERTIES.get(flag_name)
    if prop is None:
        return None
    return _read_bool(dataset, artifact, prop)
