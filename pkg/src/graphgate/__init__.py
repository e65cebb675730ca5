"""graphgate: policy-aware release decisions over RDF knowledge graphs.

A disaster-management graph holds artifacts, privacy flags, provenance and
incidents; a policy graph holds deontic rules (permissions, obligations,
prohibitions). The decision engine turns release requests into Allow,
Block or Allow-with-Transform verdicts, the enforcement layer executes the
required transforms and writes provenance-linked derived artifacts, and the
monitoring layer serves federated compliance queries over both graphs.
"""

__version__ = "0.1.0"

from .decision import ReleaseRequest, Verdict, VerdictKind, decide, infer_data_type
from .enforcement import ReleaseOutcome, ReleaseRunner, RequestPacket, RunnerConfig, run_release
from .policy import DeonticKind, DeonticStatement, PolicyPack, load_policy_pack
from .rdf import Dataset, DKG_GRAPH, Iri, Literal, PKG_GRAPH, Quad
from .vocab import DM, IOTREG, POLICYEXT, PROV, PrivacyFlags, read_flags

__all__ = [
    "DM",
    "DKG_GRAPH",
    "Dataset",
    "DeonticKind",
    "DeonticStatement",
    "IOTREG",
    "Iri",
    "Literal",
    "PKG_GRAPH",
    "POLICYEXT",
    "PROV",
    "PolicyPack",
    "PrivacyFlags",
    "Quad",
    "ReleaseOutcome",
    "ReleaseRequest",
    "ReleaseRunner",
    "RequestPacket",
    "RunnerConfig",
    "Verdict",
    "VerdictKind",
    "decide",
    "infer_data_type",
    "load_policy_pack",
    "read_flags",
    "run_release",
]
