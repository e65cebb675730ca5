"""Gold-set harness: replay the 24 packets and score exact matches.

Each run is hermetic: a fresh store loaded from the fixture, a scratch
working directory, and (optionally) a pinned clock and seeded id minter so
reports are byte-identical across runs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .clocks import FixedClock, IdMinter
from .enforcement import ReleaseOutcome, ReleaseRunner, RequestPacket, RunnerConfig
from .monitor.bench import percentile
from .policy import PolicyPack, load_policy_pack
from .rdf import Dataset, DKG_GRAPH, PKG_GRAPH


class GoldFixtureError(Exception):
    """The fixture directory is incomplete."""


@dataclass
class PacketResult:
    packet_id: str
    scenario: str
    expected: dict
    observed: dict
    matched: bool
    latency_s: float
    outcome: ReleaseOutcome | None = field(repr=False, default=None)

    def as_dict(self) -> dict:
        return {
            "id": self.packet_id,
            "scenario": self.scenario,
            "expected": self.expected,
            "observed": self.observed,
            "matched": self.matched,
        }


@dataclass
class GoldReport:
    results: list[PacketResult]
    store: Dataset | None = field(repr=False, default=None)
    pack: PolicyPack | None = field(repr=False, default=None)
    latencies: list[float] = field(default_factory=list)

    @property
    def matched(self) -> int:
        return sum(1 for r in self.results if r.matched)

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def accuracy(self) -> float:
        return self.matched / self.total if self.results else 0.0

    def latency_stats(self) -> dict[str, float]:
        if not self.latencies:
            return {"mean_s": 0.0, "median_s": 0.0, "p95_s": 0.0}
        return {
            "mean_s": sum(self.latencies) / len(self.latencies),
            "median_s": percentile(self.latencies, 0.5),
            "p95_s": percentile(self.latencies, 0.95),
        }

    def canonical_report(self) -> str:
        """Timing-free report document; byte-stable under a fixed clock."""
        payload = {
            "accuracy": f"{self.matched}/{self.total}",
            "results": [r.as_dict() for r in self.results],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _observed(outcome: ReleaseOutcome) -> dict:
    return {
        "initial_verdict": outcome.initial_verdict.kind.value if outcome.initial_verdict else outcome.final_verdict.kind.value,
        "final_verdict": outcome.final_verdict.kind.value,
        "transforms": list(outcome.initial_verdict.transforms) if outcome.initial_verdict else [],
        "applied_transforms": list(outcome.applied_transforms),
        "incident": outcome.incident is not None,
        "incident_category": outcome.incident.category if outcome.incident else None,
        "approved_artifact": outcome.approved_artifact.value if outcome.approved_artifact else None,
    }


def _matches(expected: dict, observed: dict) -> bool:
    if expected["initial_verdict"] != observed["initial_verdict"]:
        return False
    if expected["final_verdict"] != observed["final_verdict"]:
        return False
    if list(expected.get("transforms", [])) != observed["transforms"]:
        return False
    if "applied_transforms" in expected and list(expected["applied_transforms"]) != observed["applied_transforms"]:
        return False
    if bool(expected.get("incident")) != observed["incident"]:
        return False
    if expected.get("incident_category") and expected["incident_category"] != observed["incident_category"]:
        return False
    if expected.get("approved_artifact") and expected["approved_artifact"] != observed["approved_artifact"]:
        return False
    return True


def run_gold(fixture_dir: Path, work_dir: Path, fixed_clock: bool = True, seed: int | None = 99) -> GoldReport:
    """Load the fixture, replay every packet in manifest order, score them."""
    fixture_dir = Path(fixture_dir)
    manifest_path = fixture_dir / "expected.json"
    dkg_path = fixture_dir / "dkg.nt"
    pack_path = fixture_dir / "pkg_fema.ttl"
    for required in (manifest_path, dkg_path, pack_path):
        if not required.is_file():
            raise GoldFixtureError(f"missing fixture file: {required}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    store = Dataset()
    store.load_ntriples(dkg_path.read_bytes(), DKG_GRAPH)
    pack = load_policy_pack(pack_path, PKG_GRAPH)
    store.insert(pack.quads)

    work_dir = Path(work_dir)
    config = RunnerConfig(
        staging_dir=work_dir / "staging",
        derived_dir=work_dir / "derived",
        key_dir=work_dir / "keys",
        decision_log=work_dir / "decisions.jsonl",
    )
    clock = FixedClock() if fixed_clock else None
    ids = IdMinter(seed) if seed is not None else None
    runner = ReleaseRunner(store, pack, config, clock=clock, ids=ids)

    results: list[PacketResult] = []
    latencies: list[float] = []
    for entry in manifest:
        packet_path = fixture_dir / entry["packet_file"]
        if not packet_path.is_file():
            raise GoldFixtureError(f"missing packet file: {packet_path}")
        raw = json.loads(packet_path.read_text(encoding="utf-8"))
        if raw.get("file_url") and "://" not in raw["file_url"] and not raw["file_url"].startswith("/"):
            raw["file_url"] = str(fixture_dir / raw["file_url"])
        packet = RequestPacket.from_json(raw)
        started = time.perf_counter()
        outcome = runner.run(packet)
        elapsed = time.perf_counter() - started
        latencies.append(elapsed)
        observed = _observed(outcome)
        results.append(
            PacketResult(
                packet_id=entry["id"],
                scenario=entry.get("scenario", ""),
                expected=entry["expected"],
                observed=observed,
                matched=_matches(entry["expected"], observed),
                latency_s=elapsed,
                outcome=outcome,
            )
        )
    return GoldReport(results=results, store=store, pack=pack, latencies=latencies)


def format_report(report: GoldReport) -> str:
    lines = []
    for r in report.results:
        status = "ok " if r.matched else "FAIL"
        expected = r.expected["final_verdict"]
        observed = r.observed["final_verdict"]
        inc = "incident" if r.observed["incident"] else "-"
        lines.append(f"[{status}] {r.packet_id:<4} {r.scenario:<34} expected={expected:<6} observed={observed:<6} {inc}")
    stats = report.latency_stats()
    lines.append(f"accuracy: {report.matched}/{report.total} ({report.accuracy:.2f})")
    lines.append(f"latency: mean={stats['mean_s']:.3f}s median={stats['median_s']:.3f}s p95={stats['p95_s']:.3f}s")
    return "\n".join(lines)
