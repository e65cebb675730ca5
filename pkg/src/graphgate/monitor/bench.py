"""Latency instrumentation for the template workloads."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .federate import run_federated
from .templates import FEDERATED_TEMPLATES, SINGLE_TEMPLATES


def percentile(samples: list[float], q: float) -> float:
    """Nearest-rank percentile; q in [0, 1]."""
    if not samples:
        return 0.0
    ordered = sorted(samples)
    rank = max(1, -(-int(q * 100) * len(ordered) // 100))  # ceil(q*n)
    return ordered[min(rank, len(ordered)) - 1]


@dataclass
class WorkloadReport:
    workload: str
    templates: int
    executions: int = 0
    failures: int = 0
    samples: list[float] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def pass_rate(self) -> float:
        return 1.0 if self.executions == 0 else (self.executions - self.failures) / self.executions

    def as_dict(self) -> dict:
        return {
            "workload": self.workload,
            "templates": self.templates,
            "executions": self.executions,
            "pass_rate": self.pass_rate,
            "mean_s": sum(self.samples) / len(self.samples) if self.samples else 0.0,
            "median_s": percentile(self.samples, 0.5),
            "p95_s": percentile(self.samples, 0.95),
            "errors": dict(self.errors),
        }


def bench(dkg, pkg, repetitions: int = 3, plan: str = "pkg_first") -> dict:
    """Run both workloads against live endpoints and report wall-clock stats.

    Every template executes `repetitions` times with fixture-derived sample
    parameters; a failing template lowers the workload pass rate.
    """
    single = WorkloadReport("single", len(SINGLE_TEMPLATES))
    for template in SINGLE_TEMPLATES:
        params = template.sample_params(dkg)
        for _ in range(repetitions):
            single.executions += 1
            started = time.perf_counter()
            try:
                template.run_single(dkg, params)
                single.samples.append(time.perf_counter() - started)
            except Exception as exc:
                single.failures += 1
                single.errors[template.name] = str(exc)

    federated = WorkloadReport("federated", len(FEDERATED_TEMPLATES))
    for template in FEDERATED_TEMPLATES:
        params = template.sample_params(dkg)
        for _ in range(repetitions):
            federated.executions += 1
            started = time.perf_counter()
            try:
                run_federated(template, params, dkg, pkg, plan=plan)
                federated.samples.append(time.perf_counter() - started)
            except Exception as exc:
                federated.failures += 1
                federated.errors[template.name] = str(exc)

    return {"single": single.as_dict(), "federated": federated.as_dict(), "repetitions": repetitions, "plan": plan}
