"""Operator command line: graph lifecycle, decisions, gold runs, QA,
benchmarks and the query service.

Exit codes are a stable contract: 0 for allow-family outcomes and clean
checks, 2 for Block, 3 for usage errors (bad packets, missing files).
"""

from __future__ import annotations

import json
import sys
import tempfile
import time
from pathlib import Path

import click

from .clocks import IdMinter
from .config import CliConfig, ConfigError
from .enforcement import PacketError, ReleaseRunner, RequestPacket, RunnerConfig
from .goldrun import GoldFixtureError, format_report, run_gold
from .goldset import build_gold_fixture
from .ingestion import SyntheticConfig, generate_dkg, qa_check
from .monitor import HttpEndpoint, ServiceConfig, bench, serve_endpoints
from .policy import PackValidationError, load_policy_pack
from .rdf import Dataset, DKG_GRAPH, ParseError, PKG_GRAPH

EXIT_ALLOW = 0
EXIT_BLOCK = 2
EXIT_USAGE = 3


def _load_config(path: str) -> CliConfig:
    try:
        return CliConfig.load(Path(path))
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)


def _load_store(config: CliConfig) -> tuple[Dataset, object]:
    store = Dataset()
    if config.dkg_file.is_file():
        store.load_ntriples(config.dkg_file.read_bytes(), DKG_GRAPH)
    try:
        pack = load_policy_pack(config.pkg_file, PKG_GRAPH)
    except (FileNotFoundError, ParseError, PackValidationError) as exc:
        click.echo(f"error: policy pack: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    store.insert(pack.quads)
    return store, pack


def _runner_config(config: CliConfig) -> RunnerConfig:
    return RunnerConfig(
        staging_dir=config.staging_dir,
        derived_dir=config.derived_dir,
        key_dir=config.key_dir,
        decision_log=config.decision_log,
    )


@click.group()
def main() -> None:
    """Policy-aware release decisions over disaster and policy graphs."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--graph", type=click.Choice(["dkg", "pkg"]), default="dkg")
@click.argument("files", nargs=-1, required=True, type=click.Path())
def load(config_path: str, graph: str, files: tuple[str, ...]) -> None:
    """Load triple files into a graph store file."""
    config = _load_config(config_path)
    if graph == "pkg":
        if len(files) != 1:
            click.echo("error: the pkg graph loads exactly one pack file", err=True)
            sys.exit(EXIT_USAGE)
        try:
            pack = load_policy_pack(Path(files[0]), PKG_GRAPH)
        except (ParseError, PackValidationError, FileNotFoundError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        config.pkg_file.parent.mkdir(parents=True, exist_ok=True)
        config.pkg_file.write_bytes(Path(files[0]).read_bytes())
        click.echo(f"loaded policy pack: {len(pack.statements)} deontic statements")
        return
    store = Dataset()
    if config.dkg_file.is_file():
        store.load_ntriples(config.dkg_file.read_bytes(), DKG_GRAPH)
    for name in files:
        path = Path(name)
        try:
            receipt = store.load_ntriples(path.read_bytes(), DKG_GRAPH)
        except (ParseError, FileNotFoundError) as exc:
            click.echo(f"error: {name}: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        click.echo(f"{name}: +{receipt.inserted} quads")
    config.dkg_file.parent.mkdir(parents=True, exist_ok=True)
    config.dkg_file.write_bytes(store.dump_ntriples(DKG_GRAPH))
    click.echo(f"dkg now holds {store.graph_size(DKG_GRAPH)} quads")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.argument("packet_file", type=click.Path())
def decide(config_path: str, packet_file: str) -> None:
    """Evaluate one release packet and execute any required transforms."""
    config = _load_config(config_path)
    path = Path(packet_file)
    if not path.is_file():
        click.echo(f"error: packet file not found: {path}", err=True)
        sys.exit(EXIT_USAGE)
    try:
        packet = RequestPacket.from_json(path.read_text(encoding="utf-8"))
    except PacketError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    store, pack = _load_store(config)
    runner = ReleaseRunner(store, pack, _runner_config(config), ids=IdMinter(config.seed) if config.seed is not None else None)
    outcome = runner.run(packet)
    click.echo(json.dumps(outcome.as_dict(), indent=2, sort_keys=True))
    # Derived artifacts and incidents persist across invocations.
    config.dkg_file.parent.mkdir(parents=True, exist_ok=True)
    config.dkg_file.write_bytes(store.dump_ntriples(DKG_GRAPH))
    sys.exit(EXIT_ALLOW if outcome.final_verdict.allows else EXIT_BLOCK)


@main.command()
@click.argument("target", type=click.Path())
def goldgen(target: str) -> None:
    """Write the gold fixture (graph, packets, files, manifest) to TARGET."""
    path = build_gold_fixture(Path(target))
    click.echo(f"gold fixture written to {path}")


@main.command()
@click.option("--fixture", "fixture_dir", type=click.Path(), default=None, help="Fixture directory; default builds a fresh one.")
@click.option("--work", "work_dir", type=click.Path(), default=None, help="Working directory for staging/keys/derived files.")
@click.option("--report", "report_file", type=click.Path(), default=None, help="Write the canonical JSON report here.")
def goldrun(fixture_dir: str | None, work_dir: str | None, report_file: str | None) -> None:
    """Replay the 24-packet gold suite and score exact matches."""
    with tempfile.TemporaryDirectory() as scratch:
        fixture = Path(fixture_dir) if fixture_dir else build_gold_fixture(Path(scratch) / "gold")
        work = Path(work_dir) if work_dir else Path(scratch) / "work"
        started = time.perf_counter()
        try:
            report = run_gold(fixture, work)
        except GoldFixtureError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        click.echo(format_report(report))
        click.echo(f"wall clock: {time.perf_counter() - started:.2f}s")
        if report_file:
            Path(report_file).write_text(report.canonical_report(), encoding="utf-8")
    sys.exit(EXIT_ALLOW if report.matched == report.total else 1)


@main.command()
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--events", default=50, show_default=True)
@click.option("--declarations", default=50, show_default=True)
@click.option("--requests", default=12, show_default=True)
@click.option("--locations", default=60, show_default=True)
@click.option("--geofeatures", default=12, show_default=True)
@click.option("--images", default=500, show_default=True)
@click.option("--pii-ratio", default=0.3, show_default=True)
@click.option("--geofeature-fraction", default=None, type=float)
@click.option("--seed", default=7, show_default=True)
def generate(out_file: str, events: int, declarations: int, requests: int, locations: int, geofeatures: int, images: int, pii_ratio: float, geofeature_fraction: float | None, seed: int) -> None:
    """Generate a synthetic disaster graph at desk scale."""
    cfg = SyntheticConfig(
        events=events,
        declarations=declarations,
        requests=requests,
        locations=locations,
        geofeatures=geofeatures,
        images=images,
        pii_ratio=pii_ratio,
        geofeature_fraction=geofeature_fraction,
        seed=seed,
    )
    dataset = generate_dkg(cfg)
    Path(out_file).write_bytes(dataset.dump_ntriples(DKG_GRAPH))
    click.echo(f"{out_file}: {dataset.graph_size(DKG_GRAPH)} quads")


@main.command()
@click.argument("graph_file", type=click.Path())
def qa(graph_file: str) -> None:
    """Run the four structural QA checks over an N-Triples graph file."""
    path = Path(graph_file)
    if not path.is_file():
        click.echo(f"error: file not found: {path}", err=True)
        sys.exit(EXIT_USAGE)
    store = Dataset()
    try:
        store.load_ntriples(path.read_bytes(), DKG_GRAPH)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    report = qa_check(store)
    for name, value in report.as_dict().items():
        click.echo(f"{name}: {value}")
    sys.exit(EXIT_ALLOW if report.all_zero() else 1)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--param", "params", multiple=True, help="Template parameter as name=value; repeatable.")
@click.option("--plan", type=click.Choice(["pkg_first", "naive"]), default="pkg_first", show_default=True)
@click.argument("template_name")
def query(config_path: str, params: tuple[str, ...], plan: str, template_name: str) -> None:
    """Run a library template against the configured graphs and print a table."""
    from .monitor import LocalEndpoint, get_template, run_federated
    from .rdf import DKG_GRAPH as _DKG, PKG_GRAPH as _PKG

    config = _load_config(config_path)
    store, pack = _load_store(config)
    try:
        template = get_template(template_name)
    except KeyError:
        click.echo(f"error: unknown template {template_name!r}; see 'graphgate templates'", err=True)
        sys.exit(EXIT_USAGE)
    bound = {}
    for item in params:
        name, sep, value = item.partition("=")
        if not sep:
            click.echo(f"error: --param expects name=value, got {item!r}", err=True)
            sys.exit(EXIT_USAGE)
        bound[name] = value
    dkg_ep = LocalEndpoint(store, _DKG)
    try:
        template.check_params(bound)
        if template.workload == "single":
            rows = template.run_single(dkg_ep, bound)
        else:
            rows = run_federated(template, bound, dkg_ep, LocalEndpoint(store, _PKG), plan=plan)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    if not rows:
        click.echo("(no rows)")
        return
    headers = list(rows[0].keys())
    widths = {h: max(len(h), *(len(str(r.get(h, ""))) for r in rows)) for h in headers}
    click.echo("  ".join(h.ljust(widths[h]) for h in headers))
    click.echo("  ".join("-" * widths[h] for h in headers))
    for row in rows:
        click.echo("  ".join(str(row.get(h, "")).ljust(widths[h]) for h in headers))


@main.command()
def templates() -> None:
    """List the query template library."""
    from .monitor import template_library

    for template in template_library():
        params = ", ".join(template.params) or "-"
        click.echo(f"{template.name:<36} [{template.workload:<9}] params: {params:<28} {template.description}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
def serve(config_path: str) -> None:
    """Serve the dkg/pkg query endpoints and the control endpoint."""
    config = _load_config(config_path)
    store, pack = _load_store(config)
    service = serve_endpoints(
        store,
        pack,
        _runner_config(config),
        ServiceConfig(dkg_port=config.dkg_port, pkg_port=config.pkg_port, control_port=config.control_port),
    )
    for role, url in sorted(service.urls.items()):
        click.echo(f"{role}: {url}")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        service.stop()


@main.command(name="bench")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--repetitions", default=3, show_default=True)
@click.option("--report", "report_file", type=click.Path(), default=None)
def bench_cmd(config_path: str, repetitions: int, report_file: str | None) -> None:
    """Benchmark the template workloads over live HTTP endpoints."""
    config = _load_config(config_path)
    store, pack = _load_store(config)
    service = serve_endpoints(store, pack, _runner_config(config), ServiceConfig())
    try:
        results = bench(HttpEndpoint(service.url("dkg")), HttpEndpoint(service.url("pkg")), repetitions=repetitions)
    finally:
        service.stop()
    click.echo(json.dumps(results, indent=2, sort_keys=True))
    if report_file:
        Path(report_file).write_text(json.dumps(results, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    ok = results["single"]["pass_rate"] == 1.0 and results["federated"]["pass_rate"] == 1.0
    sys.exit(EXIT_ALLOW if ok else 1)


if __name__ == "__main__":
    main()
