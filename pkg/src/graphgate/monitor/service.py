"""HTTP service: one query endpoint per graph plus a control endpoint.

The graph endpoints answer pattern queries against exactly one named graph
(the separation mirrors running the two graphs as separate datasets). The
control endpoint accepts release packets, template executions and incident
listings. Malformed bodies get 400 with a machine-readable reason; internal
evaluation faults get 500, and the decide path folds them into Block.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..enforcement import PacketError, ReleaseRunner, RequestPacket, RunnerConfig
from ..incidents import list_incidents
from ..policy import PolicyPack
from ..rdf import Dataset, DKG_GRAPH, EvaluationError, Iri, PKG_GRAPH, match, pattern
from .federate import FederationError, LocalEndpoint, run_federated
from .templates import get_template, template_library
from .wire import WireError, bindings_to_json, parse_query_body


def _json_bytes(obj: object) -> bytes:
    return json.dumps(obj, sort_keys=True).encode("utf-8")


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # silence per-request stderr noise
        pass

    # -- plumbing ---------------------------------------------------------

    def _send(self, status: int, payload: object) -> None:
        body = _json_bytes(payload)
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> object:
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length) if length else b"{}"
        try:
            return json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise WireError(f"body is not valid JSON: {exc}") from exc

    # -- routes ---------------------------------------------------------

    def do_GET(self) -> None:
        service: "MonitorService" = self.server.monitor_service  # type: ignore[attr-defined]
        role: str = self.server.role  # type: ignore[attr-defined]
        if role == "control" and self.path == "/incidents":
            incidents = [
                {
                    "uri": i.uri.value,
                    "category": i.category,
                    "reason": i.reason,
                    "detected_at": i.detected_at.isoformat(),
                    "derived_from": i.derived_from.value,
                }
                for i in list_incidents(service.store)
            ]
            self._send(200, {"incidents": incidents})
            return
        if role == "control" and self.path == "/templates":
            self._send(
                200,
                {
                    "templates": [
                        {"name": t.name, "workload": t.workload, "params": list(t.params), "description": t.description}
                        for t in template_library()
                    ]
                },
            )
            return
        self._send(404, {"error": "not found"})

    def do_POST(self) -> None:
        service: "MonitorService" = self.server.monitor_service  # type: ignore[attr-defined]
        role: str = self.server.role  # type: ignore[attr-defined]
        try:
            if role in ("dkg", "pkg") and self.path == "/query":
                self._handle_query(service, DKG_GRAPH if role == "dkg" else PKG_GRAPH)
            elif role == "control" and self.path == "/decide":
                self._handle_decide(service)
            elif role == "control" and self.path.startswith("/query/"):
                self._handle_template(service, self.path[len("/query/") :])
            else:
                self._send(404, {"error": "not found"})
        except (WireError, PacketError, ValueError, KeyError) as exc:
            self._send(400, {"error": str(exc)})
        except EvaluationError as exc:
            self._send(500, {"error": f"evaluation fault: {exc}"})
        except FederationError as exc:
            self._send(500, {"error": f"federation failed: {exc}"})
        except Exception as exc:  # internal fault: never half-answer
            self._send(500, {"error": f"internal error: {exc}"})

    def _handle_query(self, service: "MonitorService", graph: Iri) -> None:
        triples, filters, limit = parse_query_body(self._read_json())
        rows = match(service.store, pattern(graph, triples, filters))
        if limit is not None:
            rows = rows[:limit]
        self._send(200, {"bindings": bindings_to_json(rows)})

    def _handle_decide(self, service: "MonitorService") -> None:
        packet = RequestPacket.from_json(self._read_json())
        outcome = service.runner.run(packet)
        self._send(200, outcome.as_dict())

    def _handle_template(self, service: "MonitorService", name: str) -> None:
        body = self._read_json()
        if not isinstance(body, dict):
            raise WireError("template body must be a JSON object")
        params = body.get("params", {})
        if not isinstance(params, dict):
            raise WireError("params must be an object")
        plan = body.get("plan", "pkg_first")
        template = get_template(name)
        template.check_params(params)
        if template.workload == "single":
            rows = template.run_single(service.local_dkg, params)
        else:
            rows = run_federated(template, params, service.local_dkg, service.local_pkg, plan=plan)
        self._send(200, {"rows": rows})


@dataclass
class ServiceConfig:
    dkg_port: int = 0
    pkg_port: int = 0
    control_port: int = 0
    host: str = "127.0.0.1"


class MonitorService:
    """Three HTTP servers over one shared store; start() returns when bound."""

    def __init__(self, store: Dataset, pack: PolicyPack, runner_config: RunnerConfig, config: ServiceConfig | None = None):
        self.store = store
        self.pack = pack
        self.config = config or ServiceConfig()
        self.runner = ReleaseRunner(store, pack, runner_config)
        self.local_dkg = LocalEndpoint(store, DKG_GRAPH)
        self.local_pkg = LocalEndpoint(store, PKG_GRAPH)
        self._servers: dict[str, ThreadingHTTPServer] = {}
        self._threads: list[threading.Thread] = []

    def start(self) -> None:
        ports = {"dkg": self.config.dkg_port, "pkg": self.config.pkg_port, "control": self.config.control_port}
        for role, port in ports.items():
            server = ThreadingHTTPServer((self.config.host, port), _Handler)
            server.daemon_threads = True
            server.monitor_service = self  # type: ignore[attr-defined]
            server.role = role  # type: ignore[attr-defined]
            self._servers[role] = server
            thread = threading.Thread(target=server.serve_forever, name=f"graphgate-{role}", daemon=True)
            thread.start()
            self._threads.append(thread)

    def stop(self, role: str | None = None) -> None:
        roles = [role] if role else list(self._servers)
        for name in roles:
            server = self._servers.pop(name, None)
            if server is not None:
                server.shutdown()
                server.server_close()

    def url(self, role: str) -> str:
        server = self._servers[role]
        host, port = server.server_address[:2]
        return f"http://{host}:{port}"

    @property
    def urls(self) -> dict[str, str]:
        return {role: self.url(role) for role in self._servers}


def serve_endpoints(store: Dataset, pack: PolicyPack, runner_config: RunnerConfig, config: ServiceConfig | None = None) -> MonitorService:
    """Start the service and hand back a running handle."""
    service = MonitorService(store, pack, runner_config, config)
    service.start()
    return service
