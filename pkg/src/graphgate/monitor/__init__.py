"""Analytical monitoring: endpoints, mediator, template library, benchmarks."""

from .bench import bench, percentile
from .federate import (
    EndpointError,
    FederationError,
    HttpEndpoint,
    LocalEndpoint,
    fetch_rule_rows,
    run_federated,
)
from .service import MonitorService, ServiceConfig, serve_endpoints
from .templates import (
    FEDERATED_TEMPLATES,
    SINGLE_TEMPLATES,
    QueryTemplate,
    compliance_status,
    get_template,
    template_library,
)

__all__ = [
    "EndpointError",
    "FEDERATED_TEMPLATES",
    "FederationError",
    "HttpEndpoint",
    "LocalEndpoint",
    "MonitorService",
    "QueryTemplate",
    "ServiceConfig",
    "SINGLE_TEMPLATES",
    "bench",
    "compliance_status",
    "fetch_rule_rows",
    "get_template",
    "percentile",
    "run_federated",
    "serve_endpoints",
    "template_library",
]
