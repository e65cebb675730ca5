"""Shared fixtures: loaded policy pack, gold fixture directory, gold run."""

from __future__ import annotations

from pathlib import Path

import pytest

from graphgate.goldrun import run_gold
from graphgate.goldset import build_gold_fixture, gold_dkg
from graphgate.policy import load_policy_pack
from graphgate.rdf import Dataset, PKG_GRAPH

PACK_PATH = Path(__file__).resolve().parents[1] / "src" / "graphgate" / "fixtures" / "pkg_fema.ttl"


@pytest.fixture(scope="session")
def policy_pack():
    return load_policy_pack(PACK_PATH, PKG_GRAPH)


@pytest.fixture()
def gold_store() -> Dataset:
    return gold_dkg()


@pytest.fixture(scope="session")
def gold_fixture_dir(tmp_path_factory) -> Path:
    return build_gold_fixture(tmp_path_factory.mktemp("goldfix") / "gold")


@pytest.fixture(scope="session")
def gold_report(gold_fixture_dir, tmp_path_factory):
    return run_gold(gold_fixture_dir, tmp_path_factory.mktemp("goldwork"))
