"""Shared fixtures: the default channel plan and repo paths."""

from pathlib import Path

import pytest

from loraguard.phy import default_eu868_plan

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def plan():
    return default_eu868_plan()


@pytest.fixture(scope="session")
def docs_dir():
    return REPO_ROOT / "docs"
