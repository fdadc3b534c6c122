"""Common fixtures and utilities for integration tests."""

from pathlib import Path

import pytest
from typer.testing import CliRunner

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from cli.main import app


# Mark all tests in this directory as integration tests
def pytest_collection_modifyitems(items):
    """Mark all tests in the integration directory with the 'integration' marker."""
    for item in items:
        if "integration" in item.nodeid:
            item.add_marker(pytest.mark.integration)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    """Fresh output directory for one command run."""
    path = tmp_path / "results"
    path.mkdir()
    return path


@pytest.fixture
def invoke(runner: CliRunner):
    """Run the CLI with the given arguments and return the click Result."""
    def _invoke(*args: str):
        return runner.invoke(app, [str(a) for a in args])
    return _invoke
