import pytest

from paradox_lab import dsl, harness


@pytest.fixture(scope="session")
def pr_experiment():
    path = harness.bundled_path("pr_box.exp")
    source = path.read_text(encoding="utf-8")
    return dsl.load(source, path.name), source


@pytest.fixture(scope="session")
def fr_experiment():
    path = harness.bundled_path("fr_quantum.exp")
    source = path.read_text(encoding="utf-8")
    return dsl.load(source, path.name), source
