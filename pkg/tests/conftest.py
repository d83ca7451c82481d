import pytest

from otcheck.explorer import ExplorerConfig, ExploreResult, explore


@pytest.fixture(scope="session")
def run_cached():
    """Explore each configuration once per test session and share the result."""
    cache: dict[ExplorerConfig, ExploreResult] = {}

    def run(cfg: ExplorerConfig) -> ExploreResult:
        if cfg not in cache:
            cache[cfg] = explore(cfg)
        return cache[cfg]

    return run
