import pytest

from ricci_forge import (
    assemble_profile,
    build_bridge_theta,
    build_gamma,
    run_verification,
    select_params,
    smooth_profile,
)


@pytest.fixture(scope="session")
def params33():
    return select_params(3, 3)


@pytest.fixture(scope="session")
def gamma33(params33):
    return build_gamma(params33.R0, params33.Lambda)


@pytest.fixture(scope="session")
def bridge33(params33):
    return build_bridge_theta(params33)


@pytest.fixture(scope="session")
def profile33(params33, gamma33, bridge33):
    return assemble_profile(params33, gamma33, bridge33)


@pytest.fixture(scope="session")
def smooth33(profile33, params33):
    return smooth_profile(profile33, params33.mu)


@pytest.fixture(scope="session")
def report_cache():
    """Memoised run_verification so expensive reports are computed once."""
    cache = {}

    def get(n, p, overrides=None):
        key = (n, p, tuple(sorted((overrides or {}).items())))
        if key not in cache:
            cache[key] = run_verification(n, p, overrides)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def report33(report_cache):
    return report_cache(3, 3)
