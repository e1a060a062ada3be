import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_random_connected(rng, n, extra_edges=2, p_actuated=None):
    """Random connected topology: spanning tree plus a few extra edges."""
    from flowreg.graphs import NetworkTopology

    edges = []
    order = rng.permutation(n)
    for i in range(1, n):
        j = rng.integers(0, i)
        edges.append((int(order[j]), int(order[i])))
    existing = {frozenset(e) for e in edges}
    tries = 0
    while extra_edges > 0 and tries < 50:
        a, b = rng.integers(0, n, size=2)
        tries += 1
        if a != b and frozenset((int(a), int(b))) not in existing:
            edges.append((int(a), int(b)))
            existing.add(frozenset((int(a), int(b))))
            extra_edges -= 1
    k = n if p_actuated is None else p_actuated
    actuated = tuple(sorted(rng.choice(n, size=max(1, k), replace=False).tolist()))
    return NetworkTopology(n=n, edges=tuple(edges), actuated=actuated)


@pytest.fixture(scope="session")
def district_log():
    from flowreg.scenario import load_preset
    from flowreg.sim import integrate

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return integrate(load_preset("district_heating"))


@pytest.fixture(scope="session")
def hvdc_log():
    from flowreg.scenario import load_preset
    from flowreg.sim import integrate

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return integrate(load_preset("hvdc"))


@pytest.fixture(scope="session")
def oscillation_log():
    from flowreg.scenario import load_preset
    from flowreg.sim import integrate

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return integrate(load_preset("oscillation_demo"))
