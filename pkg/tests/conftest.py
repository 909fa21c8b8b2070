"""Shared fixtures: bundled models and memoized engine runs."""

import pytest

from quadrham.cohomology import (
    cartan_total,
    fixed_p_pages,
    oracle_total,
    spectral_pages,
    total_cohomology,
)
from quadrham.models import load_model
from quadrham.truncation import broken_identity, oracle_operator, total_operator

from complex_samples import sector_truncations

SIX_MODELS = ("bgm", "a1_gm", "gm_gm", "gm_z2", "pair_gm", "vb_a1")


class EngineRuns:
    """Build-once models plus memoized engine computations, shared by the
    unit tests and the acceptance gate so nothing heavy runs twice."""

    def __init__(self):
        self._models = {}
        self._cache = {}

    def model(self, name):
        if name not in self._models:
            self._models[name] = load_model(name)[0]
        return self._models[name]

    def _run(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def total(self, name, max_degree):
        return self._run(("total", name, max_degree),
                         lambda: total_cohomology(self.model(name), max_degree))

    def oracle(self, name, max_degree):
        return self._run(("oracle", name, max_degree),
                         lambda: oracle_total(self.model(name), max_degree))

    def cartan(self, name, max_degree):
        return self._run(("cartan", name, max_degree),
                         lambda: cartan_total(self.model(name), max_degree))

    def pages(self, name, max_degree, r_max=None):
        return self._run(("pages", name, max_degree, r_max),
                         lambda: spectral_pages(self.model(name), max_degree,
                                                r_max=r_max))

    def fixed_p(self, name, p, max_degree):
        return self._run(("fixed_p", name, p, max_degree),
                         lambda: fixed_p_pages(self.model(name), p,
                                               max_degree))

    def identity_battery(self):
        """Square checks for the assembled differential and the ambient
        oracle on every sector basis element with total degree <= 4, all
        six bundled models.  Raises ModelError on the first violation;
        returns the number of degree <= 4 elements covered per model."""
        return self._run(("battery",), self._identity_battery)

    def _identity_battery(self):
        counts = {}
        for name in SIX_MODELS:
            model = self.model(name)
            k_count = amb_count = 0
            for tr in sector_truncations(model, 6):
                tr.check_square(tr.assemble(total_operator), broken_identity)
                k_count += sum(len(tr.bases.get(d, ())) for d in range(5))
            for tr in sector_truncations(model, 6, mode="ambient"):
                tr.check_square(tr.assemble(oracle_operator))
                amb_count += sum(len(tr.bases.get(d, ())) for d in range(5))
            counts[name] = {"k": k_count, "ambient": amb_count}
        return counts


@pytest.fixture(scope="session")
def engine():
    return EngineRuns()


@pytest.fixture(scope="session")
def models(engine):
    return {name: engine.model(name) for name in SIX_MODELS}
