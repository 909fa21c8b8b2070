"""Engine results against the ambient oracle, the reductive-group model,
and the self-contained combinatorial recomputations."""

import pytest

from quadrham.cohomology import cartan_total

from conftest import SIX_MODELS
from independent_oracle import (
    CLASSIFYING_TORUS_DIMS,
    TORUS_MOD_TWO_DIMS,
    TORUS_ON_TORUS_DIMS,
    classifying_torus_dims,
    torus_mod_two_dims,
    torus_on_torus_dims,
)


def test_total_equals_ambient_oracle_on_all_models(engine):
    for name in SIX_MODELS:
        total = engine.total(name, 4)
        oracle = engine.oracle(name, 4)
        assert total["degrees"] == oracle["degrees"] == list(range(5)), name
        assert total["dims"] == oracle["dims"], name
        assert total["stabilized"] and total["scan_complete"], name
        assert oracle["stabilized"] and oracle["scan_complete"], name


def test_classifying_model_dims_frozen_and_recomputed(engine):
    assert classifying_torus_dims(6) == CLASSIFYING_TORUS_DIMS
    total = engine.total("bgm", 6)
    assert total["dims"] == CLASSIFYING_TORUS_DIMS == [1, 0, 1, 0, 1, 0, 1]
    assert engine.cartan("bgm", 6)["dims"] == CLASSIFYING_TORUS_DIMS


def test_classifying_model_witnesses_are_transgression_powers(engine):
    wit = engine.total("bgm", 6)["witnesses"]
    assert sorted(wit) == [0, 2, 4, 6]
    assert wit[0] == ["(1) @n=0"]
    for k in (1, 2, 3):
        assert wit[2 * k] == ["(1)%s @n=0" % ("*v0" * k)]


def test_weighted_line_model_matches_classifying_dims(engine):
    """The weight-one line contracts equivariantly to the point, so its
    quotient has the cohomology of the classifying model through degree 6."""
    total = engine.total("a1_gm", 6)
    assert total["dims"] == CLASSIFYING_TORUS_DIMS
    assert engine.cartan("a1_gm", 6)["dims"] == CLASSIFYING_TORUS_DIMS


def test_self_action_model_is_a_point(engine):
    assert torus_on_torus_dims(3) == TORUS_ON_TORUS_DIMS
    total = engine.total("gm_gm", 3)
    assert total["dims"] == TORUS_ON_TORUS_DIMS == [1, 0, 0, 0]
    assert engine.cartan("gm_gm", 3)["dims"] == TORUS_ON_TORUS_DIMS


def test_torus_mod_inversion_dims(engine):
    """dt/t is anti-invariant under t -> 1/t, so degree 1 dies."""
    assert torus_mod_two_dims(2) == TORUS_MOD_TWO_DIMS
    total = engine.total("gm_z2", 2)
    assert total["dims"] == TORUS_MOD_TWO_DIMS == [1, 0, 0]
    assert engine.cartan("gm_z2", 2)["dims"] == TORUS_MOD_TWO_DIMS


def test_cartan_model_refuses_unsupported_inputs(engine):
    for name in ("pair_gm", "vb_a1"):
        with pytest.raises(NotImplementedError):
            cartan_total(engine.model(name), 2)


def test_spectral_pages_classifying_model(engine):
    pages = engine.pages("bgm", 6)
    e1 = pages["pages"][1]
    assert e1 == {(0, 0): 1, (2, 0): 1, (4, 0): 1, (6, 0): 1}
    for r in pages["ranks"]:
        if r >= 1:
            assert pages["ranks"][r] == {}, r
    assert pages["stable_from"] == 1
    assert pages["stabilized"] and pages["scan_complete"]
    limit = pages["limit"]
    assert limit == e1
    dims = [0] * 7
    for (m, n), d in limit.items():
        dims[m + n] += d
    assert dims == CLASSIFYING_TORUS_DIMS


def test_spectral_limit_matches_total_on_every_model(engine):
    for name in SIX_MODELS:
        pages = engine.pages(name, 4)
        dims = [0] * 5
        for (m, n), d in pages["limit"].items():
            if m + n <= 4:
                dims[m + n] += d
        assert dims == engine.total(name, 4)["dims"], name


def test_fixed_filtration_column(engine):
    fixed = engine.fixed_p("bgm", 2, 6)
    assert fixed["pages"][1] == {(2, 0): 1}
    assert fixed["dims"] == [0, 0, 1, 0, 0, 0, 0]
    assert fixed["stable_from"] == 1


def test_page_zero_is_excluded_from_stability_but_reported(engine):
    pages = engine.pages("bgm", 4)
    assert 0 in pages["pages"]
    assert pages["pages"][0] != pages["pages"][1]
    assert pages["stable_from"] >= 1
