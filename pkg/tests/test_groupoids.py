"""Model builders, flatness semantics, and the derived connection."""

from fractions import Fraction

import pytest

from quadrham.groupoids import (
    GroupModel,
    ModelError,
    SpaceModel,
    build_pair_model,
    check_flatness,
    derived_connection,
    structure_constants,
    validate_structure,
)
from quadrham.kcomplex import KElement
from quadrham.models import load_model


def test_group_builders_validate():
    GroupModel.multiplicative().validate()
    GroupModel.additive(("u", "v")).validate()
    GroupModel.cyclic(3).validate()
    table = [[0, 1], [1, 0]]
    GroupModel.finite(["e", "r"], table).validate()
    with pytest.raises(ModelError):
        GroupModel.finite(["e", "r"], [[1, 1], [1, 1]]).validate()


def test_abelian_detection_on_finite_tables():
    assert GroupModel.cyclic(3).abelian
    assert GroupModel.multiplicative().abelian
    s3 = GroupModel.finite(
        ["e", "r", "rr", "s", "sr", "srr"],
        [[0, 1, 2, 3, 4, 5],
         [1, 2, 0, 5, 3, 4],
         [2, 0, 1, 4, 5, 3],
         [3, 4, 5, 0, 1, 2],
         [4, 5, 3, 2, 0, 1],
         [5, 3, 4, 1, 2, 0]],
    )
    assert not s3.abelian


def test_flatness_accepts_all_bundled_flat_models(models):
    for name, model in models.items():
        assert check_flatness(model) == "flat", name


def test_flatness_rejects_twisted_pair_frame_with_bracket_witness():
    model, _ = load_model("nonflat_pair")
    witness = check_flatness(model)
    assert witness != "flat"
    assert "non-constant frame coefficient" in witness
    assert "2*x" in witness
    with pytest.raises(ModelError) as err:
        model.require_flat()
    assert err.value.identity == "flatness"
    assert "2*x" in str(err.value.witness)


def test_unsupported_models_refuse_operator_construction():
    model, _ = load_model("nonflat_pair")
    reason = model.operators_supported()
    assert reason is not None and "not flat" in reason
    with pytest.raises(NotImplementedError):
        KElement.unit(model)


def test_nonabelian_flat_pair_frame_refuses_polynomial_transport():
    # [d/dx, x d/dx + d/dy] = d/dx: constant bracket, so flat, but the
    # non-abelian transport is exponential, so operators must refuse
    # rather than approximate.
    base = SpaceModel.affine(("x", "y"))
    frame = [
        [base.ring.one(), base.ring.zero()],
        [base.ring.var("x"), base.ring.one()],
    ]
    from quadrham.groupoids import build_pair_model_from_frame

    model = build_pair_model_from_frame(base, frame)
    assert check_flatness(model) == "flat"
    reason = model.operators_supported()
    assert reason is not None and "non-abelian" in reason
    gamma, psi = derived_connection(model)
    assert psi is None
    assert any(any(any(c for c in row) for row in mat) for mat in gamma)


def test_derived_connection_is_flat_zero_on_transformation_models(models):
    for name in ("a1_gm", "gm_gm", "vb_a1"):
        gamma, psi = derived_connection(models[name])
        assert gamma == [[[Fraction(0)]]], name
        assert psi is not None and len(psi) == 1 and len(psi[0]) == 1


def test_derived_connection_transition_freezes():
    """The level-1 transition matrix carries the action: the character for
    a weight-1 affine line, the sign function for the inversion action, the
    identity for trivial and pair models."""
    a1, _ = load_model("a1_gm")
    _, psi = derived_connection(a1)
    (entry,) = [p for row in psi for p in row]
    assert str(entry) == "g1"

    z2, _ = load_model("gm_z2")
    gamma, psi = derived_connection(z2)
    assert gamma == []
    (entry,) = [p for row in psi for p in row]
    assert entry.data[(0,)].constant_value() == 1
    assert entry.data[(1,)].constant_value() == -1

    bgm, _ = load_model("bgm")
    assert derived_connection(bgm) == ([[]], [])

    for name in ("gm_gm", "pair_gm", "vb_a1"):
        model, _ = load_model(name)
        _, psi = derived_connection(model)
        (entry,) = [p for row in psi for p in row]
        assert str(entry) == "1"


def test_pair_structure_constants_vanish_for_abelian_invariant_frame():
    pair, _ = load_model("pair_gm")
    consts = structure_constants(pair)
    assert consts == [[[Fraction(0)]]]
    gamma, _ = derived_connection(pair)
    assert gamma == [[[Fraction(0)]]]


def test_structure_identities_hold_on_levels_0_to_2(models):
    for name, model in models.items():
        validate_structure(model, n_max=2)


def test_pair_models_need_positive_dimension():
    with pytest.raises(ValueError):
        build_pair_model(GroupModel.cyclic(2))
