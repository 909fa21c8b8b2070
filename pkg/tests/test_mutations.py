"""Every sign convention is load-bearing: flipping any single switch makes
at least one checked identity fail somewhere in the bundled corpus."""

import dataclasses
import random

import pytest

from quadrham.groupoids import ModelError, validate_structure
from quadrham.kcomplex import KElement, cech, cup, derham, phi
from quadrham.models import bundled_config, model_from_config
from quadrham.signs import SignConventions
from quadrham.truncation import broken_identity

from complex_samples import basis_pool, random_element

SWITCHES = tuple(f.name for f in dataclasses.fields(SignConventions))

# Models where enough operators are live to notice each kind of flip; a
# point base hides the contraction, a trivial action hides transports.
PROBE_MODELS = ("gm_gm", "gm_z2", "vb_a1", "pair_gm", "a1_gm", "bgm")


def _flipped_model(name, switch):
    config = dict(bundled_config(name))
    config["sign_overrides"] = {switch: getattr(
        SignConventions().flipped(switch), switch)}
    return model_from_config(config, allow_unsafe=True)


def _first_violation(model):
    """A witness string for the first identity the model breaks, or None."""
    try:
        validate_structure(model, n_max=2)
    except ModelError as exc:
        return "structure: %s" % exc.identity
    rng = random.Random(413)
    pool = basis_pool(model, 3)
    one = KElement.unit(model)
    for _ in range(16):
        el = random_element(rng, pool)
        bad = broken_identity(el)
        if bad is not None:
            return "identity: %s" % bad
        if not (cup(one, el) - el).is_zero():
            return "cup unit law"
        da, a = rng.choice(pool)
        for op in (phi, cech, derham):
            lhs = op(cup(a, el))
            rhs = cup(op(a), el) + cup(a, op(el)).scale((-1) ** da)
            if not (lhs - rhs).is_zero():
                return "cup derivation law (%s)" % op.__name__
    return None


def test_default_conventions_break_nothing():
    for name in ("gm_gm", "gm_z2"):
        model = model_from_config(dict(bundled_config(name)))
        assert _first_violation(model) is None, name


@pytest.mark.parametrize("switch", SWITCHES)
def test_single_flip_is_detected(switch):
    hits = []
    for name in PROBE_MODELS:
        try:
            model = _flipped_model(name, switch)
        except ModelError as exc:
            hits.append((name, "build-time: %s" % exc.identity))
            break
        witness = _first_violation(model)
        if witness is not None:
            hits.append((name, witness))
            break
    assert hits, "flip of %r went unnoticed on all probe models" % switch
