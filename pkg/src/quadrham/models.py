"""Model configurations: validate config files and build groupoid models.

A model config is a JSON object.  The shape depends on the model kind:

    {
      "name": "a1_gm",
      "kind": "transformation",
      "group": {"kind": "torus", "names": ["g"]},
      "base": {"affine": ["x"], "torus": []},
      "action": {"kind": "monomial", "weights": [[1]]},
      "options": {"max_degree": 6}
    }

* ``kind: "transformation"`` needs ``group``, ``base`` and ``action``.
* ``kind: "pair"`` needs only ``group`` (a continuous group; the pair
  groupoid of its underlying space with the invariant frame).
* ``kind: "pair_frame"`` needs ``base`` and ``frame``, a square matrix of
  polynomial strings with ``frame[i][l]`` the coefficient of the l-th
  coordinate field in the i-th frame field.
* ``kind: "vector_bundle"`` needs ``base`` and an integer ``rank``.

Groups are ``{"kind": "torus"|"additive", "names": [...]}``,
``{"kind": "cyclic", "order": k}``, or an explicit
``{"kind": "finite", "elements": [...], "table": [[...]]}``.  Actions are
``{"kind": "trivial"}``, ``{"kind": "monomial", "weights": [[w_ia]]}``
(base variable i picks up character Π_a g_a^{w_ia}), or — for cyclic
groups — ``{"kind": "cyclic", "generator_images": [...]}`` giving the
pullback of each base variable along the generator.

Polynomial strings use ``+``/``-``, ``*`` between factors, ``^`` for
integer powers and rational coefficients: ``"x^2"``, ``"2*x"``,
``"t^-1"``, ``"x + 1/2*y^3"``.  Negative powers are only accepted on
torus variables.

``sign_overrides`` remaps the bundled sign conventions and is refused
unless the caller explicitly opts into unsafe mode.
"""

import hashlib
import json
import os
from fractions import Fraction

from .groupoids import (
    ActionModel,
    GroupModel,
    SpaceModel,
    build_pair_model,
    build_pair_model_from_frame,
    build_transformation_model,
    build_vector_bundle_model,
)
from .poly import RingHom
from .signs import SignConventions

_CONFIG_DIR = os.path.join(os.path.dirname(__file__), "configs")

BUNDLED_MODELS = ("bgm", "a1_gm", "gm_gm", "gm_z2", "pair_gm", "vb_a1",
                  "nonflat_pair")

_TOP_KEYS = {"name", "kind", "group", "base", "action", "frame", "rank",
             "options", "sign_overrides"}
_OPTION_KEYS = {"max_degree", "r_max", "p", "jobs", "format"}


class ConfigError(ValueError):
    """A model config is malformed (bad keys, types, or expressions)."""


# ---------------------------------------------------------------------------
# polynomial strings


def parse_poly(ring, text):
    """Parse a polynomial string like "2*x", "t^-1" or "x + 1/2*y^3"."""
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ConfigError("polynomial entry must be a string or int, got %r"
                          % (text,))
    s = str(text).replace(" ", "")
    if not s:
        raise ConfigError("empty polynomial entry")
    chunks, term, prev = [], "", ""
    for ch in s:
        if ch in "+-" and term and prev not in "^*":
            chunks.append(term)
            term = "" if ch == "+" else "-"
        else:
            term += ch
        prev = ch
    chunks.append(term)
    out = ring.zero()
    for chunk in chunks:
        out = out + _parse_term(ring, chunk)
    return out


def _parse_term(ring, chunk):
    coeff = Fraction(1)
    if chunk.startswith("-"):
        coeff, chunk = -coeff, chunk[1:]
    if not chunk or chunk.startswith("+"):
        raise ConfigError("malformed polynomial term %r" % chunk)
    exps = [0] * ring.nvars
    for factor in chunk.split("*"):
        name, sep, power = factor.partition("^")
        if name in ring.index:
            try:
                e = int(power) if sep else 1
            except ValueError:
                raise ConfigError("bad exponent in %r" % factor) from None
            exps[ring.index[name]] += e
        elif sep:
            raise ConfigError("unknown variable %r" % name)
        else:
            try:
                coeff *= Fraction(factor)
            except (ValueError, ZeroDivisionError):
                raise ConfigError(
                    "cannot parse %r (variables here: %s)"
                    % (factor, ", ".join(ring.names) or "none")) from None
    try:
        return ring.monomial(exps, coeff)
    except ValueError as exc:
        raise ConfigError("bad monomial %r: %s" % (chunk, exc)) from None


# ---------------------------------------------------------------------------
# config pieces


def _require(cfg, key, kind_name):
    if key not in cfg:
        raise ConfigError("%s config needs a %r entry" % (kind_name, key))
    return cfg[key]


def _name_list(value, what):
    if not isinstance(value, list) or not all(
            isinstance(nm, str) and nm for nm in value):
        raise ConfigError("%s must be a list of names" % what)
    return value


def _group_from_config(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("group config must be an object")
    kind = _require(cfg, "kind", "group")
    if kind in ("torus", "additive"):
        names = _name_list(_require(cfg, "names", "group"), "group names")
        try:
            return GroupModel(kind, names, (kind == "torus",) * len(names))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if kind == "cyclic":
        order = _require(cfg, "order", "cyclic group")
        if not isinstance(order, int) or isinstance(order, bool) or order < 1:
            raise ConfigError("cyclic group order must be a positive integer")
        return GroupModel.cyclic(order)
    if kind == "finite":
        elements = _require(cfg, "elements", "finite group")
        table = _require(cfg, "table", "finite group")
        try:
            return GroupModel.finite(elements, table)
        except (ValueError, IndexError, TypeError) as exc:
            raise ConfigError("bad finite group: %s" % exc) from None
    raise ConfigError("unknown group kind %r" % kind)


def _base_from_config(cfg):
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict) or not set(cfg) <= {"affine", "torus"}:
        raise ConfigError('base config must be {"affine": [...], "torus": [...]}')
    affine = _name_list(cfg.get("affine", []), "base affine names")
    torus = _name_list(cfg.get("torus", []), "base torus names")
    try:
        return SpaceModel(tuple(affine) + tuple(torus),
                          (False,) * len(affine) + (True,) * len(torus))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _action_from_config(group, base, cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("action config must be an object")
    kind = _require(cfg, "kind", "action")
    if kind == "trivial":
        return ActionModel.trivial(group, base)
    if kind == "monomial":
        if group.kind == "finite":
            raise ConfigError("monomial actions need a continuous group")
        weights = _require(cfg, "weights", "monomial action")
        if (not isinstance(weights, list) or len(weights) != base.e
                or not all(isinstance(row, list) and len(row) == group.nu
                           and all(isinstance(w, int) and not isinstance(w, bool)
                                   for w in row)
                           for row in weights)):
            raise ConfigError(
                "monomial weights must be %d rows of %d integers"
                % (base.e, group.nu))
        return ActionModel.monomial(group, base, weights)
    if kind == "cyclic":
        if group.kind != "finite":
            raise ConfigError("generator-image actions need a cyclic group")
        images = _require(cfg, "generator_images", "cyclic action")
        if not isinstance(images, list) or len(images) != base.e:
            raise ConfigError("cyclic action needs one generator image per "
                              "base variable")
        gen = RingHom(base.ring, base.ring,
                      [parse_poly(base.ring, img) for img in images])
        step = [base.ring.var(nm) for nm in base.names]
        images_per_element = [step]
        for _ in range(group.order - 1):
            step = [gen.apply(p) for p in step]
            images_per_element.append(step)
        return ActionModel.finite_from_images(group, base, images_per_element)
    raise ConfigError("unknown action kind %r" % kind)


def _signs_from_config(cfg, allow_unsafe):
    overrides = cfg.get("sign_overrides")
    if overrides is None:
        return None
    if not allow_unsafe:
        raise ConfigError(
            "sign_overrides change the verified sign conventions; pass the "
            "unsafe flag to use them")
    if not isinstance(overrides, dict):
        raise ConfigError("sign_overrides must be an object")
    signs = SignConventions()
    fields = {f for f in SignConventions.__dataclass_fields__}
    for key, value in overrides.items():
        if key not in fields:
            raise ConfigError("unknown sign switch %r (valid: %s)"
                              % (key, ", ".join(sorted(fields))))
        current = getattr(signs, key)
        if isinstance(current, bool):
            if not isinstance(value, bool):
                raise ConfigError("sign switch %r takes true/false" % key)
        elif not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError("sign switch %r takes an integer" % key)
        signs = type(signs)(**{**signs.__dict__, key: value})
    return signs


# ---------------------------------------------------------------------------
# building and hashing


def validate_options(options):
    if options is None:
        return {}
    if not isinstance(options, dict) or not set(options) <= _OPTION_KEYS:
        raise ConfigError("options may only set %s"
                          % ", ".join(sorted(_OPTION_KEYS)))
    for key in ("max_degree", "r_max", "p", "jobs"):
        if key in options:
            value = options[key]
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ConfigError("option %r must be a non-negative integer" % key)
    if "format" in options and options["format"] not in ("json", "csv"):
        raise ConfigError('option "format" must be "json" or "csv"')
    return dict(options)


def model_from_config(config, allow_unsafe=False):
    """Build the groupoid model a config describes.

    Raises ConfigError for malformed configs.  Structural failures of a
    well-formed config (non-flat frames aside, which build fine and are
    reported through flatness/operators_supported) surface as ModelError.
    """
    if not isinstance(config, dict):
        raise ConfigError("model config must be a JSON object")
    unknown = set(config) - _TOP_KEYS
    if unknown:
        raise ConfigError("unknown config keys: %s"
                          % ", ".join(sorted(unknown)))
    kind = _require(config, "kind", "model")
    name = config.get("name")
    if name is not None and not isinstance(name, str):
        raise ConfigError("model name must be a string")
    options = validate_options(config.get("options"))
    signs = _signs_from_config(config, allow_unsafe)
    if kind == "transformation":
        group = _group_from_config(_require(config, "group", "transformation"))
        base = _base_from_config(config.get("base"))
        action = _action_from_config(
            group, base, _require(config, "action", "transformation"))
        return build_transformation_model(group, base, action, signs=signs,
                                          options=options, name=name)
    if kind == "pair":
        group = _group_from_config(_require(config, "group", "pair"))
        if group.kind == "finite":
            raise ConfigError("pair models need a continuous group")
        return build_pair_model(group, signs=signs, options=options, name=name)
    if kind == "pair_frame":
        base = _base_from_config(_require(config, "base", "pair_frame"))
        rows = _require(config, "frame", "pair_frame")
        if (not isinstance(rows, list) or len(rows) != base.e
                or not all(isinstance(r, list) and len(r) == base.e
                           for r in rows)):
            raise ConfigError("frame must be a %d×%d matrix of polynomial "
                              "strings" % (base.e, base.e))
        frame = [[parse_poly(base.ring, entry) for entry in row]
                 for row in rows]
        return build_pair_model_from_frame(base, frame, signs=signs,
                                           options=options, name=name)
    if kind == "vector_bundle":
        base = _base_from_config(_require(config, "base", "vector_bundle"))
        rank = _require(config, "rank", "vector_bundle")
        if not isinstance(rank, int) or isinstance(rank, bool) or rank < 1:
            raise ConfigError("vector bundle rank must be a positive integer")
        return build_vector_bundle_model(base, rank, signs=signs,
                                         options=options, name=name)
    raise ConfigError("unknown model kind %r" % kind)


def model_hash(config):
    """Content fingerprint of the model a config defines.

    Hashes the model-defining fields only (kind, group, base, action,
    frame, rank, sign overrides) so relabelling a config or tweaking run
    options does not change the fingerprint.
    """
    if not isinstance(config, dict):
        raise ConfigError("model config must be a JSON object")
    defining = {key: config[key] for key in
                ("kind", "group", "base", "action", "frame", "rank",
                 "sign_overrides") if key in config}
    blob = json.dumps(defining, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# loading


def bundled_config(name):
    path = os.path.join(_CONFIG_DIR, name + ".json")
    if name not in BUNDLED_MODELS or not os.path.exists(path):
        raise ConfigError("unknown bundled model %r (bundled: %s)"
                          % (name, ", ".join(BUNDLED_MODELS)))
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_config(spec):
    """Load a config from a bundled model name or a JSON file path."""
    if not isinstance(spec, str):
        raise ConfigError("model spec must be a bundled name or a file path")
    if spec in BUNDLED_MODELS:
        return bundled_config(spec)
    if not os.path.exists(spec):
        raise ConfigError("no bundled model or config file %r" % spec)
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("config %s is not valid JSON: %s"
                          % (spec, exc)) from None


def load_model(spec, allow_unsafe=False):
    """Resolve a bundled name or config path to (model, config)."""
    config = load_config(spec)
    return model_from_config(config, allow_unsafe=allow_unsafe), config
