"""Batch front door: run model commands and emit deterministic reports.

    quadrham validate   --model bgm --max-degree 4
    quadrham cohomology --model a1_gm --max-degree 6
    quadrham pages      --model bgm --max-degree 6 --r 3
    quadrham fixed-p    --model bgm --p 2 --max-degree 4
    quadrham oracle     --model gm_gm --max-degree 3
    quadrham cartan     --model a1_gm --max-degree 6
    quadrham natural    --model bgm --target a1_gm
    quadrham compare    lhs.json rhs.json

``--model`` takes a bundled model name or a JSON config path.  Reports go
to stdout as JSON (``--format csv`` for the flat tables).  Exit codes:
0 success, 1 identity/oracle violation or nonempty diff (with witnesses),
2 malformed config or inapplicable request.  Set QUADRHAM_CACHE_DIR to
cache successful reports keyed by model content and command arguments.
"""

import argparse
import hashlib
import json
import os
import sys

from .cohomology import (
    cartan_total,
    fixed_p_pages,
    oracle_total,
    spectral_pages,
    total_cohomology,
)
from .groupoids import ModelError, check_flatness, validate_structure
from .models import ConfigError, load_config, model_from_config, model_hash, parse_poly
from .morphisms import GroupoidMorphism, check_chain_map, induced_cohomology_map
from .reports import (
    base_report,
    diff_reports,
    pages_payload,
    read_report,
    render,
    witness,
)
from .truncation import (
    Grading,
    Truncation,
    TruncationError,
    broken_identity,
    oracle_operator,
    total_operator,
)

CACHE_ENV = "QUADRHAM_CACHE_DIR"


# ---------------------------------------------------------------------------
# shared helpers


def _load(args):
    config = load_config(args.model)
    model = model_from_config(
        config, allow_unsafe=getattr(args, "unsafe_sign_overrides", False))
    return model, config


def _degree(args, config, fallback=4):
    if args.max_degree is not None:
        if args.max_degree < 0:
            raise ConfigError("--max-degree must be non-negative")
        return args.max_degree
    return config.get("options", {}).get("max_degree", fallback)


def _format(args, config):
    if args.format is not None:
        return args.format
    return config.get("options", {}).get("format", "json")


def _anchor_fields(model):
    """Render the anchor image of each vertical generator as a vector
    field in base coordinates ("x*d/dx", "t*d/dt", …)."""
    fields = {}
    if model.group is None or model.group.kind == "finite":
        return fields
    for a, gname in enumerate(model.group.names):
        terms = []
        for i, xname in enumerate(model.base.names):
            if model.kind == "pair":
                # the anchor sends the a-th vertical generator to the a-th
                # frame field, whose coefficients multiply plain d/dx fields
                c = model.frame_coeffs[a][i]
                field = "d/d%s" % xname
            else:
                c = model.anchor[i][a]
                field = ("%s*d/d%s" % (xname, xname) if model.base.laurent[i]
                         else "d/d%s" % xname)
            if c.is_zero():
                continue
            cs = str(c)
            if cs == "1":
                terms.append(field)
            elif len(c.terms) > 1:
                terms.append("(%s)*%s" % (cs, field))
            else:
                terms.append("%s*%s" % (cs, field))
        fields[gname] = " + ".join(terms) if terms else "0"
    return fields


def _rep_witnesses(rep_lines):
    out = []
    for deg in sorted(rep_lines):
        for line in rep_lines[deg]:
            out.append(witness("representative", degree=deg, element=line))
    return out


# ---------------------------------------------------------------------------
# commands


def _cmd_validate(args):
    model, config = _load(args)
    max_degree = _degree(args, config)
    report = base_report("validate", model_hash(config))
    report["details"]["anchors"] = _anchor_fields(model)
    checks = report["details"]["checks"] = []

    flat = check_flatness(model)
    checks.append({"name": "flatness", "ok": flat == "flat", "detail": flat})
    if flat != "flat":
        report["witnesses"].append(witness("flatness", detail=flat))
        return report, 1
    reason = model.operators_supported()
    checks.append({"name": "operator support", "ok": reason is None,
                   "detail": reason or "supported"})
    if reason is not None:
        report["witnesses"].append(witness("operator-support", detail=reason))
        return report, 1

    validate_structure(model, n_max=2)
    checks.append({"name": "structure constants", "ok": True,
                   "detail": "levels 0..2"})

    grading = Grading(model)
    stages = (1, 2) if grading.uses_stage else (0,)
    elements = 0
    sectors = 0
    for radius in range(3):
        secs = grading.sectors_at_radius(radius)
        if not secs:
            break
        for sector in secs:
            sectors += 1
            for stage in stages:
                tr = Truncation(model, sector, stage, max_degree + 1,
                                mode="k")
                tr.check_square(tr.assemble(total_operator), broken_identity)
                elements += sum(len(b) for b in tr.bases.values())
                amb = Truncation(model, sector, stage, max_degree + 1,
                                 mode="ambient")
                amb.check_square(amb.assemble(oracle_operator))
    checks.append({"name": "graded identities", "ok": True,
                   "detail": "square of the differential on %d elements "
                             "across %d sectors" % (elements, sectors)})
    report["stabilized"] = True
    return report, 0


def _cmd_cohomology(args):
    model, config = _load(args)
    max_degree = _degree(args, config)
    res = total_cohomology(model, max_degree, jobs=args.jobs)
    report = base_report("cohomology", model_hash(config))
    report["degrees"] = res["degrees"]
    report["dims"] = res["dims"]
    report["stabilized"] = res["stabilized"]
    report["witnesses"] = _rep_witnesses(res["witnesses"])
    report["details"] = {"sectors": res["sectors"],
                         "scan_complete": res["scan_complete"]}
    return report, 0


def _cmd_oracle(args):
    model, config = _load(args)
    max_degree = _degree(args, config)
    res = oracle_total(model, max_degree, jobs=args.jobs)
    report = base_report("oracle", model_hash(config))
    report["degrees"] = res["degrees"]
    report["dims"] = res["dims"]
    report["stabilized"] = res["stabilized"]
    report["details"] = {"scan_complete": res["scan_complete"]}
    return report, 0


def _cmd_cartan(args):
    model, config = _load(args)
    max_degree = _degree(args, config)
    res = cartan_total(model, max_degree, jobs=args.jobs)
    report = base_report("cartan", model_hash(config))
    report["degrees"] = res["degrees"]
    report["dims"] = res["dims"]
    report["stabilized"] = res["stabilized"]
    report["details"] = {"scan_complete": res["scan_complete"]}
    return report, 0


def _pages_report(command, config, res):
    report = base_report(command, model_hash(config))
    report["degrees"] = res["degrees"]
    report["dims"] = res["dims"]
    report["pages"] = pages_payload(res["pages"])
    report["stabilized"] = res["stabilized"]
    report["details"] = {
        "ranks": pages_payload(res["ranks"], value_key="rank"),
        "stable_from": res["stable_from"],
        "scan_complete": res["scan_complete"],
    }
    return report


def _cmd_pages(args):
    model, config = _load(args)
    max_degree = _degree(args, config)
    res = spectral_pages(model, max_degree, r_max=args.r, jobs=args.jobs)
    return _pages_report("pages", config, res), 0


def _cmd_fixed_p(args):
    model, config = _load(args)
    max_degree = _degree(args, config)
    p = args.p if args.p is not None else config.get("options", {}).get("p")
    if p is None:
        raise ConfigError("fixed-p needs --p (the symbol degree of the rows)")
    res = fixed_p_pages(model, p, max_degree, r_max=args.r, jobs=args.jobs)
    return _pages_report("fixed-p", config, res), 0


def _morphism_from_args(args, source, target):
    data = {}
    if args.map is not None:
        try:
            with open(args.map, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("cannot read map file %s: %s"
                              % (args.map, exc)) from None
        if not isinstance(data, dict) or not set(data) <= {
                "group_matrix", "base_images"}:
            raise ConfigError(
                'map file must be {"group_matrix": [[...]], '
                '"base_images": [...]}')
    matrix = data.get("group_matrix")
    if matrix is None:
        if source.nu != target.nu:
            raise ConfigError(
                "the default identity pairing needs equal group ranks "
                "(%d vs %d); give an explicit group_matrix"
                % (source.nu, target.nu))
        matrix = [[1 if i == j else 0 for j in range(source.nu)]
                  for i in range(target.nu)]
    images = data.get("base_images")
    if images is None:
        # name-matching defaults: target variables present in the source
        # base pull back to themselves, absent ones to zero
        images = [nm if nm in source.base.ring.index else "0"
                  for nm in target.base.names]
    if not isinstance(images, list) or len(images) != target.base.e:
        raise ConfigError("base_images needs one entry per target base "
                          "variable (%d)" % target.base.e)
    images = [parse_poly(source.base.ring, img) for img in images]
    try:
        return GroupoidMorphism(source, target, matrix, images)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ConfigError("bad morphism datum: %s" % exc) from None


def _cmd_natural(args):
    source, config = _load(args)
    target_config = load_config(args.target)
    target = model_from_config(target_config)
    max_degree = _degree(args, config)
    morphism = _morphism_from_args(args, source, target)
    chain = check_chain_map(morphism, max_degree)
    report = base_report("natural", model_hash(config))
    report["degrees"] = list(range(max_degree + 1))
    report["details"] = {
        "target_hash": model_hash(target_config),
        "chain_map_checked": chain["checked"],
        "chain_map_ok": chain["ok"],
    }
    if not chain["ok"]:
        report["witnesses"] = [witness("naturality", detail=s)
                               for s in chain["witnesses"]]
        return report, 1
    induced = induced_cohomology_map(morphism, max_degree, jobs=args.jobs)
    report["stabilized"] = induced["stabilized"]
    report["details"].update({
        "ranks": induced["ranks"],
        "source_dims": induced["source_dims"],
        "target_dims": induced["target_dims"],
        "isomorphism": induced["isomorphism"],
    })
    return report, 0


def _cmd_compare(args):
    lhs = read_report(args.reports[0])
    rhs = read_report(args.reports[1])
    diffs = diff_reports(lhs, rhs)
    report = base_report("compare")
    report["degrees"] = lhs.get("degrees")
    report["witnesses"] = diffs
    report["details"] = {
        "lhs": {"command": lhs.get("command"),
                "model_hash": lhs.get("model_hash")},
        "rhs": {"command": rhs.get("command"),
                "model_hash": rhs.get("model_hash")},
        "diff_count": len(diffs),
    }
    return report, 1 if diffs else 0


# ---------------------------------------------------------------------------
# cache


def _cache_path(args, config):
    root = os.environ.get(CACHE_ENV)
    if not root or args.command in ("compare", "natural"):
        return None
    key = json.dumps({
        "command": args.command,
        "model": model_hash(config),
        "max_degree": _degree(args, config),
        "r": getattr(args, "r", None),
        "p": getattr(args, "p", None),
    }, sort_keys=True)
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()
    return os.path.join(root, digest + ".json")


# ---------------------------------------------------------------------------
# wiring


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="quadrham",
        description="flat groupoid connections: cohomology, filtration "
                    "pages and identity validation over exact rationals")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("--model", required=True,
                           help="bundled model name or JSON config path")
            p.add_argument("--max-degree", type=int, default=None,
                           help="total degree bound (default: config "
                                "options, else 4)")
            p.add_argument("--jobs", type=int, default=1,
                           help="sector workers (results are merged "
                                "deterministically)")
            p.add_argument("--unsafe-sign-overrides", action="store_true",
                           help="honor sign_overrides in the config; the "
                                "mutated conventions are unverified")
        p.add_argument("--format", choices=("json", "csv"), default=None,
                       help="report format (default json)")

    for name, fn, extra in (
            ("validate", _cmd_validate, ()),
            ("cohomology", _cmd_cohomology, ()),
            ("pages", _cmd_pages, ("r",)),
            ("fixed-p", _cmd_fixed_p, ("r", "p")),
            ("oracle", _cmd_oracle, ()),
            ("cartan", _cmd_cartan, ()),
            ("natural", _cmd_natural, ("target", "map")),
    ):
        p = sub.add_parser(name)
        common(p)
        if "r" in extra:
            p.add_argument("--r", type=int, default=None,
                           help="last page to compute (default "
                                "max-degree + 2)")
        if "p" in extra:
            p.add_argument("--p", type=int, default=None,
                           help="symbol degree of the fixed row")
        if "target" in extra:
            p.add_argument("--target", required=True,
                           help="target model (bundled name or config path)")
            p.add_argument("--map", default=None,
                           help="JSON file with group_matrix/base_images "
                                "(default: identity pairing, name-matching "
                                "base images)")
        p.set_defaults(fn=fn)

    p = sub.add_parser("compare")
    p.add_argument("reports", nargs=2, help="two report JSON files")
    common(p, model=False)
    p.set_defaults(fn=_cmd_compare)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    fmt = args.format or "json"
    try:
        cache = None
        if getattr(args, "model", None) is not None:
            config = load_config(args.model)
            fmt = _format(args, config)
            cache = _cache_path(args, config)
            if cache is not None and os.path.exists(cache):
                with open(cache, "r", encoding="utf-8") as fh:
                    report = json.load(fh)
                sys.stdout.write(render(report, fmt))
                return 0
        report, code = args.fn(args)
        if cache is not None and code == 0:
            os.makedirs(os.path.dirname(cache), exist_ok=True)
            with open(cache, "w", encoding="utf-8") as fh:
                fh.write(render(report, "json"))
    except ConfigError as exc:
        report = base_report(args.command)
        report["witnesses"] = [witness("config-error", detail=str(exc))]
        code = 2
    except NotImplementedError as exc:
        report = base_report(args.command)
        report["witnesses"] = [witness("refusal", detail=str(exc))]
        code = 2
    except ModelError as exc:
        report = base_report(args.command)
        report["witnesses"] = [witness("identity-violation",
                                       identity=exc.identity,
                                       detail=str(exc.witness))]
        code = 1
    except TruncationError as exc:
        report = base_report(args.command)
        report["witnesses"] = [witness("truncation", detail=str(exc))]
        code = 1
    sys.stdout.write(render(report, fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())
