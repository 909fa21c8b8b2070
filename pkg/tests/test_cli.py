"""Command-line surface: exit codes, report schema, determinism, cache."""

import json

from quadrham.cli import main
from quadrham.reports import REPORT_KEYS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_cohomology_report_schema_and_dims(capsys):
    code, out = run(capsys, "cohomology", "--model", "bgm", "--max-degree", "4")
    assert code == 0
    report = json.loads(out)
    assert set(REPORT_KEYS) <= set(report)
    assert report["command"] == "cohomology"
    assert report["dims"] == [1, 0, 1, 0, 1]
    assert report["degrees"] == [0, 1, 2, 3, 4]
    assert report["stabilized"] is True
    assert len(report["model_hash"]) == 64
    kinds = {w["kind"] for w in report["witnesses"]}
    assert kinds == {"representative"}


def test_reports_are_byte_deterministic(capsys):
    _, first = run(capsys, "pages", "--model", "gm_gm", "--max-degree", "3")
    _, second = run(capsys, "pages", "--model", "gm_gm", "--max-degree", "3")
    assert first == second
    assert first.endswith("\n")


def test_csv_format(capsys):
    code, out = run(capsys, "cohomology", "--model", "gm_z2",
                    "--max-degree", "2", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "degree,dim"
    assert lines[1:] == ["0,1", "1,0", "2,0"]

    code, out = run(capsys, "pages", "--model", "bgm", "--max-degree", "2",
                    "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "page,m,n,dim"


def test_cache_round_trip(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("QUADRHAM_CACHE_DIR", str(tmp_path))
    code, first = run(capsys, "cohomology", "--model", "gm_z2",
                      "--max-degree", "2")
    assert code == 0
    cached = list(tmp_path.glob("*.json"))
    assert len(cached) == 1
    code, second = run(capsys, "cohomology", "--model", "gm_z2",
                       "--max-degree", "2")
    assert code == 0
    assert first == second
    # a different degree is a different cache entry, not a stale hit
    code, third = run(capsys, "cohomology", "--model", "gm_z2",
                      "--max-degree", "1")
    assert code == 0
    assert json.loads(third)["degrees"] == [0, 1]
    assert len(list(tmp_path.glob("*.json"))) == 2


def test_validate_reports_checks(capsys):
    code, out = run(capsys, "validate", "--model", "gm_gm",
                    "--max-degree", "2")
    assert code == 0
    report = json.loads(out)
    names = [c["name"] for c in report["details"]["checks"]]
    assert names == ["flatness", "operator support", "structure constants",
                     "graded identities"]
    assert all(c["ok"] for c in report["details"]["checks"])
    assert report["details"]["anchors"] == {"g": "t*d/dt"}


def test_validate_nonflat_pair_fails_with_bracket_witness(capsys):
    code, out = run(capsys, "validate", "--model", "nonflat_pair",
                    "--max-degree", "2")
    assert code == 1
    report = json.loads(out)
    (w,) = report["witnesses"]
    assert w["kind"] == "flatness"
    assert "2*x" in w["detail"]


def test_unknown_model_is_a_config_error(capsys):
    code, out = run(capsys, "cohomology", "--model", "not_a_model")
    assert code == 2
    report = json.loads(out)
    assert report["witnesses"][0]["kind"] == "config-error"


def test_fixed_p_needs_a_row(capsys):
    code, out = run(capsys, "fixed-p", "--model", "bgm", "--max-degree", "2")
    assert code == 2
    assert "--p" in json.loads(out)["witnesses"][0]["detail"]
    code, out = run(capsys, "fixed-p", "--model", "bgm", "--max-degree", "4",
                    "--p", "2")
    assert code == 0
    report = json.loads(out)
    assert {"m": 2, "n": 0, "dim": 1} in report["pages"]["E1"]


def test_cartan_refuses_pair_models(capsys):
    code, out = run(capsys, "cartan", "--model", "pair_gm", "--max-degree", "2")
    assert code == 2
    assert json.loads(out)["witnesses"][0]["kind"] == "refusal"


def test_natural_default_map_is_the_restriction(capsys):
    code, out = run(capsys, "natural", "--model", "bgm", "--target", "a1_gm",
                    "--max-degree", "3")
    assert code == 0
    details = json.loads(out)["details"]
    assert details["chain_map_ok"] is True
    assert details["isomorphism"] is True
    assert details["ranks"] == [1, 0, 1, 0]
    assert details["source_dims"] == details["target_dims"]


def test_natural_with_explicit_map_file(capsys, tmp_path):
    path = tmp_path / "sq.json"
    path.write_text(json.dumps({"group_matrix": [[2]], "base_images": []}))
    code, out = run(capsys, "natural", "--model", "bgm", "--target", "bgm",
                    "--max-degree", "3", "--map", str(path))
    assert code == 0
    assert json.loads(out)["details"]["isomorphism"] is True
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"base_images": ["x"]}))
    code, out = run(capsys, "natural", "--model", "bgm", "--target", "a1_gm",
                    "--max-degree", "2", "--map", str(bad))
    assert code == 2


def test_compare_reports(capsys, tmp_path):
    def save(name, *argv):
        code, out = run(capsys, *argv)
        assert code == 0
        p = tmp_path / name
        p.write_text(out)
        return str(p)

    a = save("a.json", "cohomology", "--model", "a1_gm", "--max-degree", "2")
    b = save("b.json", "cohomology", "--model", "gm_gm", "--max-degree", "2")
    c = save("c.json", "cohomology", "--model", "gm_gm", "--max-degree", "3")

    code, out = run(capsys, "compare", a, a)
    assert code == 0
    assert json.loads(out)["details"]["diff_count"] == 0

    code, out = run(capsys, "compare", a, b)
    assert code == 1
    report = json.loads(out)
    assert report["details"]["diff_count"] >= 1
    assert any(w["kind"] == "dim-diff" and w["degree"] == 2
               for w in report["witnesses"])

    code, out = run(capsys, "compare", a, c)
    assert code == 2
    assert json.loads(out)["witnesses"][0]["kind"] == "config-error"


def test_sign_overrides_gate_and_detection(capsys, tmp_path):
    from quadrham.models import bundled_config

    config = dict(bundled_config("gm_gm"))
    config["sign_overrides"] = {"contraction_sign": 1}
    path = tmp_path / "mutant.json"
    path.write_text(json.dumps(config))

    code, out = run(capsys, "validate", "--model", str(path),
                    "--max-degree", "2")
    assert code == 2
    assert "unsafe" in json.loads(out)["witnesses"][0]["detail"]

    code, out = run(capsys, "validate", "--model", str(path),
                    "--max-degree", "2", "--unsafe-sign-overrides")
    assert code == 1
    report = json.loads(out)
    (w,) = report["witnesses"]
    assert w["kind"] == "identity-violation"
    assert w["identity"]


def test_negative_degree_is_refused(capsys):
    code, out = run(capsys, "cohomology", "--model", "bgm",
                    "--max-degree", "-1")
    assert code == 2
