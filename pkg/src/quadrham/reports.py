"""Deterministic report objects for the command-line front door.

Every report is a JSON object with the same seven top-level keys —
"command", "model_hash", "degrees", "dims", "pages", "witnesses",
"stabilized" — with null standing in for fields a command does not
produce, plus a "details" object for command-specific extras.  Rendering
sorts keys and never embeds timing, so a fixed config and version give
byte-identical output.
"""

import csv
import io
import json

from .models import ConfigError

REPORT_KEYS = ("command", "model_hash", "degrees", "dims", "pages",
               "witnesses", "stabilized")


def base_report(command, model_hash=None):
    report = {key: None for key in REPORT_KEYS}
    report["command"] = command
    report["model_hash"] = model_hash
    report["witnesses"] = []
    report["details"] = {}
    return report


def witness(kind, **fields):
    entry = {"kind": kind}
    entry.update(fields)
    return entry


def pages_payload(pages_by_r, value_key="dim"):
    """{"E0": [{"m","n","dim"}, …], …} sorted by (m, n) within each page."""
    out = {}
    for r in sorted(pages_by_r):
        out["E%d" % r] = [
            {"m": m, "n": n, value_key: pages_by_r[r][(m, n)]}
            for (m, n) in sorted(pages_by_r[r])
        ]
    return out


def render_json(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def render_csv(report):
    """Flat table export: pages as page,m,n,dim rows, dims as degree,dim
    rows, diffs and witnesses as their own sections."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    if report.get("pages"):
        out.writerow(["page", "m", "n", "dim"])
        for page in sorted(report["pages"]):
            for cell in report["pages"][page]:
                out.writerow([page, cell["m"], cell["n"], cell["dim"]])
    elif report.get("dims") is not None:
        out.writerow(["degree", "dim"])
        for deg, dim in zip(report["degrees"], report["dims"]):
            out.writerow([deg, dim])
    else:
        out.writerow(["kind", "detail"])
        for w in report.get("witnesses") or []:
            rest = {k: v for k, v in sorted(w.items()) if k != "kind"}
            out.writerow([w.get("kind", ""),
                          "; ".join("%s=%s" % kv for kv in rest.items())])
    return buf.getvalue()


def render(report, fmt):
    if fmt == "csv":
        return render_csv(report)
    return render_json(report)


# ---------------------------------------------------------------------------
# report comparison


def read_report(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read report %s: %s" % (path, exc)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError("report %s is not valid JSON: %s"
                          % (path, exc)) from None
    if not isinstance(data, dict):
        raise ConfigError("report %s is not a JSON object" % path)
    return data


def _page_cells(report):
    cells = {}
    for page, rows in (report.get("pages") or {}).items():
        for cell in rows:
            cells[(page, cell["m"], cell["n"])] = cell["dim"]
    return cells


def diff_reports(lhs, rhs):
    """Per-degree and per-(page, m, n) differences between two reports.

    Raises ConfigError when the degree ranges are incompatible.
    """
    if lhs.get("degrees") != rhs.get("degrees"):
        raise ConfigError(
            "incompatible degree ranges: %s vs %s"
            % (lhs.get("degrees"), rhs.get("degrees")))
    diffs = []
    ld, rd = lhs.get("dims"), rhs.get("dims")
    if ld is not None and rd is not None:
        for deg, (a, b) in enumerate(zip(ld, rd)):
            if a != b:
                diffs.append(witness("dim-diff", degree=deg, lhs=a, rhs=b))
    elif (ld is None) != (rd is None):
        diffs.append(witness("dim-diff", degree=None, lhs=ld, rhs=rd))
    lc, rc = _page_cells(lhs), _page_cells(rhs)
    for key in sorted(set(lc) | set(rc)):
        if lc.get(key, 0) != rc.get(key, 0):
            page, m, n = key
            diffs.append(witness("page-diff", page=page, m=m, n=n,
                                 lhs=lc.get(key, 0), rhs=rc.get(key, 0)))
    return diffs
