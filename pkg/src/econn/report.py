"""Machine-readable run reports and their text rendering.

Reports are plain nested dicts serialized as UTF-8 JSON. Floats go through
``repr``, which is the shortest string that parses back to the same double,
so a load/dump cycle reproduces every number exactly. Key order is fixed by
construction and no wall-clock data is stored unless asked for, which keeps
reports from identical inputs byte-identical.
"""

import json
import math

FORMAT = "econn-report/1"


def _clean(obj):
    """Replace non-finite floats with ``None`` and numpy scalars with Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _clean(obj.tolist())
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    return obj


def new_report(command, config):
    return {
        "format": FORMAT,
        "command": command,
        "config": config,
        "validation": None,
        "checks": [],
        "spot_values": None,
        "oracle": None,
        "summary": None,
    }


def finalize(report, exit_code, timings=None):
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    val = report.get("validation")
    if val is not None:
        failed = [f"validation: {c['name']}" for c in val["checks"] if not c["passed"]] + failed
    report["summary"] = {"passed": exit_code == 0, "exit_code": exit_code,
                         "failed": failed}
    if timings is not None:
        report["timings"] = timings
    return report


def dumps(report):
    return json.dumps(_clean(report), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def loads(text):
    data = json.loads(text)
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise ValueError("not an econn report")
    return data


def _check_line(c):
    status = "PASS" if c["passed"] else "FAIL"
    rmax = c["residual_max"]
    return (f"  {status}  {c['name']:<44s} max={_num(rmax)} tol={c['tolerance']:.1e} "
            f"n={c['points_evaluated']}")


def _num(x):
    return "n/a" if x is None else f"{x:.3e}"


def render(report):
    """Human-readable text for a report dict."""
    cfg = report["config"]
    spec = cfg.get("spec", {})
    out = [f"econn {report['command']}: {spec.get('kind')} (n={spec.get('n')}, "
           f"d={cfg.get('dimension')})",
           f"  mode={cfg.get('mode')} points={cfg.get('points')} seed={cfg.get('seed')}"
           + (f" variant={cfg['variant']}" if cfg.get("variant") else "")]
    val = report.get("validation")
    if val is not None:
        out.append("structure validation:")
        out.extend(_check_line(c) for c in val["checks"])
    if report.get("checks"):
        out.append("identities:")
        out.extend(_check_line(c) for c in report["checks"])
    spot = report.get("spot_values")
    if spot:
        out.append("spot values (max over points):")
        for k, v in spot.items():
            out.append(f"  {k:<44s} {_num(v)}")
    orc = report.get("oracle")
    if orc:
        out.append("oracle comparison:")
        out.append(f"  {'point':>5s} {'rank':>9s} {'path':>6s} {'residual':>10s} "
                   + " ".join(f"{k:>10s}" for k in orc["variant_names"]))
        for i, row in enumerate(orc["points"]):
            cells = " ".join(_num(row["comparisons"][k]["discrepancy"]).rjust(10)
                             for k in orc["variant_names"])
            out.append(f"  {i:>5d} {row['rank']:>4d}/{row['unknowns']:<4d} {row['path']:>6s} "
                       f"{_num(row['residual']):>10s} {cells}")
        s = orc["summary"]
        if s.get("tie"):
            out.append(f"  last-term readings give identical torsion here (winner by order: "
                       f"{s['winner']})")
        else:
            worst = ", ".join(f"{k}={_num(v)}" for k, v in s["variants"].items())
            out.append(f"  last-term reading with smallest discrepancy: {s['winner']} ({worst})")
        if not s.get("unique", True):
            out.append("  system is rank deficient at some points: discrepancies are "
                       "distances to the nearest minimizer")
    summ = report.get("summary")
    if summ:
        out.append(f"result: {'PASS' if summ['passed'] else 'FAIL'} (exit {summ['exit_code']})")
    if report.get("timings"):
        out.append("timings: " + ", ".join(f"{k}={v:.3f}s" for k, v in report["timings"].items()))
    return "\n".join(out) + "\n"
