"""Command-line front end: ``econn validate|torsion|oracle|report``."""

import argparse
import sys
import time
from functools import partial

import numpy as np

from . import report as rep
from . import torsion as tor
from .checks import IdentityCheck
from .errors import EngineError, SpecParseError
from .specfile import build, parse_file
from .structures import validate_weak_acm
from .tolerances import MODES, default_mode, tolerances
from .verify import (ORACLE_MAX_DIM, Oracle, identity_suite, metricity_tensor,
                     sasakian_spot_residuals, solve_least_squares)

EXIT_PASS = 0
EXIT_IDENTITY = 1
EXIT_SPEC = 2

VARIANTS = ("weak", "acm", "special", "product")


class RunConfig:
    def __init__(self, args):
        if args.points < 1:
            raise SpecParseError("--points must be at least 1", field="points")
        if args.seed < 0:
            raise SpecParseError("--seed must be non-negative", field="seed")
        self.spec_path = args.spec
        self.spec = parse_file(args.spec)
        self.points = args.points
        self.seed = args.seed
        self.mode = args.mode or default_mode()
        overrides = {}
        for item in args.tol or []:
            name, sep, value = item.partition("=")
            try:
                if not sep:
                    raise ValueError
                overrides[name.strip()] = float(value)
            except ValueError:
                raise SpecParseError(f"--tol expects NAME=VALUE, got {item!r}",
                                     field="tol") from None
        try:
            self.tol = tolerances(self.mode, overrides)
        except KeyError as exc:
            raise SpecParseError(str(exc.args[0]), field="tol") from None
        self.overrides = overrides
        self.variant = getattr(args, "variant", None)
        self.qt_variant = getattr(args, "qt_variant", tor.DEFAULT_QT_VARIANT)
        self.impose_qt = not getattr(args, "no_qt", False)
        self.output_path = args.out
        self.timings = args.timings

    def echo(self, bundle):
        return {
            "spec_path": self.spec_path,
            "spec": self.spec.to_dict(),
            "dimension": bundle.dim,
            "points": self.points,
            "seed": self.seed,
            "mode": self.mode,
            "tolerances": self.tol,
            "variant": self.variant,
            "qt_variant": self.qt_variant,
            "impose_qt": self.impose_qt,
        }


def torsion_for(bundle, variant, qt_variant=tor.DEFAULT_QT_VARIANT):
    """Torsion entry point for a CLI variant name and bundle type."""
    contact = bundle.is_contact
    if variant == "weak":
        fn = tor.torsion_weak_acm if contact else tor.torsion_weak_hermitian
        return partial(fn, variant=qt_variant)
    if variant == "acm":
        return tor.torsion_acm if contact else tor.torsion_acm_hermitian
    if variant == "special":
        return tor.torsion_special_acm if contact else tor.torsion_special_hermitian
    if variant == "product":
        return tor.torsion_product_lambda
    raise SpecParseError(f"unknown variant {variant!r}", field="variant")


class _Clock:
    def __init__(self):
        self.stages = {}

    def stage(self, name, start):
        self.stages[name] = time.perf_counter() - start


def _validation(cfg, bundle, sample):
    return validate_weak_acm(bundle, sample, cfg.tol["structure_tol"])


def _setup(cfg):
    bundle = build(cfg.spec)
    sample = bundle.sample(cfg.points, cfg.seed)
    return bundle, sample


def cmd_validate(cfg):
    clock = _Clock()
    t0 = time.perf_counter()
    bundle, sample = _setup(cfg)
    report = rep.new_report("validate", cfg.echo(bundle))
    val = _validation(cfg, bundle, sample)
    report["validation"] = val.to_dict()
    Qs = [bundle.values(p).get("Q") for p in sample[:1]]
    if Qs and Qs[0] is not None:
        report["spot_values"] = {"max |Q - I|": float(np.abs(Qs[0] - np.eye(bundle.dim)).max())}
    clock.stage("validate", t0)
    code = EXIT_PASS if val.passed else EXIT_IDENTITY
    return rep.finalize(report, code, clock.stages if cfg.timings else None)


def cmd_torsion(cfg):
    clock = _Clock()
    t0 = time.perf_counter()
    bundle, sample = _setup(cfg)
    variant = cfg.variant or "weak"
    report = rep.new_report("torsion", cfg.echo(bundle))
    val = _validation(cfg, bundle, sample)
    report["validation"] = val.to_dict()
    clock.stage("validate", t0)
    t0 = time.perf_counter()
    fn = torsion_for(bundle, variant, cfg.qt_variant)
    checks = identity_suite(bundle, fn, sample, cfg.mode, cfg.overrides,
                            special=(variant == "special"))
    clock.stage("identities", t0)
    t0 = time.perf_counter()
    spot = {"max |T|": 0.0}
    sasaki = {}
    for p in sample:
        geo = bundle.at(p, cfg.mode)
        T = fn(geo)
        spot["max |T|"] = max(spot["max |T|"], float(np.abs(T).max()))
        if bundle.params.get("kind") == "sasakian_heisenberg":
            for k, v in sasakian_spot_residuals(geo, T).items():
                sasaki.setdefault(k, []).append(v)
    for k, vals in sasaki.items():
        checks.append(IdentityCheck.from_residuals(f"spot: {k}", vals, cfg.tol["assembly_tol"]))
        spot[k] = max(vals)
    report["spot_values"] = spot
    report["checks"] = [c.to_dict() for c in checks]
    clock.stage("spot_values", t0)
    ok = val.passed and all(c.passed for c in checks)
    return rep.finalize(report, EXIT_PASS if ok else EXIT_IDENTITY,
                        clock.stages if cfg.timings else None)


def cmd_oracle(cfg):
    clock = _Clock()
    t0 = time.perf_counter()
    bundle, sample = _setup(cfg)
    if bundle.dim > ORACLE_MAX_DIM:
        raise SpecParseError(f"oracle runs are limited to d <= {ORACLE_MAX_DIM}, "
                             f"spec gives d = {bundle.dim}", field="structure.n")
    report = rep.new_report("oracle", cfg.echo(bundle))
    val = _validation(cfg, bundle, sample)
    report["validation"] = val.to_dict()
    formula = torsion_for(bundle, cfg.variant or "weak", cfg.qt_variant)
    names = list(tor.QT_VARIANTS) + ["formula"]
    rows = []
    worst = {v: 0.0 for v in tor.QT_VARIANTS}
    res = {"formula": [], "solve residual": [], "soundness": [], "paths": []}
    unique = True
    for p in sample:
        geo = bundle.at(p, cfg.mode)
        orc = Oracle(geo, cfg.impose_qt)
        sol = orc.solution()
        unique = unique and sol.unique
        for v in tor.QT_VARIANTS:
            fv = tor.torsion_weak_acm if bundle.is_contact else tor.torsion_weak_hermitian
            T = fv(geo, variant=v)
            sol.comparisons[v] = {"discrepancy": orc.discrepancy(T), **orc.certificate(T)}
            worst[v] = max(worst[v], sol.comparisons[v]["discrepancy"])
        T = formula(geo)
        sol.comparisons["formula"] = {"discrepancy": orc.discrepancy(T), **orc.certificate(T)}
        res["formula"].append(sol.comparisons["formula"]["discrepancy"])
        res["solve residual"].append(sol.residual)
        # plugging the minimizer back into the metricity evaluator
        direct = float(np.abs(metricity_tensor(geo, sol.torsion)).max())
        res["soundness"].append(abs(direct - sol.metricity_residual))
        if sol.unique:
            xn = solve_least_squares(orc.A, orc.rhs, "normal")[0]
            xq = solve_least_squares(orc.A, orc.rhs, "qr")[0]
            res["paths"].append(float(np.abs(xn - xq).max()))
        rows.append(sol.to_dict())
    clock.stage("oracle", t0)
    winner = min(tor.QT_VARIANTS, key=lambda v: (worst[v], tor.QT_VARIANTS.index(v)))
    tie = len({round(w, 14) for w in worst.values()}) == 1
    report["oracle"] = {
        "variant_names": names,
        "points": rows,
        "summary": {"variants": worst, "winner": winner, "tie": tie, "unique": unique,
                    "implemented": cfg.qt_variant,
                    "implemented_is_winner": tie or winner == cfg.qt_variant},
    }
    acc = cfg.tol["accept_tol"]
    checks = [
        IdentityCheck.from_residuals("oracle: |T_oracle - T_formula|", res["formula"], acc),
        IdentityCheck.from_residuals("oracle: system residual", res["solve residual"], acc),
        IdentityCheck.from_residuals("oracle: soundness", res["soundness"], 1e-10),
        IdentityCheck.from_residuals("oracle: normal vs QR", res["paths"], 1e-8),
        IdentityCheck.from_residuals(
            "oracle: implemented reading wins",
            [0.0 if report["oracle"]["summary"]["implemented_is_winner"] else 1.0], 0.5),
    ]
    report["checks"] = [c.to_dict() for c in checks]
    ok = val.passed and all(c.passed for c in checks)
    return rep.finalize(report, EXIT_PASS if ok else EXIT_IDENTITY,
                        clock.stages if cfg.timings else None)


def cmd_report(args):
    try:
        with open(args.path, encoding="utf-8") as fh:
            data = rep.loads(fh.read())
    except (OSError, ValueError) as exc:
        raise SpecParseError(f"cannot read report {args.path}: {exc}") from None
    return data


def _common(p):
    p.add_argument("--spec", required=True, help="manifold-spec file")
    p.add_argument("--points", type=int, default=50, help="sample size (default 50)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--mode", choices=MODES, default=None,
                   help="derivative back end (default: EC_DEFAULT_MODE or dual)")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                   help="override a tolerance; repeatable")
    p.add_argument("--out", help="write the machine-readable report here")
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    p.add_argument("--timings", action="store_true",
                   help="add wall-clock stage timings (breaks byte-identity)")


def parser():
    ap = argparse.ArgumentParser(prog="econn",
                                 description="Einstein connections of weak a.c.m. structures")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("validate", help="check the structure identities"))
    p = sub.add_parser("torsion", help="construct torsion and run the identity suite")
    _common(p)
    p.add_argument("--variant", choices=VARIANTS, default="weak")
    p.add_argument("--qt-variant", choices=tor.QT_VARIANTS, default=tor.DEFAULT_QT_VARIANT,
                   help="reading of the last dF term in the horizontal Q-T solution")
    p = sub.add_parser("oracle", help="compare closed forms with the least-squares oracle")
    _common(p)
    p.add_argument("--variant", choices=VARIANTS, default="weak")
    p.add_argument("--qt-variant", choices=tor.QT_VARIANTS, default=tor.DEFAULT_QT_VARIANT)
    p.add_argument("--no-qt", action="store_true", help="solve without the Q-T constraints")
    p = sub.add_parser("report", help="re-render a saved machine report as text")
    p.add_argument("path")
    return ap


COMMANDS = {"validate": cmd_validate, "torsion": cmd_torsion, "oracle": cmd_oracle}


def main(argv=None):
    args = parser().parse_args(argv)
    try:
        if args.command == "report":
            sys.stdout.write(rep.render(cmd_report(args)))
            return EXIT_PASS
        cfg = RunConfig(args)
        report = COMMANDS[args.command](cfg)
    except EngineError as exc:
        print(f"econn: error: {exc}", file=sys.stderr)
        return exc.exit_code
    text = rep.dumps(report)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text if args.json else rep.render(report))
    return report["summary"]["exit_code"]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
