"""Command-line front end: ``rigidcrlb bound | simulate | validate``.

Exit codes: 0 success, 1 invalid input or failed validation check,
2 runtime or numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from .bounds import bound_report
from .config import ScenarioConfig, parse_config
from .dissimilarity import Kind
from .errors import ConfigError, RigidBoundError, ValidationError
from .estimators import run_monte_carlo, true_dissimilarities
from .fim import Parameter, fim_rotation, fim_translation
from .intensity import Gamma, Nakagami, Normal, VonMises, nakagami_oracle
from .scenario import table3_scenario
from .validation import fim_oracle_check, gradient_suite, intensity_check

log = logging.getLogger("rigidcrlb")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

BOUND_COLUMNS = ["sweep_value", "crlb_t", "crlb_t_approx", "crlb_Q", "crlb_Q_approx", "ccrb_Q", "cond_Ft",
                 "cond_FQ", "flags"]
MC_FIELDS = ["mse_t", "se_t", "mse_Q", "se_Q", "fail_rate"]


def fmt(x) -> str:
    """Shortest round-trip text for floats; blank for missing values."""
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def point_seed(seed: int, index: int) -> int:
    """Per-sweep-point master seed derived from the run seed."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


def bound_rows(cfg: ScenarioConfig) -> list[dict]:
    rows = []
    for value in cfg.sweep_points():
        scn = cfg.scenario(value)
        rep = bound_report(fim_translation(scn), fim_rotation(scn), scn.pose.rotation)
        rows.append({
            "sweep_value": value,
            "crlb_t": rep.crlb_t,
            "crlb_t_approx": rep.crlb_t_approx,
            "crlb_Q": rep.crlb_Q,
            "crlb_Q_approx": rep.crlb_Q_approx,
            "ccrb_Q": rep.ccrb_Q,
            "cond_Ft": rep.cond_Ft,
            "cond_FQ": rep.cond_FQ,
            "flags": ";".join(rep.flags),
        })
    return rows


def simulate_rows(cfg: ScenarioConfig, workers: int = 1) -> tuple[list[str], list[dict]]:
    columns = BOUND_COLUMNS[:-1] + [f"{f}_{e}" for e in cfg.estimators for f in MC_FIELDS] + ["flags"]
    rows = bound_rows(cfg)
    for i, (value, row) in enumerate(zip(cfg.sweep_points(), rows)):
        summary = run_monte_carlo(cfg.scenario(value), cfg.estimators, cfg.trials, seed=point_seed(cfg.seed, i),
                                  workers=workers)
        for e, st in summary.estimators.items():
            row.update({f"mse_t_{e}": st.mse_t, f"se_t_{e}": st.se_t, f"mse_Q_{e}": st.mse_Q,
                        f"se_Q_{e}": st.se_Q, f"fail_rate_{e}": st.fail_rate})
    return columns, rows


def loglog_slopes(rows: list[dict], columns: list[str]) -> dict:
    """Least-squares slope of ``log(column)`` against ``log(sweep_value)``.

    Points with a non-positive or non-finite value are skipped; ``None``
    when fewer than two points remain.
    """
    slopes = {}
    for col in columns:
        if col in ("sweep_value", "flags") or col.startswith(("se_", "fail_rate", "cond_")):
            continue
        pts = [(r["sweep_value"], r.get(col)) for r in rows]
        pts = [(x, y) for x, y in pts
               if x is not None and y is not None and x > 0 and y > 0 and math.isfinite(y)]
        if len(pts) < 2:
            slopes[col] = None
            continue
        x, y = np.log(np.array(pts)).T
        slopes[col] = float(np.polyfit(x, y, 1)[0])
    return slopes


def render(rows: list[dict], columns: list[str], fmt_name: str, meta: dict) -> str:
    if fmt_name == "json":
        def clean(v):
            if isinstance(v, (float, np.floating)):
                return float(v) if math.isfinite(v) else None
            return v
        doc = dict(meta)
        doc["columns"] = columns
        doc["rows"] = [{c: clean(r.get(c)) for c in columns} for r in rows]
        if meta.get("sweep_parameter") is not None:
            doc["diagnostics"] = {"loglog_slope": loglog_slopes(rows, columns)}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _load(args) -> ScenarioConfig:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    if getattr(args, "trials", None) is not None:
        if args.trials < 1:
            raise ValidationError("trials", "must be >= 1")
        cfg = cfg.with_overrides(trials=args.trials)
    return cfg


def _workers(n: int) -> int:
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def _meta(cmd, cfg):
    return {
        "command": cmd,
        "config": cfg.source,
        "seed": cfg.seed,
        "sweep_parameter": None if cfg.sweep is None else cfg.sweep.parameter,
    }


def cmd_bound(args) -> int:
    cfg = _load(args)
    rows = bound_rows(cfg)
    _emit(render(rows, BOUND_COLUMNS, args.format, _meta("bound", cfg)), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    columns, rows = simulate_rows(cfg, workers=_workers(args.threads))
    meta = _meta("simulate", cfg)
    meta["trials"] = cfg.trials
    _emit(render(rows, columns, args.format, meta), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate

def _published_formula_notes() -> list[str]:
    """Where published closed-form intensities differ from the densities' Fisher information."""
    notes = []
    for omega in (1.0, 10.0):
        exact, table = VonMises(omega).fisher(0.0), VonMises(omega, "table").fisher(0.0)
        notes.append(f"von Mises omega={omega:g}: omega^2/2 = {table:.6g}, Fisher information = {exact:.6g}")
    m = 2.0
    notes.append(
        f"Nakagami m={m:g}: F*Upsilon oracle = {nakagami_oracle(m):.4f}, 4m+1 = {Nakagami(m, 'table')._scaled('table'):.4f}, "
        f"m(4m-3)/(m-1) = {Nakagami(m, 'appendix')._scaled('appendix'):.4f}, 4m = {4 * m:.4f}"
    )
    k = 5.0
    notes.append(
        f"Gamma kappa={k:g} at g=1: 1/(upsilon^2 (kappa-2)) = {Gamma(k, 'appendix').fisher(1.0):.6g}, "
        f"Fisher information = {Gamma(k).fisher(1.0):.6g}"
    )
    return notes


def validation_checks(cfg: ScenarioConfig | None, seed: int, workers: int = 1, n_gradient: int = 200,
                      n_oracle: int = 20_000, n_intensity: int = 200_000):
    """Yield :class:`~rigidcrlb.validation.CheckResult` objects for the reduced suites."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    for kind in Kind:
        yield from gradient_suite(kind, n_gradient, rng)

    if cfg is None:
        scn = table3_scenario("distance+aoa", noise=Normal(0.1), angle_noise=VonMises(50.0))
    else:
        scn = cfg.scenario(cfg.sweep_points()[0])
    for j, param in enumerate((Parameter.TRANSLATION, Parameter.ROTATION)):
        yield fim_oracle_check(scn, param, n_trials=n_oracle, seed=point_seed(seed, 1 + j), n_se=4.0,
                               workers=workers)

    # each configured noise model at the median dissimilarity of its edges
    g = true_dissimilarities(scn)
    by_model: dict = {}
    for e, gi in zip(scn.edges, g):
        by_model.setdefault(e.noise, []).append(gi)
    checks = [(m, float(np.median(v))) for m, v in by_model.items()]
    checks += [(Normal(0.1), 10.0), (VonMises(1.0), 0.3), (VonMises(10.0), 0.3), (Nakagami(2.0, "exact"), 5.0),
               (Gamma(5.0), 5.0)]
    for k, (model, gi) in enumerate(checks):
        yield intensity_check(model, gi, n_samples=n_intensity, seed=point_seed(seed, 10 + k), n_se=4.0)


def cmd_validate(args) -> int:
    cfg = _load(args) if args.config else None
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    passed = total = 0
    for result in validation_checks(cfg, seed, workers=_workers(args.threads)):
        total += 1
        passed += result.passed
        print(result.line())
    for note in _published_formula_notes():
        print(f"INFO  {note}")
    print(f"validate: {passed}/{total} checks passed")
    return EXIT_OK if passed == total else EXIT_INVALID


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input, not runtime failures (argparse uses 2)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rigidcrlb", description="Cramer-Rao bounds for rigid body localization.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="scenario config (YAML); 'table3.cfg' is bundled")
        sp.add_argument("--seed", type=int, help="master seed, overrides the config")
        sp.add_argument("--threads", type=int, default=1, help="worker threads, 0 = one per CPU")

    b = sub.add_parser("bound", help="bounds at every sweep point")
    common(b)
    b.add_argument("--out", help="output file (default stdout)")
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("simulate", help="bounds plus Monte Carlo estimator MSE")
    common(s)
    s.add_argument("--out", help="output file (default stdout)")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--trials", type=int, help="override the config trial count")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("validate", help="gradient, FIM and intensity self-checks")
    common(v, config_required=False)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 0:
        parser.error("--threads must be >= 0")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RigidBoundError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
