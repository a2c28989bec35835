"""Command line entry point: ``scir <subcommand> [--config PATH] [--seed N] [--out DIR] [--threads N]``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import core, diagnostics, estimators, harness, limit_laws, simulator
from .core import ModelParams


def _load_config(path):
    cfg = harness.default_config()
    if path:
        with open(path) as fh:
            cfg.update(json.load(fh))
    return cfg


def _params(cfg) -> ModelParams:
    return ModelParams(float(cfg["a"]), float(cfg["b"]), float(cfg["sigma"]), float(cfg["alpha"]))


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or cfg.get("output_dir") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args, cfg) -> int:
    params = _params(cfg)
    rng = np.random.default_rng(args.seed)
    out = _out_dir(args, cfg)
    if args.mode == "path":
        path = simulator.simulate_path(params, args.x0, args.horizon, cfg["dt"], rng,
                                       record_every=args.record_every)
        path.to_csv(out / "path.csv")
        print(out / "path.csv")
    else:
        if args.mode == "low":
            obs = simulator.sample_low_frequency(params, args.n, rng, dt=cfg["dt"])
        else:
            obs = simulator.sample_high_frequency(params, args.n, rng)
        obs.to_csv(out / "observations.csv")
        print(out / "observations.csv")
    return 0


def cmd_estimate(args, cfg) -> int:
    obs = simulator.Observations.from_csv(args.obs)
    out = _out_dir(args, cfg)
    if obs.mode == "high":
        s = estimators.sigma_hat(obs, float(cfg["alpha"]), cfg.get("p"), cfg.get("delta"))
        with open(out / "sigma.csv", "w") as fh:
            fh.write("family,n,seed,sigma\n")
            fh.write(f"SIGMA,{obs.n},,{s:.17g}\n")
        print(out / "sigma.csv")
        return 0
    ests = []
    for fam in ("CLSE", "WCLSE"):
        try:
            ests.append(estimators.FAMILIES[fam](obs))
        except estimators.DegenerateSampleError as exc:
            print(f"{fam}: {exc}", file=sys.stderr)
            return 2
    estimators.write_estimates_csv(out / "estimates.csv", ests)
    print(out / "estimates.csv")
    return 0


def cmd_mc(args, cfg) -> int:
    if args.out:
        cfg["output_dir"] = args.out
    if args.seed is not None:
        cfg["base_seed"] = args.seed
    campaign = harness.McCampaign.from_dict(cfg)
    result = harness.run_campaign(campaign, threads=args.threads)
    for (fam, par), fit in sorted(result.rate_fits.items()):
        if par == "b":
            print(f"{fam}: median |b_hat - b| slope {fit.slope:+.4f} (r2={fit.r2:.3f})")
    print(f"elapsed {result.elapsed:.1f}s")
    return 0


def cmd_limits(args, cfg) -> int:
    """Compare the WCLSE limit CF with the empirical CF at the largest n of a campaign."""
    if args.out:
        cfg["output_dir"] = args.out
    if args.seed is not None:
        cfg["base_seed"] = args.seed
    cfg["families"] = ["WCLSE"]
    cfg["ns"] = [max(cfg["ns"])]
    campaign = harness.McCampaign.from_dict(cfg)
    params = campaign.params
    n = campaign.ns[0]
    result = harness.run_campaign(campaign, threads=args.threads)
    rate = limit_laws.NormalizationSchedule(params.alpha, n).wclse_rate
    samples = np.array([[rate * (e.b_hat - params.b), rate * (e.a_hat - params.a)]
                        for e in result.records if not e.drift_undefined])
    rng = np.random.default_rng(campaign.base_seed)
    draws = simulator.sample_low_frequency(params, 100_000, rng, dt=campaign.dt).x
    erg = limit_laws.estimate_ergodic_functionals(params, draws)
    grid = wclse_grid(params, erg)

    def theory(t1, t2):
        return limit_laws.wclse_limit_charfn(params, t1, t2, draws, erg)

    rows = limit_laws.cf_table(grid, theory, samples)
    out = _out_dir(args, cfg)
    limit_laws.write_cf_csv(out / "cf_wclse.csv", rows)
    print(out / "cf_wclse.csv")
    print(f"max abs error {max(r[-1] for r in rows):.4f}")
    return 0


def wclse_grid(params, erg, scales=(0.5, 1.0, 2.0), directions=((1.0, 0.0), (1.0, 1.0), (2.0, -1.0))):
    """Nine (t1, t2) points whose transpose images lie in the valid U-quadrant.

    Directions are picked in (lam1, lam2) space and pulled back through the
    WCLSE limit map, so charfn_U is evaluated without branch ambiguity.
    """
    pts = []
    for s in scales:
        for d1, d2 in directions:
            t = limit_laws.wclse_dual_point(params, erg, s * d1, s * d2)
            pts.append((float(t[0]), float(t[1])))
    return pts


def cmd_validate(args, cfg) -> int:
    try:
        params = _params(cfg)
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 2
    checks = harness.validate(params, seed=args.seed or 0)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value:.3g} (tol {c.tolerance:.3g})")
    return 0 if all(c.passed for c in checks) else 1


def cmd_diagnose(args, cfg) -> int:
    params = _params(cfg)
    rng = np.random.default_rng(args.seed)
    obs = simulator.sample_low_frequency(params, args.n, rng, dt=cfg["dt"])
    eps = simulator.residuals(obs, params.derived).eps
    x = obs.x
    fields = {
        "n": obs.n,
        "hill_x": diagnostics.hill(x[x > 0]),
        "hill_abs_eps": diagnostics.hill(np.abs(eps[eps != 0])),
        "hill_abs_x_eps": diagnostics.hill(np.abs(x[:-1] * eps)[x[:-1] * eps != 0]),
        "mixing_rate": diagnostics.mixing_decay(x, range(1, 4)),
        "laplace_dev_stationary": diagnostics.laplace_compare(
            x, (0.5, 1.0, 2.0), lambda lam: core.stationary_laplace(params, lam)),
        "target_index_x": params.alpha,
        "target_index_x_eps": params.alpha**2 / (params.alpha + 1.0),
        "b": params.b,
    }
    report = diagnostics.report_json(**fields)
    out = _out_dir(args, cfg)
    (out / "diagnostics.json").write_text(report)
    print(report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON config")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="scir", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate a path or observations")
    p.add_argument("--mode", choices=("path", "low", "high"), default="path")
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--n", type=int, default=1000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", parents=[common], help="estimate from an observation CSV")
    p.add_argument("obs", help="CSV with header k,x and a '# mode=' line")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("mc", parents=[common], help="run a Monte Carlo campaign")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("limits", parents=[common], help="WCLSE limit CF comparison table")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("validate", parents=[common], help="run the oracle battery")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("diagnose", parents=[common], help="tail and mixing report")
    p.add_argument("--n", type=int, default=100_000)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    cfg = _load_config(args.config)
    return args.func(args, cfg)


if __name__ == "__main__":
    sys.exit(main())
