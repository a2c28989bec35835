"""Monte Carlo campaigns, the oracle battery and result export.

Every (n, replication) pair gets its own generator seeded from
``replication_seed(base_seed, n, r)``, so results do not depend on the
order or the process in which the pairs run.
"""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import core, diagnostics, estimators, oracles, simulator
from .core import ModelParams
from .stable_noise import sample_increments

logger = logging.getLogger(__name__)

CONFIG_KEYS = ("a", "b", "sigma", "alpha", "dt", "ns", "replications", "base_seed",
               "families", "p", "delta", "output_dir")
KNOWN_FAMILIES = ("CLSE", "WCLSE", "SIGMA")
MAX_DEGENERATE_FRACTION = 0.2
QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


class CampaignFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class McCampaign:
    params: ModelParams
    ns: tuple
    replications: int
    base_seed: int
    families: tuple = ("CLSE", "WCLSE")
    dt: float = simulator.DEFAULT_DT
    p: float | None = None
    delta: float | None = None
    output_dir: str | None = None
    burn_in: float | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.ns or list(self.ns) != sorted(self.ns) or min(self.ns) < 2:
            raise ValueError("ns must be a nonempty ascending list of sizes >= 2")
        bad = set(self.families) - set(KNOWN_FAMILIES)
        if bad:
            raise ValueError(f"unknown families {sorted(bad)}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @classmethod
    def from_dict(cls, cfg: dict) -> "McCampaign":
        keys = set(cfg)
        if keys != set(CONFIG_KEYS):
            missing, extra = set(CONFIG_KEYS) - keys, keys - set(CONFIG_KEYS)
            raise ValueError(f"config keys mismatch: missing={sorted(missing)} extra={sorted(extra)}")
        return cls(
            params=ModelParams(float(cfg["a"]), float(cfg["b"]), float(cfg["sigma"]), float(cfg["alpha"])),
            ns=tuple(int(n) for n in cfg["ns"]),
            replications=int(cfg["replications"]),
            base_seed=int(cfg["base_seed"]),
            families=tuple(cfg["families"]),
            dt=float(cfg["dt"]),
            p=None if cfg["p"] is None else float(cfg["p"]),
            delta=None if cfg["delta"] is None else float(cfg["delta"]),
            output_dir=cfg["output_dir"],
        )

    @classmethod
    def from_json(cls, path) -> "McCampaign":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "a": self.params.a, "b": self.params.b, "sigma": self.params.sigma,
            "alpha": self.params.alpha, "dt": self.dt, "ns": list(self.ns),
            "replications": self.replications, "base_seed": self.base_seed,
            "families": list(self.families), "p": self.p, "delta": self.delta,
            "output_dir": self.output_dir,
        }


def replication_seed(base_seed: int, n: int, r: int) -> int:
    """64-bit seed derived deterministically from (base_seed, n, r)."""
    state = np.random.SeedSequence(base_seed, spawn_key=(n, r)).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def replication_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class FamilySummary:
    family: str
    n: int
    count: int
    degenerate: int
    failed: int
    quantiles: dict = field(default_factory=dict)  # name -> {q: value}

    @property
    def median(self) -> dict:
        return {k: v[0.5] for k, v in self.quantiles.items()}


@dataclass
class CampaignResult:
    config: McCampaign
    records: list  # EstimateSet, ordered by (n, replication, family)
    sigma_records: list  # (n, seed, sigma_hat)
    summaries: dict  # (family, n) -> FamilySummary
    rate_fits: dict  # (family, parameter) -> RateFit
    elapsed: float = 0.0

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        estimators.write_estimates_csv(out / "estimates.csv", self.records)
        if self.sigma_records:
            with open(out / "sigma.csv", "w") as fh:
                fh.write("family,n,seed,sigma\n")
                for n, seed, s in self.sigma_records:
                    fh.write(f"SIGMA,{n},{seed},{s:.17g}\n")
        summary = {
            f"{fam}/{n}": {
                "count": s.count, "degenerate": s.degenerate, "failed": s.failed,
                "quantiles": {k: {str(q): float(f"{v:.17g}") for q, v in qs.items()}
                              for k, qs in s.quantiles.items()},
            }
            for (fam, n), s in sorted(self.summaries.items())
        }
        rates = {f"{fam}/{par}": asdict(fit) for (fam, par), fit in sorted(self.rate_fits.items())}
        with open(out / "summary.json", "w") as fh:
            json.dump({"config": self.config.to_dict(), "summary": summary, "rate_fits": rates},
                      fh, indent=2, sort_keys=True)


def _run_one(cfg: McCampaign, n: int, r: int):
    seed = replication_seed(cfg.base_seed, n, r)
    rng = replication_rng(seed)
    drift = [f for f in cfg.families if f in ("CLSE", "WCLSE")]
    out, sigma = [], None
    if drift:
        obs = simulator.sample_low_frequency(cfg.params, n, rng, dt=cfg.dt, burn_in=cfg.burn_in)
        for fam in drift:
            try:
                est = estimators.FAMILIES[fam](obs)
                out.append(_with_seed(est, seed))
            except estimators.DegenerateSampleError:
                out.append(estimators.EstimateSet(fam, n, math.nan, math.nan, drift_undefined=True, seed=seed))
    if "SIGMA" in cfg.families:
        hf = simulator.sample_high_frequency(cfg.params, n, rng, burn_in=cfg.burn_in)
        sigma = (n, seed, estimators.sigma_hat(hf, cfg.params.alpha, cfg.p, cfg.delta))
    return n, r, out, sigma


def _with_seed(est, seed):
    return estimators.EstimateSet(est.family, est.n, est.gamma_hat, est.rho_hat, est.b_hat,
                                  est.a_hat, est.drift_undefined, seed=seed)


def _run_one_packed(args):
    return _run_one(*args)


def run_campaign(cfg: McCampaign, *, threads: int = 1, replications: dict | None = None) -> CampaignResult:
    """Simulate, estimate and aggregate every (n, replication) pair.

    ``replications`` optionally overrides the replication count per n.
    """
    start = time.perf_counter()
    tasks = [(cfg, n, r) for n in cfg.ns for r in range((replications or {}).get(n, cfg.replications))]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_one_packed, tasks, chunksize=1))
    else:
        results = []
        for i, t in enumerate(tasks):
            results.append(_run_one(*t))
            if (i + 1) % 50 == 0:
                logger.info("campaign: %d/%d replications", i + 1, len(tasks))
    results.sort(key=lambda x: (x[0], x[1]))
    records = [est for _, _, ests, _ in results for est in ests]
    sigma_records = [s for *_, s in results if s is not None]
    result = aggregate(cfg, records, sigma_records)
    result.elapsed = time.perf_counter() - start
    if cfg.output_dir:
        result.write(cfg.output_dir)
    return result


def aggregate(cfg: McCampaign, records, sigma_records=()) -> CampaignResult:
    d = cfg.params.derived
    truth = {"gamma": d.gamma, "rho": d.rho, "b": cfg.params.b, "a": cfg.params.a}
    summaries = {}
    for fam in [f for f in cfg.families if f in ("CLSE", "WCLSE")]:
        for n in cfg.ns:
            rs = [e for e in records if e.family == fam and e.n == n]
            if not rs:
                continue
            failed = sum(1 for e in rs if math.isnan(e.gamma_hat))
            degenerate = sum(1 for e in rs if e.drift_undefined)
            if degenerate > MAX_DEGENERATE_FRACTION * len(rs):
                raise CampaignFailed(f"{fam} at n={n}: {degenerate}/{len(rs)} degenerate replications")
            qs = {}
            for name, attr in (("gamma", "gamma_hat"), ("rho", "rho_hat"), ("b", "b_hat"), ("a", "a_hat")):
                vals = np.array([getattr(e, attr) for e in rs], dtype=float)
                err = np.abs(vals[np.isfinite(vals)] - truth[name])
                qs[name] = {q: float(np.quantile(err, q)) if err.size else math.nan for q in QUANTILES}
            summaries[(fam, n)] = FamilySummary(fam, n, len(rs), degenerate, failed, qs)
    if sigma_records:
        for n in cfg.ns:
            vals = np.array([s for m, _, s in sigma_records if m == n])
            if vals.size:
                err = np.abs(vals - cfg.params.sigma)
                summaries[("SIGMA", n)] = FamilySummary(
                    "SIGMA", n, vals.size, 0, 0,
                    {"sigma": {q: float(np.quantile(err, q)) for q in QUANTILES}})
    fits = {}
    if len(cfg.ns) >= 2:
        for (fam, _), s in summaries.items():
            for par in s.quantiles:
                if (fam, par) in fits:
                    continue
                meds = [summaries[(fam, n)].median[par] for n in cfg.ns if (fam, n) in summaries]
                if len(meds) == len(cfg.ns) and all(m > 0 for m in meds):
                    fits[(fam, par)] = diagnostics.rate_regression(cfg.ns, meds)
    return CampaignResult(cfg, list(records), list(sigma_records), summaries, fits)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float


def validate(params: ModelParams, *, seed: int = 0, quick: bool = True) -> list[Check]:
    """Run the analytic and Monte Carlo oracle battery for ``params``."""
    checks: list[Check] = []

    def add(name, value, tol):
        checks.append(Check(name, bool(value <= tol), float(value), float(tol)))

    worst = 0.0
    for lam in (0.1, 1.0, 10.0):
        for t in (0.1, 1.0):
            ref = oracles.rk4_cumulant_log(params, lam, t, steps=4000)
            worst = max(worst, abs(core.v(params, lam, t) - ref) / ref)
    add("cumulant closed form vs RK4", worst, 1e-8)

    worst = 0.0
    for lam in (0.5, 5.0):
        for r, t in ((0.3, 0.7), (1.0, 2.0)):
            lhs = core.v(params, lam, r + t)
            worst = max(worst, abs(lhs - core.v(params, core.v(params, lam, t), r)) / lhs)
    add("cumulant semigroup", worst, 1e-8)

    # one-sided difference in log form; the error is O(h^(alpha-1))
    h = 1e-7 ** (1.0 / (params.alpha - 1.0))
    m = core.transition_mean(params, 1.0, 1.0)
    fd = -math.expm1(-core.transition_log_laplace(params, 1.0, 1.0, h)) / h
    add("Laplace derivative = transition mean", abs(fd - m) / m, 1e-6)
    m = core.stationary_mean(params)
    fd = -math.expm1(-core.stationary_log_laplace(params, h)) / h
    add("stationary Laplace derivative = a/b", abs(fd - m) / m, 1e-6)
    vb = core.vbar(params, 1.0)
    add("vbar vs RK4 from lam = 1e300", abs(oracles.rk4_cumulant_log(params, 1e300, 1.0, 200) - vb) / vb, 1e-8)

    rng = np.random.default_rng(seed)
    n_mc = 200_000 if quick else 1_000_000
    z = sample_increments(params.alpha, 1.0, n_mc, rng)
    dev = max(abs(np.mean(np.exp(-lam * z)) / math.exp(lam**params.alpha / params.alpha) - 1.0) for lam in (0.5, 1.0))
    add("driver Laplace normalisation", dev, 0.02)

    n_paths = 20_000 if quick else 100_000
    x1 = np.array([simulator.simulate_path(params, 2.0, 1.0, 1e-3, rng).values[-1] for _ in range(n_paths)])
    m = core.transition_mean(params, 2.0, 1.0)
    se = x1.std() / math.sqrt(n_paths)
    add("transition mean (3 SE + 1%)", abs(x1.mean() - m) / (3 * se + 0.01 * m), 1.0)
    ref = core.transition_laplace(params, 2.0, 1.0, 1.0)
    e1 = np.exp(-x1)
    # the quick run is too small for a flat 1%, so it also allows 3 standard errors
    slack = 3 * e1.std() / math.sqrt(n_paths) / ref if quick else 0.0
    add("transition Laplace", abs(e1.mean() / ref - 1.0), 0.01 + slack)

    if params.alpha < 2.0:
        c = core.stationary_tail(params)
        add("stationary tail constant positive", 0.0 if 0 < c < math.inf else 1.0, 0.0)
    return checks


def default_config(output_dir=None) -> dict:
    return {
        "a": 1.0, "b": 1.0, "sigma": 1.0, "alpha": 1.5, "dt": 0.01,
        "ns": [1000, 10000, 100000], "replications": 200, "base_seed": 20240101,
        "families": ["CLSE", "WCLSE"], "p": None, "delta": None,
        "output_dir": output_dir,
    }
