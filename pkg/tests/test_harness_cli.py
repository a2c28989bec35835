import json

import numpy as np
import pytest

from scir import cli, harness
from scir.core import ModelParams


def _cfg(tmp_path, **kw):
    cfg = harness.default_config(str(tmp_path))
    cfg.update(ns=[50, 100], replications=3, families=["CLSE", "WCLSE", "SIGMA"], **kw)
    return cfg


def test_campaign_is_deterministic(tmp_path):
    a = harness.run_campaign(harness.McCampaign.from_dict(_cfg(tmp_path / "a")))
    b = harness.run_campaign(harness.McCampaign.from_dict(_cfg(tmp_path / "b")), threads=2)
    for name in ("estimates.csv", "sigma.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert len(a.records) == 2 * 2 * 3 and len(b.sigma_records) == 2 * 3
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert "WCLSE/100" in summary["summary"] and "CLSE/b" in summary["rate_fits"]


def test_replication_seed_depends_on_all_parts():
    seeds = {harness.replication_seed(s, n, r) for s in (1, 2) for n in (10, 20) for r in (0, 1)}
    assert len(seeds) == 8
    assert harness.replication_seed(1, 10, 0) == harness.replication_seed(1, 10, 0)


def test_replication_override(tmp_path):
    cfg = harness.McCampaign.from_dict(_cfg(tmp_path, output_dir=None) | {"families": ["WCLSE"]})
    res = harness.run_campaign(cfg, replications={100: 5})
    assert sum(1 for e in res.records if e.n == 100) == 5


def test_config_keys_must_match(tmp_path):
    cfg = _cfg(tmp_path)
    with pytest.raises(ValueError):
        harness.McCampaign.from_dict({**cfg, "extra": 1})
    cfg.pop("dt")
    with pytest.raises(ValueError):
        harness.McCampaign.from_dict(cfg)


def test_config_round_trip(tmp_path):
    c = harness.McCampaign.from_dict(_cfg(tmp_path))
    assert harness.McCampaign.from_dict(c.to_dict()) == c


@pytest.mark.parametrize("kw", [dict(b=-1.0), dict(alpha=2.5), dict(families=["MLE"]), dict(ns=[100, 50])])
def test_invalid_campaigns_rejected(tmp_path, kw):
    with pytest.raises(ValueError):
        harness.McCampaign.from_dict({**_cfg(tmp_path), **kw})


def test_validate_passes_for_brownian_driver():
    checks = harness.validate(ModelParams(1.0, 1.0, 1.0, 2.0), seed=1)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_cli_validate_rejects_bad_params(tmp_path, capsys):
    for bad in ({"b": -1.0}, {"alpha": 2.5}):
        path = tmp_path / "c.json"
        path.write_text(json.dumps(bad))
        assert cli.main(["validate", "--config", str(path)]) == 2


def test_cli_simulate_then_estimate(tmp_path):
    assert cli.main(["simulate", "--mode", "low", "--n", "500", "--seed", "3", "--out", str(tmp_path)]) == 0
    assert cli.main(["estimate", str(tmp_path / "observations.csv"), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "estimates.csv").read_text().splitlines()
    assert lines[1].startswith("CLSE,500,") and lines[2].startswith("WCLSE,500,")


def test_cli_high_frequency_estimate(tmp_path):
    assert cli.main(["simulate", "--mode", "high", "--n", "200", "--seed", "3", "--out", str(tmp_path)]) == 0
    assert cli.main(["estimate", str(tmp_path / "observations.csv"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sigma.csv").read_text().startswith("family,n,seed,sigma\nSIGMA,200,")


def test_cli_simulate_path(tmp_path):
    assert cli.main(["simulate", "--horizon", "1", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "path.csv").read_text().startswith("t,x\n0,1\n")


def test_cli_mc_and_limits(tmp_path):
    cfg = harness.default_config(None)
    cfg.update(ns=[100, 200], replications=4)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["mc", "--config", str(path), "--out", str(tmp_path / "mc")]) == 0
    assert (tmp_path / "mc" / "estimates.csv").exists()
    assert cli.main(["limits", "--config", str(path), "--out", str(tmp_path / "lim")]) == 0
    rows = (tmp_path / "lim" / "cf_wclse.csv").read_text().splitlines()
    assert len(rows) == 10


def test_cli_diagnose(tmp_path):
    assert cli.main(["diagnose", "--n", "5000", "--seed", "2", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "diagnostics.json").read_text())
    assert {"hill_x", "hill_abs_eps", "hill_abs_x_eps", "mixing_rate"} <= set(report)
