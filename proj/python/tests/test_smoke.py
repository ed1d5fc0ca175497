import math
import json
import pathlib

import pytest

import goisac


def test_push_analytics():
    assert goisac.tx_count_pmf(50, 50, 1.0, 0) == pytest.approx(1.0)
    assert goisac.outcome_pmf(2, 2, 2, 0) == pytest.approx(0.5)
    dist = goisac.success_count_distribution(2, 2, 0.5)
    assert dist[2] == pytest.approx(0.125)
    assert sum(goisac.success_count_distribution(50, 50, 0.7)) == pytest.approx(1.0)


def test_simulate_push():
    out = goisac.simulate_push(4, 3, 0.5, [0.1, 0.9, 0.2, 0.5], 7)
    assert out["attempts"] == 1
    assert [ue for ue, _ in out["singletons"]] == [1]


def test_rate_and_peb():
    assert goisac.uatf_se([1.0], 1.0, 1.0, 1) == pytest.approx(math.log2(4 / 3))
    assert goisac.peb_from_fim([[8.0 if i == j else 0.0 for j in range(5)] for i in range(5)]) == pytest.approx(0.5)
    assert goisac.q_loc(2.826, 1.0) == 8
    assert goisac.q_loc(2.826, math.inf) == 0
    with pytest.raises(goisac.Unidentifiable):
        goisac.peb_from_fim([[0.0] * 5 for _ in range(5)])


def test_schedulers():
    demands = [goisac.UeDemand(0, 0.5, 1), goisac.UeDemand(1, 0.7, 10)]
    assert goisac.schedule_heuristic(demands, 10).total_voi == pytest.approx(0.7)
    exact = goisac.schedule_exact(demands, 10)
    assert exact.served == [1]
    assert len(exact.assignment) == 10
    assert goisac.schedule_voi_blind(demands, 10).total_voi == pytest.approx(0.5)


def test_campaign_and_geometry():
    cfg = goisac.SimConfig()
    assert cfg.push_res == 50 and cfg.pull_res == 125
    cfg.frames = 10
    res = goisac.run_campaign(cfg, 2, 1)
    assert res["frames"] == 20
    assert res["avg_voi_tot"] >= 0.0
    again = goisac.run_campaign(cfg, 2, 1)
    assert again == res
    x, y, peb = goisac.worst_case_position(cfg, 20.0)
    assert peb >= goisac.single_re_peb(cfg, 100.0, 100.0) - 1e-12
    cfg.theta = 1.5
    with pytest.raises(goisac.ConfigError):
        cfg.validate()


def test_sweep_files(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"frames": 5, "episodes": 2, "policies": ["GOIA"],
                                  "sweep": {"variable": "theta", "values": [0.5, 0.7]}}))
    files = goisac.run_sweep(str(config), str(tmp_path / "out"))
    names = sorted(pathlib.Path(p).name for p in files)
    assert names == ["goia_vs_theta.csv", "manifest.json", "push_pmf_vs_theta.csv"]
    header = (tmp_path / "out" / "goia_vs_theta.csv").read_text().splitlines()[0]
    assert header.startswith("sweep_value,avg_voi_tot,avg_pull_access_rate,avg_push_success_rate")
