import math

import numpy as np
import pytest

import shelab


def test_version():
    assert shelab.__version__ == "0.1.0"


def test_config_hash_is_stable():
    assert shelab.config_hash("run.seed = 5\n") == shelab.config_hash("# x\nrun.seed = 5\n")
    assert shelab.config_hash("run.seed = 5\n") != shelab.config_hash("run.seed = 6\n")
    assert "time.steps=10" in shelab.canonical_config("")


def test_config_errors_raise():
    with pytest.raises(shelab.ConfigError, match="line 1"):
        shelab.config_hash("nonsense.key = 1\n")


def test_heat_kernel_peak():
    assert shelab.heat_kernel(1.0, 0.25, 0.5, 0.5, 1.0) == pytest.approx(2.0)


def test_simulate_energy_decays_without_noise():
    x = np.linspace(0, 1, 33)[1:-1]
    out = shelab.simulate(np.sin(np.pi * x), horizon=0.05, steps=5)
    energy = np.asarray(out["energy"])
    assert np.all(np.diff(energy) < 0)
    assert out["terminal"].shape == (32, 31)
    # With b = 0 every leaf carries the same state.
    assert np.allclose(out["terminal"], out["terminal"][0])


def test_ucp_constants():
    c = shelab.ucp_constants(r=0.1, m=0.25, T=0.5, a_sup=1.0, b_norm=0.3)
    assert 0 < c["delta"] < 1
    assert not c["backward_uniqueness_branch"]
    assert shelab.ucp_constants(0.1, 0.25, 0.5, 1.0, 0.3, energyT=0.0)["backward_uniqueness_branch"]


def test_density_sequence():
    s = shelab.density_sequence([(0.1, 0.2), (0.3, 0.45)], 0.5)
    assert s["found"]
    for g, L in zip(s["gaps"], s["gap_lengths"]):
        assert L <= 3 * g


def test_run_observe_report():
    rep = shelab.run("observe", "sweep.configs = 2\n")
    assert rep["schema_version"] == 1
    assert rep["pass"] is True
    assert "density_sequence" in rep["tables"]
    assert all(math.isfinite(float(c["lhs"])) for c in rep["checks"] if isinstance(c["lhs"], (int, float)))
