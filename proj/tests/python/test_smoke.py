import math

import numpy as np
import pytest

import cgolab

SMALL = {"grid": {"nx": 9, "nt": 8}}


def test_experiment_names():
    names = cgolab.experiment_names()
    assert len(names) == 13
    assert "gauge-check" in names and "scenario" in names


def test_phi_at_known_point():
    value, grad, lap = cgolab.phi([0.0, 0.5, 0.5], x0=[-2.0, 0.5, 0.5])
    assert value == pytest.approx(math.log(2.0))
    assert grad == pytest.approx([0.5, 0.0, 0.0])
    assert lap == pytest.approx(0.25)


def test_psi_raises_on_axis():
    with pytest.raises(ValueError):
        cgolab.psi([-2.0, 0.5, 1.5], x0=[-2.0, 0.5, 0.5], omega=[0.0, 0.0, 1.0])


def test_eta_end_and_start_values():
    value, _ = cgolab.eta(1.0, 0.2)
    assert value == pytest.approx(0.0, abs=1e-14)
    value, _ = cgolab.eta(0.0, 0.2)
    assert value == pytest.approx(math.sin(0.2**0.4))


def test_run_forward_report():
    rep = cgolab.run({"experiment": "forward", **SMALL})
    assert rep["experiment"] == "forward"
    assert all(v["pass"] for v in rep["verdicts"])


def test_run_accepts_json_text():
    rep = cgolab.run('{"experiment": "eikonal-check", "grid": {"nx": 9, "nt": 8}}')
    assert rep["experiment"] == "eikonal-check"


def test_bad_config_raises():
    with pytest.raises(ValueError, match="grid.nx"):
        cgolab.run({"experiment": "forward", "grid": {"nx": 2}})


def test_cdf1_round_trip(tmp_path):
    cgolab.run({"experiment": "forward", "output": str(tmp_path), **SMALL}, write_artifacts=True)
    header, u = cgolab.read_cdf1(tmp_path / "u.cdf1")
    assert header["dtype"] == "c128"
    assert u.shape == (9, 9, 9, 9, 1)
    assert np.iscomplexobj(u)
    assert np.all(np.isfinite(u))
    assert (tmp_path / "forward.json").exists()
