import os
import pathlib

import numpy as np
import pytest

import lawq


def test_exact_matches_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        w = rng.uniform(-1, 1, n)
        d = rng.uniform(0.1, 10, n)
        layer = lawq.ternarize_exact(w, d)
        best = lawq.oracle.ternary(w, d)
        assert lawq.objective(w, d, layer) == pytest.approx(best["objective"], rel=1e-9, abs=1e-15)


def test_exact_worked_example():
    layer = lawq.ternarize_exact([0.9, 0.4, -0.1], [1.0, 1.0, 1.0])
    assert layer.alpha == pytest.approx(0.65)
    assert layer.codes.tolist() == [1, 1, 0]
    assert layer.codes.dtype == np.int8
    np.testing.assert_allclose(layer.reconstruct(), [0.65, 0.65, 0.0])


def test_approx_descends():
    layer, info = lawq.ternarize_approx([0.9, 0.4, -0.1], [1.0, 1.0, 1.0])
    trace = info.objective_trace
    assert info.converged
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert set(layer.codes.tolist()) <= {-1, 0, 1}


def test_quantize_by_label():
    w = np.array([0.9, 0.4, -0.1])
    d = np.ones(3)
    w_hat, layer, _ = lawq.quantize("LAQ2(linear)", w, d)
    w_hat_lat, _, _ = lawq.quantize("lat-approx", w, d)
    np.testing.assert_array_equal(w_hat, w_hat_lat)
    assert layer is not None
    w_hat, layer, _ = lawq.quantize("dorefa", w)
    assert layer is None
    assert np.max(np.abs(w_hat)) == 1.0
    assert lawq.method_label("LAT2e") == "lat2-exact"


def test_mbit_levels():
    q = lawq.QuantSet.build(3, lawq.Scheme.LOG)
    np.testing.assert_allclose(q.values(), [-1, -0.5, -0.25, 0, 0.25, 0.5, 1])
    layer, info = lawq.quantize_mbit([1.0, 0.5, -0.25], [1.0, 2.0, 3.0], q)
    assert layer.alpha == pytest.approx(1.0)
    assert info.objective_trace[-1] == pytest.approx(0.0, abs=1e-12)


def test_curvature_requirement_and_errors():
    with pytest.raises(lawq.LawqError):
        lawq.quantize("lat-exact", [0.5, -0.5])
    with pytest.raises(lawq.LawqError):
        lawq.ternarize_exact([0.5, 0.1], [1.0])
    with pytest.raises(lawq.LawqError):
        lawq.quantize("no-such-method", [0.5])


def test_two_scale_dominates():
    w = [0.9, 0.3, -0.2, -0.05]
    d = [1.0, 2.0, 0.5, 4.0]
    two, _ = lawq.ternarize_two_scale_exact(w, d)
    one = lawq.ternarize_exact(w, d)
    assert two.two_scale
    assert lawq.objective(w, d, two) <= lawq.objective(w, d, one) + 1e-12


def test_suite_and_cli(tmp_path: pathlib.Path):
    report = lawq.oracle.run_suite("twn-reduction", trials=100)
    assert report["passed"]
    assert report["trials"] == 100
    code, out, _ = lawq.run_cli(["verify", "--suite", "properties", "--trials", "20"])
    assert code == 0
    assert "PASS" in out
    code, _, _ = lawq.run_cli(["verify", "--suite", "properties", "--trials", "0"])
    assert code == 2


def test_cli_train_synthetic(tmp_path: pathlib.Path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[quantizer]\nmethod = lat-approx\n[train]\nepochs = 1\nhidden = 8\n"
        "[data]\nsource = synthetic\nsynthetic_train = 100\nsynthetic_test = 20\n"
    )
    code, out, err = lawq.run_cli(["train", "--config", str(cfg), "--out", str(tmp_path / "run")])
    assert code == 0, err
    assert "final_test_error=" in out
    assert (tmp_path / "run" / "metrics.csv").read_text().startswith("epoch,split,loss,error_rate")
