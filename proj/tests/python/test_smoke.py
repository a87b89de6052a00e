"""Smoke tests for the python module: the bindings load and the main
operations agree with the library's contracts at desk scale."""

import math

import numpy as np
import pytest

import itowentzell as itw


def test_scenario_catalog():
    names = itw.scenario_names()
    assert "affine-exact" in names
    assert "full-mix" in names
    spec = itw.catalog("jump-only", {"lambda": 2.0, "c": 1.0})
    assert spec.name == "jump-only"
    assert spec.n == 1
    assert spec.representation == "non-centered"
    with pytest.raises(ValueError):
        itw.catalog("nosuch", {})


def test_exact_scenario_residual_is_machine_precision():
    spec = itw.catalog("affine-exact", {"c": 3.0, "psi": 1.0})
    for seed in range(5):
        rep = itw.verify_path(spec, 256, seed)
        assert abs(rep.residual) < 1e-12
        assert rep.steps == 256


def test_report_terms_sum_to_rhs():
    spec = itw.catalog("full-mix", {})
    rep = itw.verify_path(spec, 128, 7)
    assert rep.rhs == pytest.approx(rep.terms.sum(), abs=1e-12)
    assert rep.residual == rep.lhs - rep.rhs


def test_conversion_round_trip():
    spec = itw.catalog("full-mix", {})
    centered, was_noop = itw.to_centered(spec)
    assert not was_noop
    assert centered.representation == "centered"
    back, _ = itw.to_noncentered(centered)
    r1 = itw.verify_path(back, 128, 3)
    r0 = itw.verify_path(spec, 128, 3)
    assert r1.residual == pytest.approx(r0.residual, abs=1e-12)


def test_wiener_sampling_shape_and_determinism():
    grid = itw.TimeGrid(1.0, 64)
    w1 = itw.sample_wiener(grid, 2, 42)
    w2 = itw.sample_wiener(grid, 2, 42)
    a1 = w1.increments
    assert a1.shape == (64, 2)
    assert np.array_equal(a1, w2.increments)
    fine = itw.refine(w1, 2, 7)
    blocks = fine.increments.reshape(64, 2, 2).sum(axis=1)
    assert np.max(np.abs(blocks - a1)) <= 1e-15


def test_jump_sampling_and_mark_integration():
    intensity = itw.IntensitySpec(2.0, itw.MarkDistribution.uniform(0.0, 1.0))
    events = itw.sample_jumps(intensity, 1.0, 11)
    times = [t for t, _ in events]
    assert times == sorted(times)
    assert all(0.0 < t <= 1.0 for t in times)
    assert itw.integrate_mark(intensity, lambda g: g) == pytest.approx(1.0)


def test_convergence_rows_shrink():
    spec = itw.catalog(
        "product-rule", {"alpha": 0.1, "beta": 0.2, "a": 0.3, "b": 0.4}
    )
    rows = itw.convergence_study(spec, [32, 64, 128], 40, 0, threads=2)
    assert len(rows) == 3
    assert math.isnan(rows[0].order)
    assert rows[-1].rms_residual < rows[0].rms_residual


def test_run_config_round_trip():
    code, output = itw.run_config(
        "command = verify\n"
        "scenario = affine-exact\n"
        "params.c = 3\n"
        "params.psi = 1\n"
        "N = 64\n"
        "M = 4\n"
        "seed = 5\n"
    )
    assert code == 0
    header = output.splitlines()[0].split(",")
    assert header[:5] == ["seed", "N", "lhs", "rhs", "residual"]
    assert len(output.splitlines()) == 5
