"""Dataset builders behind the CLI."""

import numpy as np
import pytest

from blowup_lab import experiments
from blowup_lab.integrator import IntegratorConfig
from blowup_lab.pde import ModelParams

FAST = IntegratorConfig(rtol=1e-10, atol=1e-10, h_init=1e-4)


def small_params():
    return ModelParams(alpha=0.25, epsilon=0.1, n_modes=32, integrator=FAST)


def test_run_table1_single_cell():
    rows = experiments.run_table1(alphas=[0.25], epsilons=[0.1], n_modes=32,
                                  rtol=1e-10, atol=1e-10, jobs=1)
    assert len(rows) == 1
    r = rows[0]
    assert r.error is None
    assert r.t_c == pytest.approx(0.161963, abs=1e-5)
    assert r.d_t_hat == pytest.approx(1.0e-2, rel=0.3)


def test_run_table1_worker_pool_matches_serial():
    kw = dict(alphas=[0.25], epsilons=[0.1, 0.05], n_modes=32,
              rtol=1e-10, atol=1e-10)
    serial = experiments.run_table1(jobs=1, **kw)
    pooled = experiments.run_table1(jobs=2, **kw)
    for a, b in zip(serial, pooled):
        assert a.t_c == b.t_c
        assert a.d_two_mode == b.d_two_mode


def test_run_table1_reports_per_cell_failures():
    rows = experiments.run_table1(alphas=[-1.0], epsilons=[0.1], n_modes=32)
    assert rows[0].error is not None
    assert np.isnan(rows[0].t_c)


def test_error_curves_behaviour():
    data = experiments.run_error_curves(small_params())
    assert data.times.size > 10
    # the perturbation approximation is excellent at early times
    early = data.times < 0.2 * data.t_c
    assert np.max(data.err_perturbation[early & (data.times > 0)]) < 5e-2


def test_singularity_overlays_shapes():
    data = experiments.run_singularity(small_params(), stride=10)
    tr = data.track
    assert set(data.overlays) == set(
        ("naive", "early", "late_first_scale", "second_scale",
         "third_scale", "impingement"))
    for arr in data.overlays.values():
        assert arr.shape == tr.times.shape
    # naive overlay at t = 0 equals the root estimate at t = 0
    assert data.overlays["naive"][0] == pytest.approx(tr.y_root[0], rel=1e-3)


def test_run_continuation_complex_path():
    p = small_params()
    data = experiments.run_continuation(p, t_end=0.5, method="complex_path")
    assert data.result.method == "complex_path"
    assert data.asymptote_deviation is not None
    assert sorted(data.snapshot_times) == data.snapshot_times
    with pytest.raises(ValueError):
        experiments.run_continuation(p, t_end=0.5, method="teleport")


def test_run_continuation_extra_times_and_edges():
    p = small_params()
    data = experiments.run_continuation(p, t_end=0.5, rng_seed=0,
                                        extra_times=[0.123])
    assert any(abs(t - 0.123) < 1e-12 for t in data.snapshot_times)
    t_c = data.result.t_c
    # |u(pi)| near 2 t_c exceeds its pre-blow-up value
    t2 = min(data.snapshot_times, key=lambda t: abs(t - 2.0 * t_c))
    t0 = min(data.snapshot_times, key=lambda t: abs(t - 0.0))
    assert data.u_edge_moduli[t2] > data.u_edge_moduli[t0]


def test_run_fourier_snapshots_default_times():
    data = experiments.run_fourier_snapshots(small_params(), rng_seed=0)
    assert len(data.times) == 3
    assert len(data.moduli) == 3
    assert data.k[0] == 1
    # the post-blow-up snapshot is the widest spectrum of the three
    assert np.isnan(data.local_law[0]) and np.isfinite(data.local_law[5])
