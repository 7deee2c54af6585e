"""Acceptance suite: one test per criterion, printed as a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; each test pins the tolerances stated in the project brief.
"""

import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from oplearn.estimate import alpha_schedule, excess_risk, fit, weighted_error
from oplearn.hilbert import apply_spectral_fn, schatten_norm
from oplearn.precompose import (
    douglas_check,
    precompose_oracle,
    solve_pseudo,
    source_condition_value,
    unvec,
    vec,
)
from oplearn.regularize import (
    g_eval,
    qualification_check,
    tikhonov,
    truncation,
    verify_strategy,
)
from oplearn.applications import arh_fit, simulate_arh
from oplearn.studies import StudyConfig, run_concentration_study, run_rate_study
from oplearn.synthesize import (
    SourceSpec,
    make_covariance,
    make_source_target,
    sample_misspecified,
)


@contextmanager
def criterion(number, name):
    start = time.monotonic()
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE {number:2d} {name}: FAIL ({time.monotonic() - start:.1f}s)")
        raise
    print(f"ACCEPTANCE {number:2d} {name}: PASS ({time.monotonic() - start:.1f}s)")


def random_psd(rng, d, lam_low=0.0, lam_high=1.0, avoid=None):
    lam = rng.uniform(lam_low, lam_high, d)
    if avoid is not None:
        lam[np.abs(lam - avoid) < 1e-3] += 3e-3
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return (q * lam) @ q.T


def test_criterion_1_spectrum_identity():
    with criterion(1, "spectrum identity of the Kronecker oracle"):
        start = time.monotonic()
        rng = np.random.default_rng(101)
        for _ in range(50):
            d_x = int(rng.integers(1, 9))
            d_y = int(rng.integers(1, 6))
            c = random_psd(rng, d_x)
            rep = precompose_oracle(c, d_y)
            big = np.sort(np.linalg.eigvalsh(rep.matrix))
            small = np.sort(np.repeat(np.linalg.eigvalsh(c), d_y))
            assert np.abs(big - small).max() <= 1e-10
        assert time.monotonic() - start < 5.0


def test_criterion_2_functional_calculus():
    with criterion(2, "functional calculus commutes with the oracle"):
        start = time.monotonic()
        rng = np.random.default_rng(102)
        alpha = 0.1
        fns = [
            lambda lam: g_eval(tikhonov(), alpha, lam),
            lambda lam: lam**0.5,
            lambda lam: g_eval(truncation(), alpha, lam),
        ]
        for _ in range(20):
            d_x = int(rng.integers(2, 8))
            d_y = int(rng.integers(1, 5))
            c = random_psd(rng, d_x, avoid=alpha)  # spectrum clear of the cut
            rep = precompose_oracle(c, d_y)
            for f in fns:
                lhs = apply_spectral_fn(rep.matrix, f)
                rhs = precompose_oracle(apply_spectral_fn(c, f), d_y).matrix
                assert np.linalg.norm(lhs - rhs) <= 1e-9 * (1 + np.linalg.norm(c))
        assert time.monotonic() - start < 5.0


def test_criterion_3_norm_identity():
    with criterion(3, "operator norm of the oracle equals the norm of C"):
        rng = np.random.default_rng(103)
        for _ in range(50):
            d_x = int(rng.integers(1, 9))
            d_y = int(rng.integers(1, 6))
            c = rng.standard_normal((d_x, d_x))
            rep = precompose_oracle(c, d_y)
            assert abs(schatten_norm(rep.matrix, np.inf) - schatten_norm(c, np.inf)) <= 1e-10


def test_criterion_4_pseudoinverse_agreement():
    with criterion(4, "matrix-level and oracle-level pseudoinverse solutions agree"):
        rng = np.random.default_rng(104)
        for _ in range(50):
            d_x = int(rng.integers(3, 7))
            d_y = int(rng.integers(1, 4))
            rank = int(rng.integers(1, d_x))
            lam = np.concatenate([rng.uniform(0.3, 1.3, rank), np.zeros(d_x - rank)])
            q, _ = np.linalg.qr(rng.standard_normal((d_x, d_x)))
            c_xx = (q * lam) @ q.T
            theta = rng.standard_normal((d_y, d_x))
            c_yx = theta @ c_xx
            got = solve_pseudo(c_xx, c_yx)
            m = precompose_oracle(c_xx.T, d_y).matrix  # vec convention: kron(c_xx, I)
            oracle = unvec(np.linalg.pinv(m) @ vec(c_yx), d_y, d_x)
            assert np.abs(got - oracle).max() <= 1e-8
            assert np.linalg.norm(got @ c_xx - c_yx) <= 1e-8


def test_criterion_5_closed_form_norms():
    with criterion(5, "existence report matches closed-form norms"):
        rng = np.random.default_rng(105)
        for _ in range(50):
            d_x = int(rng.integers(2, 7))
            d_y = int(rng.integers(1, 4))
            c_xx = random_psd(rng, d_x, lam_low=0.2, lam_high=1.5)
            c_yx = rng.standard_normal((d_y, d_x))
            rep = douglas_check(c_xx, c_yx)
            target = c_yx @ np.linalg.inv(c_xx)
            assert rep.range_inclusion
            assert abs(rep.sup_ratio_opnorm - np.linalg.norm(target, 2)) <= 1e-8
            assert abs(rep.hs_norm_sq - np.linalg.norm(target) ** 2) <= 1e-8


def test_criterion_6_strategy_constants():
    with criterion(6, "declared strategy constants verified on default grids"):
        for strat in (tikhonov(), truncation()):
            report = verify_strategy(strat)
            assert report.passed
            assert report.max_lambda_g <= 1.0 + 1e-12
            assert report.max_residual <= 1.0 + 1e-12
            assert report.max_g_alpha <= 1.0 + 1e-12
        assert qualification_check(tikhonov(), 1.0) <= 1.0 + 1e-12
        for q in (1.0, 2.0, 3.0):
            assert qualification_check(truncation(), q) <= 1.0 + 1e-12


def test_criterion_7_rate_reproduction():
    with criterion(7, "convergence-rate slopes at s=0 and s=1/2"):
        start = time.monotonic()
        cfg = StudyConfig(
            study="rate",
            d_x=40,
            d_y=5,
            decay="polynomial",
            decay_rate=2.0,
            nu=1.0,
            strategy="tikhonov",
            s_weight=0.0,
            n_grid=(128, 256, 512, 1024, 2048, 4096, 8192),
            replications=20,
            seed=20240801,
            threads=1,
        )
        report = run_rate_study(cfg)
        assert not report.degenerate
        assert report.theoretical_slopes[0.0] == pytest.approx(-0.25)
        assert report.theoretical_slopes[0.5] == pytest.approx(-0.375)
        assert report.slope_gap(0.0) <= 0.15, report.slopes
        assert report.slope_gap(0.5) <= 0.15, report.slopes
        assert time.monotonic() - start < 300.0


def test_criterion_8_concentration_coverage():
    with criterion(8, "covariance deviation bound coverage"):
        start = time.monotonic()
        cfg = StudyConfig(
            study="conc", n=500, delta=0.05, trials=500, d_x=40, d_y=5, calibration_n=100_000, seed=20240801
        )
        report = run_concentration_study(cfg)
        assert report.coverage >= 0.99
        assert time.monotonic() - start < 60.0


def test_criterion_9_excess_risk_inequality():
    with criterion(9, "excess-risk inequality on misspecified trials"):
        c_xx = make_covariance(6, "polynomial", 2.0)
        for trial in range(100):
            data, oracle = sample_misspecified(c_xx, 300, seed=9000 + trial, d_y=3, gamma=0.6)
            res = fit(data, tikhonov(), alpha_schedule(data.n, 1.0))
            gap = weighted_error(res.theta_hat, oracle.theta_star, c_xx, 0.5)
            value = excess_risk(res.theta_hat, oracle)
            assert value <= gap**2 + 2.0 * oracle.m_star * gap + 1e-8


def test_criterion_10_source_condition_round_trip():
    with criterion(10, "source-condition round trip recovers the radius"):
        c_xx = make_covariance(10, "polynomial", 2.0)
        for nu in (0.5, 1.0, 2.0):
            for seed in range(20):
                spec = SourceSpec(nu, 1.7, 500 + seed)
                theta = make_source_target(c_xx, spec, 4)
                value = source_condition_value(c_xx, theta @ c_xx, nu)
                assert abs(value - spec.R**2) <= 1e-6 * spec.R**2


def test_criterion_11_arh_recovery():
    with criterion(11, "autoregression recovery and error decay"):
        rng = np.random.default_rng(7)  # pilot-calibrated seed set
        theta = rng.standard_normal((5, 5))
        theta *= 0.6 / np.linalg.svd(theta, compute_uv=False)[0]
        noise = 0.09 * np.eye(5)
        errors = []
        for t_len in (2_000, 20_000, 200_000):
            traj = simulate_arh([theta], t_len, noise, seed=8)
            model = arh_fit(traj, 1, tikhonov(), 1e-3)
            errors.append(np.linalg.norm(model.blocks[0] - theta))
        assert errors[1] <= 0.15
        assert errors[0] > errors[1] > errors[2]


def test_criterion_12_cli_determinism(tmp_path):
    with criterion(12, "byte-identical CSVs across thread counts"):
        cfgfile = tmp_path / "cfg.toml"
        cfgfile.write_text(
            "study = 'rate'\nn_grid = [128, 256, 512]\nreplications = 3\n"
            "d_x = 12\nd_y = 3\nseed = 424242\n"
        )

        def run(out, threads):
            proc = subprocess.run(
                [
                    sys.executable,
                    "-m",
                    "oplearn.cli",
                    "rate",
                    "--config",
                    str(cfgfile),
                    "--out",
                    str(out),
                    "--threads",
                    str(threads),
                ],
                capture_output=True,
                text=True,
            )
            assert proc.returncode == 0, proc.stderr
            return (out / "rate.csv").read_bytes(), (out / "rate_summary.csv").read_bytes()

        first = run(tmp_path / "t1", 1)
        again = run(tmp_path / "t1b", 1)
        eight = run(tmp_path / "t8", 8)
        assert first == again  # identical across runs
        assert first == eight  # identical across thread counts
