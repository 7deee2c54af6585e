"""Executable invariant suite across all modules.

Each property is a seeded, self-contained check returning pass/fail (or
skip, when a resource guard such as the oracle cap applies).  The suite
backs the ``props`` subcommand of the benchmark CLI and is also exercised
by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import applications as apps
from . import estimate, hilbert, precompose, regularize, synthesize

__all__ = ["PropertyResult", "run_property_suite", "PROPERTIES"]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    status: str  # "pass" | "fail" | "skip"
    seed: int
    detail: str


def _result(name: str, ok: bool, seed: int, detail: str) -> PropertyResult:
    return PropertyResult(name, "pass" if ok else "fail", seed, detail)


def _random_psd(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((d, d))
    c = a @ a.T / d
    return scale * c


# --------------------------------------------------------------------------
# hilbert


def _prop_outer_identity(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        d_x, d_y = rng.integers(1, 9, size=2)
        x = rng.standard_normal(d_x)
        y = rng.standard_normal(d_y)
        v = rng.standard_normal(d_x)
        lhs = hilbert.outer(y, x) @ v
        rhs = float(x @ v) * y
        denom = 1.0 + np.linalg.norm(rhs)
        worst = max(worst, np.linalg.norm(lhs - rhs) / denom)
    return _result("hilbert.outer_identity", worst <= 1e-12, seed, f"max rel dev {worst:.2e}")


def _prop_schatten_monotone(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(200):
        a = rng.standard_normal((rng.integers(1, 7), rng.integers(1, 7)))
        s1 = hilbert.schatten_norm(a, 1)
        s2 = hilbert.schatten_norm(a, 2)
        sinf = hilbert.schatten_norm(a, np.inf)
        ok = ok and sinf <= s2 + 1e-12 and s2 <= s1 + 1e-12
    return _result("hilbert.schatten_monotone", ok, seed, "s_inf <= s_2 <= s_1 on 200 draws")


def _prop_empirical_cov_psd(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(25):
        xs = rng.standard_normal((rng.integers(1, 30), rng.integers(1, 8)))
        c = hilbert.empirical_cov(xs)
        worst = min(worst, float(np.linalg.eigvalsh((c + c.T) / 2).min()))
    return _result("hilbert.empirical_cov_psd", worst >= -1e-10, seed, f"min eigenvalue {worst:.2e}")


def _prop_spectral_power_composition(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        c = _random_psd(rng, 6)
        for a in (0.5, 1.0, 2.0):
            for b in (0.5, 1.0, 2.0):
                # composing the two multiplications realises the summed power
                product = hilbert.apply_spectral_fn(c, lambda lam: lam**a) @ hilbert.apply_spectral_fn(
                    c, lambda lam: lam**b
                )
                one_step = hilbert.apply_spectral_fn(c, lambda lam: lam ** (a + b))
                worst = max(worst, float(np.abs(product - one_step).max()))
    return _result("hilbert.spectral_power_composition", worst <= 1e-9, seed, f"max dev {worst:.2e}")


# --------------------------------------------------------------------------
# precompose


def _prop_oracle_spectrum(seed: int, cap: int) -> PropertyResult:
    name = "precompose.oracle_spectrum"
    if 8 * 5 > cap:
        return PropertyResult(name, "skip", seed, f"oracle cap {cap} below required side 40")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        d_x = int(rng.integers(1, 9))
        d_y = int(rng.integers(1, 6))
        c = _random_psd(rng, d_x)
        rep = precompose.precompose_oracle(c, d_y, cap=cap)
        big = np.sort(np.linalg.eigvalsh(rep.matrix))[::-1]
        small = np.sort(np.repeat(np.linalg.eigvalsh(c), d_y))[::-1]
        worst = max(worst, float(np.abs(big - small).max()))
    return _result(name, worst <= 1e-10, seed, f"max eigenvalue dev {worst:.2e}")


def _prop_oracle_injectivity(seed: int, cap: int) -> PropertyResult:
    name = "precompose.oracle_injectivity"
    if 6 * 4 > cap:
        return PropertyResult(name, "skip", seed, f"oracle cap {cap} below required side 24")
    rng = np.random.default_rng(seed)
    tol = 1e-10
    ok = True
    for k in range(20):
        d_x = int(rng.integers(2, 7))
        c = rng.standard_normal((d_x, d_x))
        if k % 2 == 0:
            c[:, -1] = c[:, :-1] @ rng.standard_normal(d_x - 1)  # force rank deficiency
        rep = precompose.precompose_oracle(c, 3, cap=cap)
        sv_c = np.linalg.svd(c, compute_uv=False)
        sv_m = np.linalg.svd(rep.matrix, compute_uv=False)
        full_c = bool(np.all(sv_c > tol * sv_c[0]))
        full_m = bool(np.all(sv_m > tol * sv_m[0]))
        ok = ok and (full_c == full_m)
    return _result(name, ok, seed, "full-rank equivalence on 20 draws")


def _prop_functional_calculus(seed: int, cap: int) -> PropertyResult:
    name = "precompose.functional_calculus"
    if 6 * 4 > cap:
        return PropertyResult(name, "skip", seed, f"oracle cap {cap} below required side 24")
    rng = np.random.default_rng(seed)
    alpha = 0.1
    fns = [
        lambda lam: 1.0 / (alpha + lam),
        lambda lam: lam**0.8,
        lambda lam: (1.0 / lam if lam > alpha else 0.0),
    ]
    worst = 0.0
    for _ in range(10):
        d_x = int(rng.integers(2, 7))
        d_y = int(rng.integers(1, 5))
        # keep the spectrum away from the truncation threshold alpha
        lam = 0.2 + rng.uniform(0.0, 1.0, size=d_x)
        q, _ = np.linalg.qr(rng.standard_normal((d_x, d_x)))
        c = (q * lam) @ q.T
        rep = precompose.precompose_oracle(c, d_y, cap=cap)
        for f in fns:
            lhs = hilbert.apply_spectral_fn(rep.matrix, f)
            rhs = precompose.precompose_oracle(hilbert.apply_spectral_fn(c, f), d_y, cap=cap).matrix
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return _result(name, worst <= 1e-9, seed, f"max HS dev {worst:.2e}")


def _prop_pseudo_minimal_norm(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    d_x, d_y, rank = 6, 3, 3
    u = rng.standard_normal((d_x, rank))
    c_xx = u @ u.T / d_x
    theta = rng.standard_normal((d_y, d_x))
    c_yx = theta @ c_xx
    theta_min = precompose.solve_pseudo(c_xx, c_yx)
    base = np.linalg.norm(theta_min)
    # perturbations inside the forward map's null space leave the data fixed
    w, v = np.linalg.eigh(c_xx)
    null = v[:, w <= 1e-12 * w.max()]
    ok = null.shape[1] > 0
    for _ in range(100):
        kappa = rng.standard_normal((d_y, null.shape[1])) @ null.T
        residual = np.linalg.norm((theta_min + kappa) @ c_xx - c_yx)
        ok = ok and residual <= 1e-9 and np.linalg.norm(theta_min + kappa) >= base - 1e-9
    return _result("precompose.pseudo_minimal_norm", ok, seed, f"base HS norm {base:.3f}")


# --------------------------------------------------------------------------
# regularize


def _prop_pointwise_limit(seed: int, cap: int) -> PropertyResult:
    lam = 0.7
    alphas = 10.0 ** -np.arange(1, 9)
    ok = True
    for strat in (regularize.tikhonov(), regularize.truncation(), regularize.landweber(0.5)):
        errs = [abs(regularize.g_eval(strat, a, lam) - 1.0 / lam) for a in alphas]
        ok = ok and errs[-1] <= 1e-6
        if strat.kind == "tikhonov":
            ok = ok and all(e1 >= e2 - 1e-15 for e1, e2 in zip(errs, errs[1:]))
    return _result("regularize.pointwise_pseudoinverse_limit", ok, seed, "g_a(0.7) -> 1/0.7")


def _prop_residual_weighted_bound(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    ok = True
    worst = 0.0
    for strat in (regularize.tikhonov(), regularize.truncation()):
        gbar = max(strat.gamma0, strat.gamma_q)
        for _ in range(5):
            c = _random_psd(rng, 6)
            for alpha in (1e-3, 1e-2, 1e-1):
                for s in (0.0, 0.25, 0.5):
                    m = hilbert.apply_spectral_fn(
                        c, lambda lam: (lam + alpha) ** s * (1.0 - lam * regularize.g_eval(strat, alpha, lam))
                    )
                    val = float(np.linalg.svd(m, compute_uv=False)[0])
                    bound = 2.0 * gbar * alpha**s
                    worst = max(worst, val / bound)
                    ok = ok and val <= bound * (1.0 + 1e-9)
    return _result("regularize.residual_weighted_bound", ok, seed, f"max ratio {worst:.3f}")


def _prop_filter_weighted_bound(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    ok = True
    worst = 0.0
    for strat in (regularize.tikhonov(), regularize.truncation()):
        kappa = (strat.D + 1.0) * strat.B
        for _ in range(5):
            c = _random_psd(rng, 6)
            for alpha in (1e-3, 1e-2, 1e-1):
                for s in (0.0, 0.25, 0.5):
                    m = hilbert.apply_spectral_fn(
                        c, lambda lam: regularize.g_eval(strat, alpha, lam) * (lam + alpha) ** (s + 0.5)
                    )
                    val = float(np.linalg.svd(m, compute_uv=False)[0])
                    bound = kappa * alpha ** (s - 0.5)
                    worst = max(worst, val / bound)
                    ok = ok and val <= bound * (1.0 + 1e-9)
    return _result("regularize.filter_weighted_bound", ok, seed, f"max ratio {worst:.3f}")


def _prop_strategy_constants(seed: int, cap: int) -> PropertyResult:
    ok = True
    details = []
    for strat in (regularize.tikhonov(), regularize.truncation(), regularize.landweber(0.1)):
        report = regularize.verify_strategy(strat)
        ok = ok and report.passed
        details.append(f"{strat.kind}:{'ok' if report.passed else 'VIOLATED'}")
    return _result("regularize.strategy_constants", ok, seed, " ".join(details))


# --------------------------------------------------------------------------
# estimate


def _prop_rotation_equivariance(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(5):
        n, d_x, d_y = 40, 5, 3
        xs = rng.standard_normal((n, d_x))
        ys = rng.standard_normal((n, d_y))
        q, _ = np.linalg.qr(rng.standard_normal((d_x, d_x)))
        strat = regularize.tikhonov()
        base = estimate.fit(estimate.SampleSet(xs, ys), strat, 0.1).theta_hat
        rotated = estimate.fit(estimate.SampleSet(xs @ q, ys), strat, 0.1).theta_hat
        worst = max(worst, float(np.abs(rotated - base @ q).max()))
    return _result("estimate.rotation_equivariance", worst <= 1e-9, seed, f"max dev {worst:.2e}")


def _prop_stationarity(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    d_x, d_y = 5, 3
    c_xx = _random_psd(rng, d_x) + 0.2 * np.eye(d_x)
    theta_star = rng.standard_normal((d_y, d_x))
    c_yx = theta_star @ c_xx

    def objective(theta):
        return float(np.trace(-2.0 * c_yx @ theta.T + theta @ c_xx @ theta.T))

    h = 1e-6
    worst = 0.0
    for _ in range(50):
        delta = rng.standard_normal((d_y, d_x))
        delta /= np.linalg.norm(delta)
        deriv = (objective(theta_star + h * delta) - objective(theta_star - h * delta)) / (2 * h)
        worst = max(worst, abs(deriv))
    return _result("estimate.population_stationarity", worst <= 1e-8, seed, f"max |dF| {worst:.2e}")


def _prop_error_decomposition(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    ok = True
    for trial in range(10):
        d_x, d_y, n = 6, 3, 200
        c_xx = synthesize.make_covariance(d_x, "polynomial", 2.0)
        theta_star = synthesize.make_source_target(c_xx, synthesize.SourceSpec(1.0, 1.0, seed + trial), d_y)
        model = synthesize.make_linear_model(c_xx, theta_star, 0.1 * np.eye(d_y))
        data = synthesize.sample_linear_model(model, n, seed + 1000 + trial)
        strat = regularize.tikhonov()
        alpha = 0.05
        res = estimate.fit(data, strat, alpha)
        c_hat = hilbert.empirical_cov(data.xs)
        c_yx_hat = hilbert.empirical_cov(data.xs, data.ys)
        g_hat = regularize.regularized_inverse(strat, alpha, c_hat)
        for s in (0.0, 0.25, 0.5):
            w = hilbert.apply_spectral_fn(c_xx, lambda lam: lam**s)
            total = np.linalg.norm((theta_star - res.theta_hat) @ w)
            resid = hilbert.apply_spectral_fn(
                c_hat, lambda lam: 1.0 - lam * regularize.g_eval(strat, alpha, lam)
            )
            approx = np.linalg.norm(theta_star @ resid @ w)
            variance = np.linalg.norm((theta_star @ c_hat - c_yx_hat) @ g_hat @ w)
            ok = ok and total <= approx + variance + 1e-10
    return _result("estimate.error_decomposition", ok, seed, "triangle bound on 10 trials x 3 weights")


# --------------------------------------------------------------------------
# synthesize


def _prop_source_round_trip(seed: int, cap: int) -> PropertyResult:
    worst = 0.0
    c_xx = synthesize.make_covariance(8, "polynomial", 2.0)
    for nu in (0.5, 1.0, 2.0):
        for k in range(20):
            spec = synthesize.SourceSpec(nu, 1.5, seed + k)
            theta = synthesize.make_source_target(c_xx, spec, 3)
            value = precompose.source_condition_value(c_xx, theta @ c_xx, nu)
            worst = max(worst, abs(value - spec.R**2) / spec.R**2)
    return _result("synthesize.source_round_trip", worst <= 1e-6, seed, f"max rel dev {worst:.2e}")


def _prop_exogeneity_rate(seed: int, cap: int) -> PropertyResult:
    c_xx = synthesize.make_covariance(5, "polynomial", 2.0)
    rng = np.random.default_rng(seed)
    theta_star = rng.standard_normal((3, 5))
    model = synthesize.make_linear_model(c_xx, theta_star, 0.25 * np.eye(3))
    ns = [1000, 10_000, 100_000]
    norms = []
    for i, n in enumerate(ns):
        devs = []
        for rep in range(8):
            data = synthesize.sample_linear_model(model, n, seed + 17 * i + rep)
            eps = data.ys - data.xs @ theta_star.T
            devs.append(np.linalg.norm(hilbert.empirical_cov(data.xs, eps)))
        norms.append(float(np.median(devs)))
    slope = np.polyfit(np.log(ns), np.log(norms), 1)[0]
    return _result("synthesize.exogeneity_rate", abs(slope + 0.5) <= 0.15, seed, f"slope {slope:.3f}")


def _prop_tensor_subexponential(seed: int, cap: int) -> PropertyResult:
    c_xx = synthesize.make_covariance(6, "polynomial", 2.0)
    rng = np.random.default_rng(seed)
    theta_star = rng.standard_normal((3, 6))
    model = synthesize.make_linear_model(c_xx, theta_star, 0.5 * np.eye(3))
    data = synthesize.sample_linear_model(model, 50_000, seed)
    tensor_norms = np.linalg.norm(data.xs, axis=1) * np.linalg.norm(data.ys, axis=1)
    psi1 = synthesize.psi1_estimate(tensor_norms)
    bound = 2.0 * synthesize.psi2_estimate(data.xs) * synthesize.psi2_estimate(data.ys) * 1.1
    return _result(
        "synthesize.tensor_subexponential", psi1 <= bound, seed, f"psi1 {psi1:.3f} vs bound {bound:.3f}"
    )


# --------------------------------------------------------------------------
# applications


def _prop_identity_lift(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((60, 4))
    ys = rng.standard_normal((60, 2))
    strat = regularize.tikhonov()
    direct = estimate.fit(estimate.SampleSet(xs, ys), strat, 0.05).theta_hat
    lifted = apps.cme_fit(xs, ys, apps.identity_lift(4), strat, 0.05).theta_hat
    same = np.array_equal(direct, lifted)
    return _result("applications.identity_lift", same, seed, "bit-for-bit agreement")


def _prop_arh_order1_reduction(seed: int, cap: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal((4, 4))
    theta *= 0.5 / np.linalg.svd(theta, compute_uv=False)[0]
    traj = apps.simulate_arh([theta], 400, 0.2 * np.eye(4), seed)
    strat = regularize.tikhonov()
    model = apps.arh_fit(traj, 1, strat, 1e-3)
    pairs = estimate.SampleSet(traj[:-1], traj[1:])
    direct = estimate.fit(pairs, strat, 1e-3).theta_hat
    dev = float(np.abs(model.blocks[0] - direct).max())
    return _result("applications.arh_order1_reduction", dev <= 1e-12, seed, f"max dev {dev:.2e}")


def _prop_lifted_frame_spectrum(seed: int, cap: int) -> PropertyResult:
    name = "applications.lifted_frame_spectrum"
    d_phi, d_y = 7, 3
    if d_phi * d_y > cap:
        return PropertyResult(name, "skip", seed, f"oracle cap {cap} below required side {d_phi * d_y}")
    rng = np.random.default_rng(seed)
    raw = rng.uniform(-1, 1, size=(80, 2))
    lift = apps.random_fourier_lift(1.0, d_phi, 2, seed)
    c_hat = hilbert.empirical_cov(lift.apply(raw))
    rep = precompose.precompose_oracle(c_hat, d_y, cap=cap)
    big = np.sort(np.linalg.eigvalsh(rep.matrix))[::-1]
    small = np.sort(np.repeat(np.linalg.eigvalsh(c_hat), d_y))[::-1]
    dev = float(np.abs(big - small).max())
    return _result(name, dev <= 1e-10, seed, f"max eigenvalue dev {dev:.2e}")


PROPERTIES: list[tuple[str, Callable[[int, int], PropertyResult]]] = [
    ("hilbert.outer_identity", _prop_outer_identity),
    ("hilbert.schatten_monotone", _prop_schatten_monotone),
    ("hilbert.empirical_cov_psd", _prop_empirical_cov_psd),
    ("hilbert.spectral_power_composition", _prop_spectral_power_composition),
    ("precompose.oracle_spectrum", _prop_oracle_spectrum),
    ("precompose.oracle_injectivity", _prop_oracle_injectivity),
    ("precompose.functional_calculus", _prop_functional_calculus),
    ("precompose.pseudo_minimal_norm", _prop_pseudo_minimal_norm),
    ("regularize.pointwise_pseudoinverse_limit", _prop_pointwise_limit),
    ("regularize.residual_weighted_bound", _prop_residual_weighted_bound),
    ("regularize.filter_weighted_bound", _prop_filter_weighted_bound),
    ("regularize.strategy_constants", _prop_strategy_constants),
    ("estimate.rotation_equivariance", _prop_rotation_equivariance),
    ("estimate.population_stationarity", _prop_stationarity),
    ("estimate.error_decomposition", _prop_error_decomposition),
    ("synthesize.source_round_trip", _prop_source_round_trip),
    ("synthesize.exogeneity_rate", _prop_exogeneity_rate),
    ("synthesize.tensor_subexponential", _prop_tensor_subexponential),
    ("applications.identity_lift", _prop_identity_lift),
    ("applications.arh_order1_reduction", _prop_arh_order1_reduction),
    ("applications.lifted_frame_spectrum", _prop_lifted_frame_spectrum),
]


def run_property_suite(seed: int = 2024, oracle_cap: Optional[int] = None) -> list[PropertyResult]:
    """Run every registered property; failures never raise, they report."""
    cap = precompose.ORACLE_CAP if oracle_cap is None else int(oracle_cap)
    results = []
    for offset, (_, prop) in enumerate(PROPERTIES):
        results.append(prop(seed + offset, cap))
    return results
