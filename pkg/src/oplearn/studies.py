"""Benchmark studies: convergence rates, concentration coverage, demos.

Studies are driven by a :class:`StudyConfig` (TOML primary, JSON accepted),
executed as independent tasks keyed by (n, replication) with seeds derived
deterministically from the master seed, and merged in key order so that CSV
outputs are byte-identical across thread counts and runs.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import applications as apps
from .estimate import alpha_schedule, fit, weighted_error
from .hilbert import empirical_cov
from .regularize import (
    RegStrategy,
    landweber,
    qualification_check,
    tikhonov,
    truncation,
)
from .synthesize import (
    SourceSpec,
    make_covariance,
    make_linear_model,
    make_source_target,
    psi2_estimate,
    sample_linear_model,
)

__all__ = [
    "StudyConfig",
    "StudyInputError",
    "RateReport",
    "ConcentrationReport",
    "load_config",
    "run_rate_study",
    "run_concentration_study",
    "run_demo",
    "ingest_trajectory",
]

#: constant of the covariance deviation bound, 24 sqrt(2) e
COVARIANCE_BOUND_CONSTANT = 24.0 * math.sqrt(2.0) * math.e

#: every rate report carries this caveat: sample sizes sit far below the
#: theory's n0 threshold, so only slopes are asserted, never constants
BELOW_N0_NOTE = "n grid lies below the theoretical n0 threshold; slopes asserted, constants not"


class StudyInputError(ValueError):
    """Invalid configuration or unreadable input; maps to exit code 2."""


@dataclass(frozen=True)
class StudyConfig:
    """Declarative description of one study run."""

    study: str = "rate"
    d_x: int = 40
    d_y: int = 5
    decay: str = "polynomial"
    decay_rate: float = 2.0
    decay_scale: float = 1.0
    nu: float = 1.0
    source_radius: float = 1.0
    strategy: str = "tikhonov"
    tau: Optional[float] = None
    s_weight: float = 0.0
    alpha_override: Optional[float] = None
    n_grid: tuple[int, ...] = (128, 256, 512, 1024, 2048, 4096, 8192)
    replications: int = 20
    delta: float = 0.05
    seed: int = 20240801
    noise_scale: float = 0.25
    out_dir: str = "out"
    threads: int = 1
    # concentration study
    n: int = 500
    trials: int = 500
    calibration_n: int = 100_000
    psi2_p_max: int = 32
    # demos
    input_csv: Optional[str] = None
    arh_order: int = 1
    arh_t: int = 20_000
    holdout_fraction: float = 0.2
    lift_features: int = 64
    lift_bandwidth: float = 1.0
    plots: bool = False

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise StudyInputError("n_grid must be strictly increasing")
        if not grid or grid[0] < 1:
            raise StudyInputError("n_grid must contain positive sample sizes")
        if self.replications < 1:
            raise StudyInputError("replications must be at least 1")
        if not 0.0 < self.delta <= 0.5:
            raise StudyInputError("delta must lie in (0, 1/2]")
        if self.threads < 1:
            raise StudyInputError("threads must be at least 1")

    def make_strategy(self) -> RegStrategy:
        if self.strategy == "tikhonov":
            return tikhonov()
        if self.strategy == "truncation":
            return truncation()
        if self.strategy == "landweber":
            return landweber(self.tau)
        raise StudyInputError(f"unknown strategy {self.strategy!r}")

    def study_hash(self) -> str:
        """Hash of the study parameters (execution knobs excluded)."""
        payload = dataclasses.asdict(self)
        for key in ("threads", "out_dir", "plots"):
            payload.pop(key, None)
        digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()
        return digest[:16]


def load_config(path, overrides: Optional[dict] = None) -> StudyConfig:
    """Load a TOML or JSON config file and apply CLI overrides."""
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise StudyInputError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StudyInputError(f"invalid JSON in {path}: {exc}") from exc
    else:
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            data = tomllib.loads(text.decode())
        except Exception as exc:
            raise StudyInputError(f"invalid TOML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise StudyInputError(f"config root must be a table/object, got {type(data).__name__}")
    known = {f.name for f in dataclasses.fields(StudyConfig)}
    unknown = set(data) - known
    if unknown:
        raise StudyInputError(f"unknown config keys: {sorted(unknown)}")
    if "n_grid" in data:
        data["n_grid"] = tuple(data["n_grid"])
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    try:
        return StudyConfig(**merged)
    except TypeError as exc:
        raise StudyInputError(f"bad config: {exc}") from exc


def _task_seed(master: int, *key: int) -> int:
    ss = np.random.SeedSequence([int(master), *map(int, key)])
    return int(ss.generate_state(1, np.uint64)[0])


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows: list[tuple], comments: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_svg_lines(path: Path, series: dict[str, list[tuple[float, float]]], title: str) -> None:
    # minimal dependency-free polyline plot on log-log-transformed inputs
    width, height, pad = 640, 420, 50
    points = [p for pts in series.values() for p in pts]
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = lambda x: pad + (width - 2 * pad) * (x - x0) / (x1 - x0 or 1.0)
    sy = lambda y: height - pad - (height - 2 * pad) * (y - y0) / (y1 - y0 or 1.0)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="#999"/>',
    ]
    for i, (name, pts) in enumerate(series.items()):
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{pad + 5}" y="{pad + 15 + 14 * i}" fill="{color}" font-size="12">{name}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# rate study


@dataclass(frozen=True)
class RateReport:
    """Per-(n, replication) errors plus fitted log-log slopes."""

    n_grid: tuple[int, ...]
    alphas: dict[int, float]
    errors: dict[int, np.ndarray] = field(repr=False)  # n -> (reps, 2) for s=0, s=1/2
    medians: dict[float, list[float]]
    quartiles: dict[float, list[tuple[float, float]]]
    slopes: dict[float, float]
    slope_residuals: dict[float, float]
    theoretical_slopes: dict[float, float]
    degenerate: bool
    note: str
    config_hash: str
    seed: int

    def slope_gap(self, s: float) -> float:
        return abs(self.slopes[s] - self.theoretical_slopes[s])


def theoretical_rate_slope(nu: float, s: float) -> float:
    """Slope of log error against log n under the source condition."""
    return -(s + nu) / (2.0 * (1.0 + nu))


#: medians at or below this are solver round-off, not statistical error
DEGENERATE_FLOOR = 1e-7


def _rate_task(cfg: StudyConfig, model, theta_star, strategy, n: int, rep: int):
    seed = _task_seed(cfg.seed, n, rep)
    data = sample_linear_model(model, n, seed)
    alpha = cfg.alpha_override if cfg.alpha_override is not None else alpha_schedule(n, cfg.nu)
    result = fit(data, strategy, alpha)
    e0 = weighted_error(result.theta_hat, theta_star, model.c_xx_true, 0.0)
    e05 = weighted_error(result.theta_hat, theta_star, model.c_xx_true, 0.5)
    return n, rep, alpha, e0, e05


def run_rate_study(cfg: StudyConfig, out_dir: Optional[Path] = None) -> RateReport:
    """Measure weighted errors along the rate-optimal schedule and fit slopes.

    Aborts with a diagnostic when the configured strategy does not cover
    qualification order ``nu + s_weight`` on the default verification grids.
    """
    strategy = cfg.make_strategy()
    q_needed = cfg.nu + cfg.s_weight
    sup = qualification_check(strategy, q_needed)
    allowed = strategy.gamma_at(q_needed) * (1.0 + 1e-9) + 1e-12
    if sup > allowed:
        raise StudyInputError(
            f"strategy {cfg.strategy!r} fails qualification at order {q_needed}: "
            f"empirical sup {sup:.3e} exceeds declared gamma {allowed:.3e}"
        )

    c_xx = make_covariance(cfg.d_x, cfg.decay, cfg.decay_rate, cfg.decay_scale)
    theta_star = make_source_target(
        c_xx, SourceSpec(cfg.nu, cfg.source_radius, _task_seed(cfg.seed, 0)), cfg.d_y
    )
    model = make_linear_model(c_xx, theta_star, cfg.noise_scale**2 * np.eye(cfg.d_y))

    tasks = [(n, rep) for n in cfg.n_grid for rep in range(cfg.replications)]
    results: dict[tuple[int, int], tuple] = {}
    if cfg.threads == 1:
        for n, rep in tasks:
            out = _rate_task(cfg, model, theta_star, strategy, n, rep)
            results[(n, rep)] = out
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {
                pool.submit(_rate_task, cfg, model, theta_star, strategy, n, rep): (n, rep)
                for n, rep in tasks
            }
            for fut in concurrent.futures.as_completed(futures):
                n, rep, alpha, e0, e05 = fut.result()
                results[(n, rep)] = (n, rep, alpha, e0, e05)

    errors = {n: np.zeros((cfg.replications, 2)) for n in cfg.n_grid}
    alphas = {}
    rows = []
    for n in cfg.n_grid:
        for rep in range(cfg.replications):
            _, _, alpha, e0, e05 = results[(n, rep)]
            errors[n][rep] = (e0, e05)
            alphas[n] = alpha
            rows.append((n, rep, alpha, e0, e05))

    medians: dict[float, list[float]] = {}
    quartiles: dict[float, list[tuple[float, float]]] = {}
    slopes: dict[float, float] = {}
    slope_residuals: dict[float, float] = {}
    degenerate = False
    for col, s in ((0, 0.0), (1, 0.5)):
        med = [float(np.median(errors[n][:, col])) for n in cfg.n_grid]
        q1 = [float(np.quantile(errors[n][:, col], 0.25)) for n in cfg.n_grid]
        q3 = [float(np.quantile(errors[n][:, col], 0.75)) for n in cfg.n_grid]
        medians[s] = med
        quartiles[s] = list(zip(q1, q3))
        if min(med) <= DEGENERATE_FLOOR:
            degenerate = True
        logs = np.log(np.maximum(med, 1e-300))
        coef = np.polyfit(np.log(cfg.n_grid), logs, 1)
        fitline = np.polyval(coef, np.log(cfg.n_grid))
        slopes[s] = float(coef[0])
        slope_residuals[s] = float(np.sqrt(np.mean((fitline - logs) ** 2)))

    report = RateReport(
        n_grid=cfg.n_grid,
        alphas=alphas,
        errors=errors,
        medians=medians,
        quartiles=quartiles,
        slopes=slopes,
        slope_residuals=slope_residuals,
        theoretical_slopes={s: theoretical_rate_slope(cfg.nu, s) for s in (0.0, 0.5)},
        degenerate=degenerate,
        note=BELOW_N0_NOTE,
        config_hash=cfg.study_hash(),
        seed=cfg.seed,
    )

    if out_dir is not None:
        out_dir = Path(out_dir)
        comments = [f"config_hash={report.config_hash} seed={cfg.seed}", f"note={BELOW_N0_NOTE}"]
        _write_csv(out_dir / "rate.csv", ["n", "replication", "alpha", "error_s0", "error_s05"], rows, comments)
        summary_rows = [
            (
                n,
                medians[0.0][i],
                quartiles[0.0][i][0],
                quartiles[0.0][i][1],
                medians[0.5][i],
                quartiles[0.5][i][0],
                quartiles[0.5][i][1],
            )
            for i, n in enumerate(cfg.n_grid)
        ]
        _write_csv(
            out_dir / "rate_summary.csv",
            ["n", "median_s0", "q1_s0", "q3_s0", "median_s05", "q1_s05", "q3_s05"],
            summary_rows,
            comments
            + [
                f"slope_s0={report.slopes[0.0]!r} theoretical={report.theoretical_slopes[0.0]!r}",
                f"slope_s05={report.slopes[0.5]!r} theoretical={report.theoretical_slopes[0.5]!r}",
                f"degenerate={int(degenerate)}",
            ],
        )
        if cfg.plots:
            series = {
                "s=0": [(math.log(n), math.log(max(m, 1e-300))) for n, m in zip(cfg.n_grid, medians[0.0])],
                "s=1/2": [(math.log(n), math.log(max(m, 1e-300))) for n, m in zip(cfg.n_grid, medians[0.5])],
            }
            _write_svg_lines(out_dir / "rate.svg", series, "log median error vs log n")
    return report


# ---------------------------------------------------------------------------
# concentration study


@dataclass(frozen=True)
class ConcentrationReport:
    """Per-trial covariance deviations against the sub-Gaussian bound."""

    trials: int
    n: int
    delta: float
    deviations: np.ndarray = field(repr=False)
    bound: float
    coverage: float
    psi2_x: float
    psi2_p_max: int
    calibration_n: int
    config_hash: str
    seed: int


def run_concentration_study(cfg: StudyConfig, out_dir: Optional[Path] = None) -> ConcentrationReport:
    """Check the empirical-covariance deviation bound over repeated samples."""
    if cfg.n < math.log(1.0 / cfg.delta):
        raise StudyInputError(
            f"concentration study needs n >= log(1/delta) = {math.log(1 / cfg.delta):.3f}, got n={cfg.n}"
        )
    c_xx = make_covariance(cfg.d_x, cfg.decay, cfg.decay_rate, cfg.decay_scale)
    theta_star = make_source_target(
        c_xx, SourceSpec(cfg.nu, cfg.source_radius, _task_seed(cfg.seed, 0)), cfg.d_y
    )
    model = make_linear_model(c_xx, theta_star, cfg.noise_scale**2 * np.eye(cfg.d_y))

    calib = sample_linear_model(model, cfg.calibration_n, _task_seed(cfg.seed, 1))
    psi2_x = psi2_estimate(calib.xs, cfg.psi2_p_max)
    bound = COVARIANCE_BOUND_CONSTANT * psi2_x**2 * math.sqrt(math.log(1.0 / cfg.delta) / cfg.n)

    def trial(k: int) -> float:
        data = sample_linear_model(model, cfg.n, _task_seed(cfg.seed, 2, k))
        return float(np.linalg.norm(empirical_cov(data.xs) - c_xx))

    if cfg.threads == 1:
        deviations = np.array([trial(k) for k in range(cfg.trials)])
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            deviations = np.array(list(pool.map(trial, range(cfg.trials))))

    covered = deviations <= bound
    report = ConcentrationReport(
        trials=cfg.trials,
        n=cfg.n,
        delta=cfg.delta,
        deviations=deviations,
        bound=bound,
        coverage=float(np.mean(covered)),
        psi2_x=psi2_x,
        psi2_p_max=cfg.psi2_p_max,
        calibration_n=cfg.calibration_n,
        config_hash=cfg.study_hash(),
        seed=cfg.seed,
    )
    if out_dir is not None:
        comments = [
            f"config_hash={report.config_hash} seed={cfg.seed}",
            f"psi2_x={psi2_x!r} p_max={cfg.psi2_p_max} calibration_n={cfg.calibration_n}",
        ]
        rows = [(k, deviations[k], bound, bool(covered[k])) for k in range(cfg.trials)]
        _write_csv(Path(out_dir) / "conc.csv", ["trial", "deviation", "bound", "covered"], rows, comments)
    return report


# ---------------------------------------------------------------------------
# demos


def ingest_trajectory(path, d_y: Optional[int] = None) -> np.ndarray:
    """Read a trajectory CSV: one row per time step, optional header row.

    Rejects empty files, ragged rows and non-finite values, reporting the
    offending line number.
    """
    path = Path(path)
    try:
        raw_lines = path.read_text().splitlines()
    except OSError as exc:
        raise StudyInputError(f"cannot read trajectory {path}: {exc}") from exc
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(raw_lines)]
    lines = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise StudyInputError(f"{path}: empty trajectory file")

    def parse(no: int, ln: str) -> Optional[list[float]]:
        try:
            return [float(tok) for tok in ln.split(",")]
        except ValueError:
            return None

    start = 0
    first = parse(*lines[0])
    if first is None:
        start = 1  # header row
        if len(lines) == 1:
            raise StudyInputError(f"{path}: no data rows after header")
    rows = []
    width = None
    for no, ln in lines[start:]:
        vals = parse(no, ln)
        if vals is None:
            raise StudyInputError(f"{path}: line {no}: non-numeric value")
        if not all(math.isfinite(v) for v in vals):
            raise StudyInputError(f"{path}: line {no}: non-finite value")
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise StudyInputError(f"{path}: line {no}: expected {width} columns, got {len(vals)}")
        rows.append(vals)
    traj = np.asarray(rows, dtype=float)
    if d_y is not None and traj.shape[1] != d_y:
        raise StudyInputError(f"{path}: expected {d_y} columns, found {traj.shape[1]}")
    return traj


def _demo_arh_trajectory(cfg: StudyConfig) -> tuple[np.ndarray, Optional[np.ndarray]]:
    if cfg.input_csv is not None:
        return ingest_trajectory(cfg.input_csv), None
    rng = np.random.default_rng(_task_seed(cfg.seed, 3))
    theta = rng.standard_normal((cfg.d_y, cfg.d_y))
    theta *= 0.6 / np.linalg.svd(theta, compute_uv=False)[0]
    noise = 0.3**2 * np.eye(cfg.d_y)
    traj = apps.simulate_arh([theta], cfg.arh_t, noise, _task_seed(cfg.seed, 4))
    return traj, theta


def run_demo(kind: str, cfg: StudyConfig, out_dir: Path) -> dict:
    """Run one of the bundled demos and write its metric/plot files."""
    out_dir = Path(out_dir)
    if kind == "arh":
        return _run_demo_arh(cfg, out_dir)
    if kind == "cme":
        return _run_demo_cme(cfg, out_dir)
    raise StudyInputError(f"unknown demo kind {kind!r}")


def _run_demo_arh(cfg: StudyConfig, out_dir: Path) -> dict:
    traj, theta_true = _demo_arh_trajectory(cfg)
    t_len = traj.shape[0]
    split = max(int(t_len * (1.0 - cfg.holdout_fraction)), 10 * cfg.arh_order + 1)
    if split >= t_len:
        raise StudyInputError("trajectory too short for the requested holdout")
    strategy = cfg.make_strategy()
    model = apps.arh_fit(traj[:split], cfg.arh_order, strategy, 1e-3)
    r = cfg.arh_order
    rows = []
    track_rows = []
    sq_errors = []
    for t in range(split, t_len):
        forecast = apps.arh_forecast(model, traj[t - r : t])
        err = float(np.sum((traj[t] - forecast) ** 2))
        sq_errors.append(err)
        rows.append((t, err))
        track_rows.append((t, *traj[t], *forecast))
    mse = float(np.mean(sq_errors))
    comments = [f"config_hash={cfg.study_hash()} seed={cfg.seed}"]
    summary: dict = {"forecast_mse": mse, "order": r, "n_test": len(sq_errors)}
    if theta_true is not None:
        theta_err = float(np.linalg.norm(model.blocks[0] - theta_true))
        summary["theta_hs_error"] = theta_err
        comments.append(f"theta_hs_error={theta_err!r}")
    _write_csv(out_dir / "demo_arh_metrics.csv", ["t", "squared_error"], rows, comments + [f"forecast_mse={mse!r}"])
    d_y = traj.shape[1]
    track_header = ["t"] + [f"actual_{j}" for j in range(d_y)] + [f"forecast_{j}" for j in range(d_y)]
    _write_csv(out_dir / "demo_arh_forecasts.csv", track_header, track_rows, comments)
    if cfg.plots:
        series = {"sq_error": [(float(t), e) for t, e in rows[:500]]}
        _write_svg_lines(out_dir / "demo_arh.svg", series, "one-step squared forecast error")
    return summary


def _demo_cme_truth(raw: np.ndarray) -> np.ndarray:
    return np.column_stack([np.sin(2.0 * raw[:, 0]), np.cos(raw[:, 0] + raw[:, 1])])


def _run_demo_cme(cfg: StudyConfig, out_dir: Path) -> dict:
    rng = np.random.default_rng(_task_seed(cfg.seed, 5))
    lift = apps.random_fourier_lift(cfg.lift_bandwidth, cfg.lift_features, 2, _task_seed(cfg.seed, 6))
    n_test = 2000
    test_raw = rng.uniform(-2.0, 2.0, size=(n_test, 2))
    test_truth = _demo_cme_truth(test_raw)
    strategy = cfg.make_strategy()
    rows = []
    prev = math.inf
    decreasing = True
    for n in cfg.n_grid:
        train_raw = rng.uniform(-2.0, 2.0, size=(n, 2))
        train_y = _demo_cme_truth(train_raw) + cfg.noise_scale * rng.standard_normal((n, 2))
        # feature covariances are well conditioned; a small multiple of the
        # schedule regularises enough without washing out the fit
        fitted = apps.cme_fit(train_raw, train_y, lift, strategy, 0.01 * alpha_schedule(n, cfg.nu))
        train_pred = lift.apply(train_raw) @ fitted.theta_hat.T
        test_pred = lift.apply(test_raw) @ fitted.theta_hat.T
        train_mse = float(np.mean(np.sum((train_pred - train_y) ** 2, axis=1)))
        test_mse = float(np.mean(np.sum((test_pred - test_truth) ** 2, axis=1)))
        decreasing = decreasing and test_mse < prev
        prev = test_mse
        rows.append((n, train_mse, test_mse))
    comments = [f"config_hash={cfg.study_hash()} seed={cfg.seed}"]
    _write_csv(out_dir / "demo_cme_metrics.csv", ["n", "train_mse", "test_mse"], rows, comments)
    if cfg.plots:
        series = {"test_mse": [(math.log(n), math.log(t)) for n, _, t in rows]}
        _write_svg_lines(out_dir / "demo_cme.svg", series, "log test MSE vs log n")
    return {"rows": rows, "test_mse_decreasing": decreasing}
