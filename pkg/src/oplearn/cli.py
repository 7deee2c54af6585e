"""Command-line benchmark harness.

Subcommands: ``rate`` (convergence-rate study), ``conc`` (concentration
coverage study), ``props`` (invariant suite), ``demo-arh`` and ``demo-cme``.
Exit codes: 0 on success, 1 when a property or acceptance check fails,
2 on input/configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .properties import run_property_suite
from .studies import (
    StudyConfig,
    StudyInputError,
    load_config,
    run_concentration_study,
    run_demo,
    run_rate_study,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oplearn-bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("rate", "convergence-rate study along the rate-optimal schedule"),
        ("conc", "empirical covariance concentration coverage study"),
        ("props", "run the cross-module invariant suite"),
        ("demo-arh", "autoregressive forecasting demo"),
        ("demo-cme", "feature-lifted conditional-mean regression demo"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", type=Path, default=None, help="TOML (or JSON) study config")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker threads")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
    return parser


def _resolve_config(args) -> StudyConfig:
    overrides = {"threads": args.threads, "seed": args.seed}
    if args.out is not None:
        overrides["out_dir"] = str(args.out)
    if args.config is not None:
        return load_config(args.config, overrides)
    return StudyConfig(**{k: v for k, v in overrides.items() if v is not None})


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        out_dir = Path(cfg.out_dir)

        if args.command == "rate":
            report = run_rate_study(cfg, out_dir)
            for s in (0.0, 0.5):
                print(
                    f"rate s={s}: fitted slope {report.slopes[s]:+.4f} "
                    f"(theory {report.theoretical_slopes[s]:+.4f}, rms resid {report.slope_residuals[s]:.3f})"
                )
            if report.degenerate:
                print("rate: errors at numerical floor; slope fit flagged degenerate")
            print(f"rate: wrote {out_dir / 'rate.csv'}")
            return EXIT_OK

        if args.command == "conc":
            report = run_concentration_study(cfg, out_dir)
            print(
                f"conc: coverage {report.coverage:.4f} over {report.trials} trials "
                f"(bound {report.bound:.4f}, psi2_x {report.psi2_x:.4f})"
            )
            print(f"conc: wrote {out_dir / 'conc.csv'}")
            return EXIT_OK

        if args.command == "props":
            results = run_property_suite(seed=cfg.seed)
            rows = []
            failed = 0
            for res in results:
                print(f"{res.status.upper():5s} {res.name} (seed={res.seed}) {res.detail}")
                rows.append((res.name, res.status, res.seed, res.detail))
                failed += res.status == "fail"
            out_dir.mkdir(parents=True, exist_ok=True)
            lines = [f"# config_hash={cfg.study_hash()} seed={cfg.seed}", "name,status,seed,detail"]
            lines += [f"{n},{s},{sd},{d.replace(',', ';')}" for n, s, sd, d in rows]
            (out_dir / "properties.csv").write_text("\n".join(lines) + "\n")
            print(f"props: {len(results) - failed}/{len(results)} passed")
            return EXIT_CHECK_FAILED if failed else EXIT_OK

        if args.command in ("demo-arh", "demo-cme"):
            summary = run_demo(args.command.removeprefix("demo-"), cfg, out_dir)
            print(f"{args.command}: {summary}")
            return EXIT_OK

        raise AssertionError(f"unhandled command {args.command}")
    except StudyInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
