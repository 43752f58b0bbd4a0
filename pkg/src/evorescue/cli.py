"""Command-line front end.

Exit codes: 0 success, 1 solver fault or failed verification, 2 configuration
or output error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__, io
from .core import (
    ConfigError,
    DomainError,
    ScalarProblem,
    apply_overrides,
    config_from_dict,
    config_hash,
    load_scenario_dict,
    sample_initial,
)
from .solver import SolverFault, StepError, run, set_backend

OUT_ENV = "EVORESCUE_OUT"
DEFAULT_OUT = "evorescue-out"

log = logging.getLogger("evorescue")


def _floats(text: str) -> list[float]:
    try:
        return [math.inf if v.strip() in ("inf", "Inf") else float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _threads(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evorescue", description="Reaction-diffusion rescue toolkit.")
    p.add_argument("--version", action="version", version=f"evorescue {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--backend", choices=("compiled", "python"), help="kernel backend (default: compiled if built)")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_args(sp, required=True):
        sp.add_argument("--scenario", type=Path, required=required, help="TOML scenario file")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")

    def out_arg(sp):
        sp.add_argument("--out", type=Path, help=f"output root (default ${OUT_ENV} or ./{DEFAULT_OUT})")

    sp = sub.add_parser("simulate", help="run one scenario and write CSVs")
    scenario_args(sp)
    out_arg(sp)

    sp = sub.add_parser("sweep", help="run a scenario across one parameter axis")
    scenario_args(sp)
    out_arg(sp)
    sp.add_argument("--axis", required=True, choices=[a.value for a in _axes()])
    sp.add_argument("--values", required=True, type=_floats)
    sp.add_argument("--threads", type=_threads, default=1)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--suite", choices=("primary",), default="primary")
    sp.add_argument("--only", type=_ints, help="comma-separated criterion numbers")
    sp.add_argument("--threads", type=_threads, default=1)
    out_arg(sp)

    sp = sub.add_parser("claim1", help="scaled energy of the truncated heat profile along a time ladder")
    scenario_args(sp)
    out_arg(sp)
    sp.add_argument("--ladder", type=_floats, help="explicit times (default 10^2 ... 10^5, half-decade steps)")

    sp = sub.add_parser("kernel-check", help="heat-kernel norms: closed form vs quadrature")
    sp.add_argument("--times", type=_floats, default=[0.1, 1.0, 100.0])
    sp.add_argument("--p", dest="ps", type=_floats, default=[1.0, 2.0, math.inf])

    sp = sub.add_parser("report", help="summarize a run directory written by simulate")
    sp.add_argument("run_dir", type=Path)
    return p


def _axes():
    from .experiments import Axis

    return list(Axis)


def _out_root(args) -> Path:
    return args.out or Path(os.environ.get(OUT_ENV, DEFAULT_OUT))


def _load(args):
    raw = apply_overrides(load_scenario_dict(args.scenario), args.overrides)
    return raw, config_from_dict(raw)


def cmd_simulate(args) -> int:
    raw, cfg = _load(args)
    out = run(cfg)
    target = _out_root(args) / f"simulate-{config_hash(raw)}"
    io.write_run(out, target, cfg.outputs)
    print(f"classification: {out.classification.value}")
    print(f"t_end: {out.t_end:g}  final max u: {out.series.max_u[-1]:.6g}")
    if out.speed_estimate is not None:
        print(f"front speed: {out.speed_estimate:.6g}")
    print(f"written: {target}")
    return 0


def cmd_sweep(args) -> int:
    from .experiments import SweepSpec, run_sweep, write_sweep

    raw, cfg = _load(args)
    spec = SweepSpec(cfg, args.axis, tuple(args.values))
    result = run_sweep(spec, threads=args.threads)
    target = _out_root(args) / f"sweep-{args.axis}-{io.fingerprint((config_hash(raw), spec.values))}"
    write_sweep(result, target)
    for row in result.rows:
        print(f"{args.axis}={row.value:<10g} {row.classification.value:<11} max_u={row.final_max_u:.4g}")
    print(f"written: {target}")
    return 0


def cmd_verify(args) -> int:
    from .acceptance import format_table, run_acceptance

    results = run_acceptance(args.only, threads=args.threads)
    print(format_table(results))
    if args.out:
        io.write_json(
            Path(args.out) / "acceptance.json",
            [{"number": r.number, "title": r.title, "passed": r.passed, "detail": r.detail} for r in results],
        )
    return 0 if all(r.passed for r in results) else 1


def cmd_claim1(args) -> int:
    from .analysis.claim1 import DEFAULT_LADDER, claim1_scan

    raw, cfg = _load(args)
    if not isinstance(cfg.problem, ScalarProblem):
        raise ConfigError("claim1 needs a scalar problem with a decaying schedule", "run.problem")
    u0 = sample_initial(cfg.initial_u, cfg.grid)
    ladder = args.ladder or DEFAULT_LADDER
    rep = claim1_scan(u0, cfg.problem.schedule, ladder)
    print(f"{'t':>14} {'t*E':>14} {'E^d t^1.5':>14} {'t*cubic':>14}")
    for row in zip(rep.times, rep.scaled_energies, rep.dirichlet_scaled, rep.cubic_scaled):
        print(" ".join(f"{v:14.6g}" for v in row))
    print(f"cubic-term limit: {rep.cubic_limit:.6g}")
    if rep.skipped:
        print("skipped (sqrt t below four support radii): " + ", ".join(f"{t:g}" for t in rep.skipped))
    neg = rep.first_negative_t
    print("first negative t: " + ("none on this ladder" if neg is None else f"{neg:g}"))
    target = _out_root(args) / f"claim1-{io.fingerprint((config_hash(raw), tuple(ladder)))}"
    io.write_json(target / "claim1.json", rep.as_dict())
    print(f"written: {target}")
    return 0


def cmd_kernel_check(args) -> int:
    from .analysis.heat import kernel_norm, kernel_norm_quadrature

    print(f"{'p':>6} {'t':>8} {'closed form':>22} {'quadrature':>22} {'rel err':>10}")
    worst = 0.0
    for p in args.ps:
        for t in args.times:
            a, b = kernel_norm(t, p), kernel_norm_quadrature(t, p)
            rel = abs(a - b) / b
            worst = max(worst, rel)
            print(f"{p:>6g} {t:>8g} {a:>22.16g} {b:>22.16g} {rel:>10.2e}")
    print(f"max relative error: {worst:.2e}")
    return 0 if worst <= 1e-8 else 1


def cmd_report(args) -> int:
    import json

    from .analysis.outcome import DIAGNOSTIC_COLUMNS

    run_dir = args.run_dir
    header, rows = io.read_csv(run_dir / "diagnostics.csv")
    summary = json.loads((run_dir / "summary.json").read_text())
    print(f"run: {run_dir}")
    for key in sorted(summary):
        print(f"  {key}: {summary[key]}")
    if rows:
        last = dict(zip(header, rows[-1]))
        print("  final diagnostics:")
        for name in DIAGNOSTIC_COLUMNS:
            if name in last:
                print(f"    {name}: {last[name] or '-'}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "claim1": cmd_claim1,
    "kernel-check": cmd_kernel_check,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.backend:
            set_backend(args.backend)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (SolverFault, StepError) as exc:
        print(f"solver fault: {exc}", file=sys.stderr)
        return 1
    except (DomainError, ValueError, ImportError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
