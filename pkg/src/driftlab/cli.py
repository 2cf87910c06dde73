"""Command line: ``driftlab run|sweep <config>``, ``driftlab verify``.

Exit codes: 0 success, 1 run or configuration error, 2 acceptance failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import verify
from .config import ConfigError, load_config, parse_config, parse_sweep
from .diagnostics import FitError, OutOfRegimeWarning, theoretical_density_rate
from .integrator import IntegrationAbort
from .io import emit_snapshot, emit_table, emit_timeseries
from .model import ParameterError
from .simulation import simulate
from .sweep import run_sweep

log = logging.getLogger("driftlab")

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _overrides(args, cfg):
    if args.output_dir:
        cfg = replace(cfg, output_dir=args.output_dir)
    return cfg


def cmd_run(args) -> int:
    cfg = parse_config(load_config(args.config), force_out_of_regime=args.force_out_of_regime or None)
    cfg = _overrides(args, cfg)
    out = Path(cfg.output_dir)
    traj = simulate(cfg)
    emit_timeseries(traj.records, out / "timeseries.csv")
    emit_snapshot(traj.initial, traj.stationary, traj.grid, out / "snapshot_initial.csv")
    emit_snapshot(traj.final, traj.stationary, traj.grid, out / "snapshot_final.csv")
    print(f"t_end={traj.final.t:g} steps={traj.result.n_steps} halvings={traj.result.n_halvings}")
    try:
        fu = traj.fit(traj.series("sup_u"))
        fd = traj.fit(traj.series("sup_theta_dist"))
    except FitError as e:
        print(f"decay fit skipped: {e}")
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OutOfRegimeWarning)
            rate = theoretical_density_rate(cfg.params)
        print(f"sup_u exponent {fu.exponent:.4f} (r2 {fu.r2:.4f}); guaranteed <= -0.5")
        print(f"sup_theta_dist exponent {fd.exponent:.4f} (r2 {fd.r2:.4f}); guaranteed <= {-rate:.4f}")
    print(f"wrote {out}/timeseries.csv, snapshot_initial.csv, snapshot_final.csv")
    return EXIT_OK


def cmd_sweep(args) -> int:
    sweep, base = parse_sweep(load_config(args.config), force_out_of_regime=args.force_out_of_regime or None)
    base = _overrides(args, base)
    if args.max_parallel:
        sweep = replace(sweep, max_parallel=args.max_parallel)
    rows = run_sweep(sweep, base)
    path = emit_table(rows, Path(base.output_dir) / "sweep_summary.csv")
    for r in rows:
        print(" ".join(f"{k}={r[k]}" for k in ("gamma", "theta", "alpha", "f", "u_exponent",
                                                "density_exponent", "theoretical_density_rate",
                                                "u_pass", "density_pass")) + (f" error={r['error']}" if r["error"] else ""))
    print(f"wrote {path}")
    return EXIT_OK if all(not r["error"] for r in rows) else EXIT_ERROR


def cmd_verify(args) -> int:
    skip = ("oracle_cross_validation",) if args.quick else ()
    results = verify.run_all(skip=skip)
    failed = [c for c in results if not c.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="driftlab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("sweep", cmd_sweep)):
        sp = sub.add_parser(name)
        sp.add_argument("config")
        sp.add_argument("--force-out-of-regime", action="store_true")
        sp.add_argument("--output-dir")
        if name == "sweep":
            sp.add_argument("--max-parallel", type=int)
        sp.set_defaults(func=fn)
    vp = sub.add_parser("verify", help="run the oracle and acceptance checks")
    vp.add_argument("--quick", action="store_true", help="skip the explicit-reference cross-validation")
    vp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParameterError, IntegrationAbort, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
