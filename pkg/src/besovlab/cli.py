"""Command-line entry point.

Subcommands: psi-check, seq-build, seq-verify, field-eval, norm-est,
lemma-le, pathology-run, report.  Exit code 0 on a completed run, 2 on
configuration validation failure.  CSV columns are stable across versions:
lemma_le.csv has (m, n, partial_sum); sequence.csv and pathology.csv have
(kind, tier, J, probe, value).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments, fieldnorms, norms, sequences
from .atoms import AtomicField, Box, BoxDomain, eval_f
from .experiments import ConfigError, ExperimentConfig, config_from_dict
from .params import load_config, validate
from .reporting import read_csv, write_json, write_svg_lines
from .slowly_varying import slow_variation_deviation, summability_partial


def _load_experiment_config(path: str | None) -> ExperimentConfig:
    if path is None:
        raise ConfigError("--config is required for this subcommand")
    return config_from_dict(load_config(path))


def _out_dir(args) -> Path:
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_psi_check(args) -> int:
    config = _load_experiment_config(args.config)
    kappa = config.params.kappa
    result = {
        "classification": experiments.classify_condition(config.psi, kappa),
        "kappa": kappa,
        "slow_variation_deviation_r0.5_j40": slow_variation_deviation(config.psi, 0.5, 40),
    }
    if math.isfinite(kappa):
        result["summability_partials"] = {
            str(J): summability_partial(config.psi, kappa, J) for J in (8, 64, 512)
        }
    json.dump(result, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def cmd_seq_build(args) -> int:
    config = _load_experiment_config(args.config)
    blocks = sequences.build_lambda_blocks(config.psi, config.params, args.J)
    if not args.no_rearrange:
        blocks = sequences.rearrange(blocks)
    text = sequences.blocks_to_json(blocks)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if args.csv:
        _write_sequence_csv(config, blocks, args.csv)
    return 0


def _write_sequence_csv(config: ExperimentConfig, blocks, path: str) -> None:
    kappa = config.params.kappa
    S = sequences.build_S(config.psi, kappa, blocks.J)
    rows = []
    running = []
    for j in range(blocks.J + 1):
        lvl = blocks.levels[j]
        running.append(j)
        rows.append(
            {
                "j": j,
                "S_j": float(S[j - 1]) if j >= 1 else 0.0,
                "Gamma_j1": sequences.gamma(config.psi, kappa, j, 1.0) if j >= 1 else 0.0,
                "n_j": lvl.n,
                "theta_j": lvl.theta,
                "start_j": lvl.start,
                "block_average": sequences.block_average(blocks, j),
                "mixed_norm_partial": sequences.mixed_norm(
                    blocks, config.params.p, config.params.q, j
                ),
            }
        )
    from .reporting import write_csv

    write_csv(
        path,
        ["j", "S_j", "Gamma_j1", "n_j", "theta_j", "start_j", "block_average", "mixed_norm_partial"],
        rows,
    )


def cmd_seq_verify(args) -> int:
    blocks = sequences.blocks_from_json(Path(args.infile).read_text())
    problems = sequences.verify_blocks(blocks)
    for problem in problems:
        print(f"violation: {problem}", file=sys.stderr)
    print(f"{'FAIL' if problems else 'ok'}: J={blocks.J}, rearranged={blocks.rearranged}")
    return 1 if problems else 0


def cmd_field_eval(args) -> int:
    config = _load_experiment_config(args.config)
    blocks = sequences.rearrange(sequences.build_lambda_blocks(config.psi, config.params, args.J))
    field = AtomicField(config.params, blocks, args.J)
    pts = []
    with open(args.points, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header[:2]] != ["x1", "x2"]:
            pts.append([float(header[0]), float(header[1])])
        for row in reader:
            pts.append([float(row[0]), float(row[1])])
    values = eval_f(field, np.asarray(pts)) if pts else np.zeros(0)
    out = sys.stdout if args.out is None else open(args.out, "w", newline="")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["x1", "x2", "f"])
        for (x1, x2), v in zip(pts, np.atleast_1d(values)):
            writer.writerow([repr(x1), repr(x2), repr(float(v))])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_norm_est(args) -> int:
    import time

    config = _load_experiment_config(args.config)
    params = config.params
    start = time.perf_counter()
    if args.target == "indicator":
        f = lambda x: ((np.asarray(x) >= 0) & (np.asarray(x) < 1)).astype(float)
        domain = BoxDomain((Box((0.0,), (1.0,)),), 2.0**-12)
        est = norms.besov_norm(f, config.psi, params.s, params.p, params.q, params.M, domain, args.J)
    else:
        blocks = sequences.rearrange(
            sequences.build_lambda_blocks(config.psi, config.params, args.J)
        )
        field = AtomicField(params, blocks, args.J)
        if args.target == "field":
            est = fieldnorms.field_besov_norm(
                field, config.psi, params.s, params.p, params.q, params.M,
                j_max=args.J, res_scale=config.res_scale,
            )
        elif args.target == "partial-map":
            if args.y is None:
                raise ConfigError("--y is required for target partial-map")
            est = fieldnorms.pm_seminorm(
                field, args.y, config.psi, params.s, params.p, params.M,
                j_max=args.J, res_scale=config.res_scale,
            )
        else:
            raise ConfigError(f"unknown target {args.target!r}")
    wall_ms = (time.perf_counter() - start) * 1e3
    result = {
        "value": est.value,
        "resolution": est.resolution,
        "t_levels": est.t_levels,
        "h_samples": est.h_samples,
        "wall_time_ms": wall_ms,
    }
    if args.out:
        write_json(args.out, result)
    else:
        json.dump(result, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def cmd_lemma_le(args) -> int:
    config = _load_experiment_config(args.config)
    report = experiments.run_lemma_le(config)
    files = experiments.emit_report(report, _out_dir(args), config.emit_svg)
    for path in files:
        print(path)
    return 0


def cmd_pathology_run(args) -> int:
    config = _load_experiment_config(args.config)
    out = _out_dir(args)
    files = []
    lemma = experiments.run_lemma_le(config)
    files += experiments.emit_report(lemma, out, config.emit_svg)
    seq_report = experiments.run_sequence_experiment(config)
    files += experiments.emit_report(seq_report, out, config.emit_svg)
    pathology = experiments.run_pathology(config)
    files += experiments.emit_report(pathology, out, config.emit_svg)
    verdicts = {
        "lemma_le": lemma.verdicts,
        "sequence": seq_report.verdicts,
        "pathology": pathology.verdicts,
    }
    write_json(out / "verdicts.json", verdicts)
    files.append(out / "verdicts.json")
    for path in files:
        print(path)
    return 0


def cmd_report(args) -> int:
    config = _load_experiment_config(args.config)
    out = _out_dir(args)
    verdicts = {}
    for name in ("lemma_le", "sequence", "pathology"):
        csv_path = out / f"{name}.csv"
        if csv_path.exists():
            rows = read_csv(csv_path)
            verdicts[name] = experiments.verdicts_from_csv_rows(name, rows, config)
    write_json(out / "verdicts.json", verdicts)
    print(out / "verdicts.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="besovlab",
        description="Numerical laboratory for restriction pathologies of Besov functions",
    )
    parser.add_argument("--config", help="path to JSON experiment configuration")
    parser.add_argument("--out", help="output directory (default: ./out)")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for interface stability; computation is deterministic")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized property tests only")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("psi-check", help="classify the summability condition for psi")

    p = sub.add_parser("seq-build", help="build and emit the rearranged block sequence")
    p.add_argument("--J", type=int, required=True)
    p.add_argument("--no-rearrange", action="store_true")
    p.add_argument("--csv", help="also write the per-level CSV table here")

    p = sub.add_parser("seq-verify", help="re-read a block sequence and re-check invariants")
    p.add_argument("infile")

    p = sub.add_parser("field-eval", help="evaluate the counterexample field on points")
    p.add_argument("--J", type=int, required=True)
    p.add_argument("--points", required=True, help="CSV with columns x1,x2")

    p = sub.add_parser("norm-est", help="grid norm estimate for a selected function")
    p.add_argument("--target", choices=["indicator", "field", "partial-map"], required=True)
    p.add_argument("--J", type=int, default=8, help="field depth / t-levels")
    p.add_argument("--y", type=float, help="freeze coordinate for partial-map")

    sub.add_parser("lemma-le", help="partial-sum convergence suite")
    sub.add_parser("pathology-run", help="full desk-scale pathology experiment")
    sub.add_parser("report", help="recompute verdicts.json from CSVs in --out")

    return parser


_COMMANDS = {
    "psi-check": cmd_psi_check,
    "seq-build": cmd_seq_build,
    "seq-verify": cmd_seq_verify,
    "field-eval": cmd_field_eval,
    "norm-est": cmd_norm_est,
    "lemma-le": cmd_lemma_le,
    "pathology-run": cmd_pathology_run,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
