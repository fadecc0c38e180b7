"""Command-line front end: generate / train / evaluate / reproduce.

Runs are driven by flags, optionally backed by an INI config file (one
section per command plus [common]); flags override file values. A master
seed is mandatory everywhere, so every artifact is reproducible, and each
run embeds a digest of its effective options.

Exit codes: 0 success, 1 reproduction-check failure, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .dataset import (DatasetFormatError, default_test_grid, default_train_grid,
                      generate_dataset, load_csv, save_csv)
from .dtree import (evaluate, fit, grid_search_cv, load_model, save_model)
from .experiments import (ModelRequiredError, check_fig4, check_fig5, check_fig6,
                          check_fig7, check_fig8, check_table3,
                          export_energy_histograms, save_histograms_svg,
                          save_sweep_svg, sweep_antennas, sweep_pe, sweep_snr,
                          sweep_users)

FIGURES = ("fig4", "fig5", "fig6", "fig7", "fig8", "table3")

# Option value types, used both for argparse and for config-file coercion.
_OPTION_TYPES = {
    "seed": int, "antennas": int, "trials": int, "threads": int, "depth": int,
    "folds": int, "bins": int, "grid": str, "out": str, "data": str,
    "model": str, "mode": str, "figure": str, "k": str, "pe": str,
    "snr_db": str, "check": bool,
}


class EmptySelectionError(ValueError):
    """Evaluation filters selected no rows."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcadetect",
        description="Pilot-contamination attack detection: dataset generation, "
                    "tree training, evaluation and figure reproduction.",
    )
    parser.add_argument("--version", action="version", version=f"pcadetect {__version__}")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="INI config file; flags override its values")
        p.add_argument("--seed", type=int, help="master seed (required; no wall-clock default)")
        p.add_argument("--threads", type=int, help="worker thread cap (default 1)")

    p = sub.add_parser("generate", help="generate a labeled dataset CSV")
    common(p)
    p.add_argument("--antennas", type=int, help="number of base-station antennas M")
    p.add_argument("--grid", choices=("train", "test"), help="which default grid to run")
    p.add_argument("--out", help="output CSV path (meta sidecar written next to it)")
    p.add_argument("--trials", type=int, help="override trials per grid cell")
    p.add_argument("--mode", choices=("fast", "full"), help="generation path (default fast)")

    p = sub.add_parser("train", help="cross-validate depths and train a tree model")
    common(p)
    p.add_argument("--data", help="training CSV (from `generate`)")
    p.add_argument("--out", help="output model JSON path (default model.json)")
    p.add_argument("--depth", type=int, help="fixed depth; skips the grid search")
    p.add_argument("--folds", type=int, help="cross-validation folds (default 10)")

    p = sub.add_parser("evaluate", help="score a model on a labeled CSV")
    common(p)
    p.add_argument("--model", help="model JSON path")
    p.add_argument("--data", help="evaluation CSV")
    p.add_argument("--out", help="per-condition breakdown CSV path")
    p.add_argument("--k", help="comma-separated K filter")
    p.add_argument("--pe", help="comma-separated Pe filter")
    p.add_argument("--snr-db", dest="snr_db", help="comma-separated SNR filter (dB)")

    p = sub.add_parser("reproduce", help="re-run a published experiment")
    common(p)
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--out", help="output directory (default ./out)")
    p.add_argument("--model", help="trained model JSON (figs 4, 5, 6, 8)")
    p.add_argument("--antennas", type=int, help="antenna count for table3 (default 256)")
    p.add_argument("--trials", type=int, help="override trials per point")
    p.add_argument("--folds", type=int, help="folds for table3 (default 10)")
    p.add_argument("--bins", type=int, help="histogram bins for fig8 (default 40)")
    p.add_argument("--check", action="store_true", default=None,
                   help="verify the reproduction bands; exit 1 on violation")
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the config file ([<command>] then [common])."""
    if not getattr(args, "config", None):
        return args
    path = Path(args.config)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    ini = configparser.ConfigParser()
    ini.read(path)
    for dest, value in vars(args).items():
        if value is not None or dest in ("command", "config", "figure"):
            continue
        for section in (args.command, "common"):
            if ini.has_option(section, dest):
                raw = ini.get(section, dest)
                kind = _OPTION_TYPES.get(dest, str)
                setattr(args, dest, ini.getboolean(section, dest) if kind is bool else kind(raw))
                break
    return args


def _require(args, name: str):
    value = getattr(args, name, None)
    if value is None:
        raise ValueError(f"--{name.replace('_', '-')} is required for `{args.command}` "
                         "(set it on the command line or in the config file)")
    return value


def _config_digest(args: argparse.Namespace) -> str:
    relevant = {k: v for k, v in vars(args).items() if k != "config" and v is not None}
    return hashlib.sha256(json.dumps(relevant, sort_keys=True, default=str).encode()).hexdigest()[:12]


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def cmd_generate(args) -> int:
    seed = _require(args, "seed")
    antennas = _require(args, "antennas")
    which = _require(args, "grid")
    grid = (default_train_grid if which == "train" else default_test_grid)(antennas, seed)
    if args.trials:
        grid = replace(grid, trials_per_cell=args.trials)
    mode = args.mode or "fast"
    out = Path(args.out or f"{which}_m{antennas}.csv")
    dataset = generate_dataset(grid, mode, threads=args.threads or 1)
    save_csv(dataset, out, extra_meta={"config_digest": _config_digest(args)})
    zeros, ones = dataset.class_counts()
    print(f"wrote {len(dataset)} rows to {out} (no-attack {zeros} / attack {ones})")
    print(f"file digest {_file_digest(out)}  config digest {_config_digest(args)}")
    return 0


def _print_cv_table(results) -> None:
    print(f"{'depth':>5}  {'accuracy':>19}  {'precision':>19}  {'recall':>19}  {'f1':>19}")
    for row in results:
        cells = [f"{getattr(row, m + '_mean'):.4f} +/- {getattr(row, m + '_std'):.4f}"
                 for m in ("accuracy", "precision", "recall", "f1")]
        print(f"{row.depth:>5}  " + "  ".join(f"{c:>19}" for c in cells))


def cmd_train(args) -> int:
    seed = _require(args, "seed")
    data = _require(args, "data")
    out = Path(args.out or "model.json")
    dataset = load_csv(data)
    zeros, ones = dataset.class_counts()
    if zeros == 0 or ones == 0:
        raise ValueError(f"training data must contain both classes "
                         f"(got {zeros} no-attack / {ones} attack rows)")
    if zeros != ones:
        print(f"warning: classes are unbalanced ({zeros} vs {ones})", file=sys.stderr)

    if args.depth is not None:
        depth = args.depth
        print(f"skipping grid search; using depth {depth}")
        results = None
    else:
        folds = args.folds or 10
        results = grid_search_cv(dataset, range(1, 6), folds, seed)
        _print_cv_table(results)
        best = max(results, key=lambda r: (r.f1_mean, -r.depth))
        depth = best.depth
        print(f"selected depth {depth} (highest mean F1, smallest depth on ties)")
        report = out.with_name(out.stem + "_cv_report.csv")
        with open(report, "w") as fh:
            fh.write("depth,accuracy_mean,accuracy_std,precision_mean,precision_std,"
                     "recall_mean,recall_std,f1_mean,f1_std\n")
            for r in results:
                fh.write(f"{r.depth},{r.accuracy_mean:.9g},{r.accuracy_std:.9g},"
                         f"{r.precision_mean:.9g},{r.precision_std:.9g},"
                         f"{r.recall_mean:.9g},{r.recall_std:.9g},"
                         f"{r.f1_mean:.9g},{r.f1_std:.9g}\n")
        print(f"wrote CV report to {report}")

    model = fit(dataset, depth)
    save_model(model, out, extra={"config_digest": _config_digest(args)})
    rule = model.root_energy_threshold
    detail = f"root energy threshold {rule:.6g}" if rule is not None else "no root energy rule"
    print(f"wrote model to {out} ({detail})")
    return 0


def _parse_filter(raw: str | None):
    if raw is None:
        return None
    try:
        return [float(v) for v in raw.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"bad filter value: {exc}") from exc


def cmd_evaluate(args) -> int:
    _require(args, "seed")  # kept mandatory for uniformity of run records
    model = load_model(_require(args, "model"))
    dataset = load_csv(_require(args, "data"))

    import numpy as np
    mask = np.ones(len(dataset), dtype=bool)
    for column, raw in (("k", args.k), ("pe", args.pe), ("snr_db", args.snr_db)):
        wanted = _parse_filter(raw)
        if wanted is not None:
            mask &= np.isin(getattr(dataset, column), wanted)
    if not mask.any():
        raise EmptySelectionError("the requested filters select no rows")
    selected = dataset.select(mask)

    metrics = evaluate(model, selected)
    print(f"rows {len(selected)}  tp {metrics.tp}  fp {metrics.fp}  "
          f"tn {metrics.tn}  fn {metrics.fn}")
    print(f"accuracy {metrics.accuracy:.4f}  precision {metrics.precision:.4f}  "
          f"recall {metrics.recall:.4f}  f1 {metrics.f1:.4f}")
    if metrics.degenerate:
        print("note: at least one metric had a 0/0 denominator and reads as 0")

    if args.out:
        conditions = sorted({(int(k), float(s), float(p))
                             for k, s, p in zip(selected.k, selected.snr_db, selected.pe)})
        with open(args.out, "w") as fh:
            fh.write("k,snr_db,pe,rows,tp,fp,tn,fn,flagged_fraction\n")
            for k, snr, pe in conditions:
                sub = selected.select((selected.k == k) & (selected.snr_db == snr)
                                      & (selected.pe == pe))
                m = evaluate(model, sub)
                flagged = (m.tp + m.fp) / len(sub)
                fh.write(f"{k},{snr:.9g},{pe:.9g},{len(sub)},{m.tp},{m.fp},{m.tn},"
                         f"{m.fn},{flagged:.9g}\n")
        print(f"wrote per-condition breakdown to {args.out} "
              f"(config digest {_config_digest(args)})")
    return 0


def cmd_reproduce(args) -> int:
    seed = _require(args, "seed")
    figure = args.figure
    out_dir = Path(args.out or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = args.threads or 1
    trials = args.trials or 100

    model = None
    if figure in ("fig4", "fig5", "fig6", "fig8"):
        if not args.model:
            raise ModelRequiredError(
                f"{figure} needs a trained model: pass --model (train one with `pcadetect train`)")
        model = load_model(args.model)

    violations: list[str] = []
    manifest = {"figure": figure, "seed": seed, "trials": trials,
                "config_digest": _config_digest(args), "version": __version__}

    if figure == "fig4":
        result = sweep_snr(model, seed, trials=trials, threads=threads)
        result.to_csv(out_dir / "fig4_pd_vs_snr.csv")
        save_sweep_svg(result, out_dir / "fig4_pd_vs_snr.svg",
                       title="Detection probability vs SNR (M=256, K=64)")
        violations = check_fig4(result)
        written = ["fig4_pd_vs_snr.csv", "fig4_pd_vs_snr.svg"]
    elif figure == "fig5":
        result = sweep_users(model, seed, trials=trials, threads=threads)
        result.to_csv(out_dir / "fig5_pd_vs_users.csv")
        save_sweep_svg(result, out_dir / "fig5_pd_vs_users.svg",
                       title="Detection probability vs user count (M=256, SNR=10 dB)")
        violations = check_fig5(result)
        written = ["fig5_pd_vs_users.csv", "fig5_pd_vs_users.svg"]
    elif figure == "fig6":
        result = sweep_pe(model, seed, trials=trials, threads=threads)
        result.to_csv(out_dir / "fig6_pd_vs_pe.csv")
        save_sweep_svg(result, out_dir / "fig6_pd_vs_pe.svg",
                       title="Detection probability vs eavesdropper power (M=256, K=64)")
        violations = check_fig6(result)
        written = ["fig6_pd_vs_pe.csv", "fig6_pd_vs_pe.svg"]
    elif figure == "fig7":
        result, models = sweep_antennas(seed, trials=trials, threads=threads)
        result.to_csv(out_dir / "fig7_pd_vs_antennas.csv")
        save_sweep_svg(result, out_dir / "fig7_pd_vs_antennas.svg",
                       title="Detection probability vs antenna count (K=64, SNR=10 dB)")
        manifest["per_m_energy_thresholds"] = {
            str(m): models[m].root_energy_threshold for m in sorted(models)}
        violations = check_fig7(result)
        written = ["fig7_pd_vs_antennas.csv", "fig7_pd_vs_antennas.svg"]
    elif figure == "fig8":
        export = export_energy_histograms(model, seed, trials=trials,
                                          bins=args.bins or 40)
        export.to_csv(out_dir / "fig8_energy_histograms.csv")
        save_histograms_svg(export, out_dir / "fig8_energy_histograms.svg",
                            title="Energy distributions and both thresholds (M=256)")
        violations = check_fig8(export)
        written = ["fig8_energy_histograms.csv", "fig8_energy_histograms.svg"]
    else:  # table3
        antennas = args.antennas or 256
        grid = default_train_grid(antennas, seed)
        dataset = generate_dataset(grid, "fast", threads=threads)
        results = grid_search_cv(dataset, range(1, 6), args.folds or 10, seed)
        _print_cv_table(results)
        path = out_dir / "table3_cv_metrics.csv"
        with open(path, "w") as fh:
            fh.write("depth,accuracy_mean,accuracy_std,precision_mean,precision_std,"
                     "recall_mean,recall_std,f1_mean,f1_std\n")
            for r in results:
                fh.write(f"{r.depth},{r.accuracy_mean:.9g},{r.accuracy_std:.9g},"
                         f"{r.precision_mean:.9g},{r.precision_std:.9g},"
                         f"{r.recall_mean:.9g},{r.recall_std:.9g},"
                         f"{r.f1_mean:.9g},{r.f1_std:.9g}\n")
        violations = check_table3(results)
        written = ["table3_cv_metrics.csv"]

    with open(out_dir / f"{figure}_run.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {', '.join(written)} and {figure}_run.json to {out_dir}/")

    if args.check:
        if violations:
            print(f"{figure} check FAILED ({len(violations)} violated bands):")
            for v in violations:
                print(f"  - {v}")
            return 1
        print(f"{figure} check passed")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "reproduce": cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        args = _merge_config(args)
        return COMMANDS[args.command](args)
    except (ValueError, OSError, DatasetFormatError, ModelRequiredError,
            EmptySelectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
