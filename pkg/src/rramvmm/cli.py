"""Command-line entry point: ``python -m rramvmm <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 experiment failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import DataError, ExperimentError, ParameterError, RRAMError, SchemaError
from .harness import SWEEP_KNOBS, ExperimentConfig, load_wdbc, run_experiment, split, sweep, write_table
from .io import load_artifacts, load_config, save_artifacts
from .mapper import hardware_forward_dataset, plan_mapping, program_plan
from .rng import substream
from .trainer import train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "mode", None) is not None:
        changes["read_mode"] = args.mode
    if getattr(args, "data", None) is not None:
        changes["data_path"] = args.data
    return cfg.replace(**changes) if changes else cfg


def cmd_train(args):
    cfg = _config(args)
    ds = load_wdbc(cfg.data_path)
    tr, te = split(ds, cfg.split_fraction, cfg.seed)
    model = train(tr.features, tr.labels, cfg.epochs, cfg.batch_size, cfg.seed,
                  n_classes=2, lr=cfg.lr, init_scale=cfg.init_scale, bias=cfg.bias)
    model.metrics["train_acc"] = float(np.mean(model.predict(tr.features) == tr.labels))
    model.metrics["test_acc"] = float(np.mean(model.predict(te.features) == te.labels))
    path = save_artifacts(model, Path(args.out) / "model.json")
    print(f"train acc {model.metrics['train_acc']:.4f}  test acc {model.metrics['test_acc']:.4f}  -> {path}")


def cmd_map(args):
    model = load_artifacts(args.model, "model")
    plan = plan_mapping(model.binary_weights, args.rows, args.cols)
    path = save_artifacts(plan, Path(args.out) / "plan.json")
    print(f"{plan.n_partitions} partitions/class, {plan.phases} phases, {len(plan.slots)} slots -> {path}")


def cmd_program(args):
    cfg = _config(args)
    plan = load_artifacts(args.plan, "plan")
    crossbars, report = program_plan(
        plan, cfg.distribution(), substream(cfg.seed, "device"),
        window_factor=cfg.verify_window_factor, max_attempts=cfg.max_attempts,
        on_failure=cfg.on_failure, **cfg.crossbar_kwargs(),
    )
    out = Path(args.out)
    for i, xbar in enumerate(crossbars):
        save_artifacts(xbar, out / f"crossbar_phase{i}.json")
    save_artifacts(report, out / "programming_report.json")
    print(f"programmed {len(crossbars)} phase(s): {report.summary()}")


def cmd_infer(args):
    cfg = _config(args)
    model = load_artifacts(args.model, "model")
    plan = load_artifacts(args.plan, "plan")
    crossbars = [load_artifacts(p, "crossbar") for p in args.crossbars]
    ds = load_wdbc(cfg.data_path)
    q = model.encode(ds.features)
    preds, scores, diag = hardware_forward_dataset(plan, crossbars, q, cfg.read(), substream(cfg.seed, "sense"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "predictions.csv").open("w") as fh:
        fh.write("index,label,prediction,score_0,score_1\n")
        for i, (y, p, s) in enumerate(zip(ds.labels, preds, scores)):
            fh.write(f"{i},{y},{p}," + ",".join(repr(float(v)) for v in s.score) + "\n")
    print(f"hardware accuracy {np.mean(preds == ds.labels):.4f} ({cfg.read_mode}); diagnostics {json.dumps(diag)}")


def cmd_experiment(args):
    cfg = _config(args)
    result = run_experiment(cfg)
    path = save_artifacts(result, Path(args.out) / "result.json")
    agg = result.aggregate
    for key in ("software_train_acc", "software_test_acc", "hardware_train_acc", "hardware_test_acc"):
        print(f"{key:22s} {agg[key + '_mean']:.4f} +- {agg[key + '_std']:.4f}")
    print(f"-> {path}")


def _parse_value(text):
    try:
        return float(text)
    except ValueError:
        return text


def cmd_sweep(args):
    cfg = _config(args)
    values = [_parse_value(v) for v in args.values.split(",") if v.strip()]
    rows = sweep(cfg, args.knob, values)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(rows, out / f"sweep_{args.knob}.csv")
    for r in rows:
        print(f"{args.knob}={r['value']}: sw test {r['software_test_acc_mean']:.4f}  hw test {r['hardware_test_acc_mean']:.4f}")


def build_parser():
    p = _Parser(prog="rramvmm", description="Binary RRAM crossbar VMM simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, data=True):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", default="out")
        if data:
            sp.add_argument("--data", help="WDBC data file")

    sp = sub.add_parser("train", help="train a binarized ADALINE")
    common(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("map", help="map a trained model onto a crossbar")
    sp.add_argument("--model", required=True)
    sp.add_argument("--rows", type=int, default=8)
    sp.add_argument("--cols", type=int, default=8)
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("program", help="program a mapping plan onto simulated crossbars")
    sp.add_argument("--plan", required=True)
    common(sp, data=False)
    sp.set_defaults(func=cmd_program)

    sp = sub.add_parser("infer", help="classify a dataset on programmed crossbars")
    sp.add_argument("--model", required=True)
    sp.add_argument("--plan", required=True)
    sp.add_argument("--crossbars", nargs="+", required=True)
    sp.add_argument("--mode", choices=("ideal", "sneak"))
    common(sp)
    sp.set_defaults(func=cmd_infer)

    sp = sub.add_parser("experiment", help="run the full multi-trial experiment")
    sp.add_argument("--mode", choices=("ideal", "sneak"))
    common(sp)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("sweep", help="sweep one non-ideality knob")
    sp.add_argument("--knob", required=True, choices=SWEEP_KNOBS)
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.add_argument("--mode", choices=("ideal", "sneak"))
    common(sp)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (DataError, SchemaError, FileNotFoundError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ParameterError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ExperimentError, RRAMError) as e:
        print(f"experiment failed: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
