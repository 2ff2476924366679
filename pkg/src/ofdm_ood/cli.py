"""Command-line front end: synth, train, score, eval, report.

Exit codes: 0 success, 1 usage error, 2 data error, 3 training error.
Settings come from an optional INI file (``--config``); flags override it.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import os
import sys
import time

import numpy as np

from . import dataset as ds_mod
from .dataset import DatasetError, DatasetKind, DatasetSpec
from .evaluation import EvaluationError, evaluate_experiment, parse_grid_csv, report
from .nn import CheckpointError, OptimizerConfig
from .nn import checkpoint as ckpt_mod
from .scores import ScoreTableError, read_scores, score_batch, write_scores

EXIT_USAGE, EXIT_DATA, EXIT_TRAIN = 1, 2, 3
SYNTH_KINDS = ("din", "din-test", "dout-oe", "dout-test")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path is not None:
        if not os.path.exists(path):
            raise DataError(f"config file not found: {path}")
        cp.read(path)
    return cp


def _literal(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _pick(flag, cp, section, key, conv, default):
    if flag is not None:
        return flag
    if cp.has_option(section, key):
        return conv(cp.get(section, key))
    return default


def _seed(args, cp) -> int:
    return _pick(args.seed, cp, "run", "seed", int, 0)


def dataset_spec(args, cp) -> DatasetSpec:
    kw = {"base_seed": _seed(args, cp)}
    n_batches = _pick(getattr(args, "n_batches", None), cp, "dataset", "n_batches", int, None)
    if n_batches is not None:
        kw["n_batches"] = n_batches
    for key, conv in (("batch_size", int), ("max_cfo", float)):
        if cp.has_option("dataset", key):
            kw[key] = conv(cp.get("dataset", key))
    if cp.has_option("dataset", "sir_db"):
        kw["sir_db"] = _floats(cp.get("dataset", "sir_db"))
        kw["n_sir_bins"] = len(kw["sir_db"])
    if cp.has_option("dataset", "snr_db"):
        kw["snr_db"] = _floats(cp.get("dataset", "snr_db"))
        kw["n_mod"] = len(kw["snr_db"])
    try:
        return DatasetSpec(**kw)
    except ValueError as exc:
        raise DataError(f"bad dataset settings: {exc}") from None


def _dataset_kind(args, cp) -> tuple[DatasetKind, bool]:
    name = _pick(args.kind, cp, "synth", "kind", str, None)
    if name is None:
        raise UsageError("synth needs --kind")
    if name not in SYNTH_KINDS:
        raise UsageError(f"invalid kind {name!r}; choose from {', '.join(SYNTH_KINDS)}")
    interferer = _pick(args.interferer, cp, "synth", "interferer", str, None)
    channel = args.channel or (cp.getboolean("synth", "channel") if cp.has_option("synth", "channel")
                               else False)
    if name == "dout-test":
        if interferer not in ("dsss", "ofdm"):
            raise UsageError("dout-test needs --interferer dsss or ofdm")
        return DatasetKind.dout_test(interferer, channel), False
    if interferer is not None or channel:
        raise UsageError(f"--interferer/--channel apply to dout-test only, not {name}")
    if name == "dout-oe":
        return DatasetKind.dout_oe(), False
    return DatasetKind.din(), name == "din-test"


def cmd_synth(args, cp) -> int:
    kind, heldout = _dataset_kind(args, cp)
    out = _pick(args.out, cp, "synth", "out", str, None)
    if out is None:
        raise UsageError("synth needs --out")
    spec = dataset_spec(args, cp)
    t0 = time.perf_counter()
    data = ds_mod.generate(spec, kind, heldout=heldout)
    ds_mod.write(data, out)
    manifest = args.manifest or os.path.join(os.path.dirname(os.path.abspath(out)), "manifest.tsv")
    ds_mod.append_manifest(manifest, out, data)
    print(f"wrote {out}: kind={kind.label} heldout={heldout} dims={list(spec.dims)}x"
          f"[{spec.block_size},{spec.n_channels}] seed={spec.base_seed} "
          f"({time.perf_counter() - t0:.1f}s)")
    _print_mix_summary(data)
    return 0


def _print_mix_summary(data) -> None:
    rec = data.records
    with np.errstate(divide="ignore"):
        snr = 10 * np.log10(rec["signal_power"] / rec["noise_power"])
        sir = 10 * np.log10(rec["signal_power"] / rec["interferer_power"])
    for m, name in enumerate(["BPSK", "QPSK", "QAM16", "QAM64"][: data.spec.n_mod]):
        err = np.abs(snr[m] - data.spec.snr_db[m]).max() if rec.size else 0.0
        print(f"  {name}: snr {data.spec.snr_db[m]:g} dB (max deviation {err:.2e} dB)")
    if data.kind.name != "din" and rec.size:
        want = np.asarray(data.spec.sir_db)[None, :, None, None]
        print(f"  sir grid {list(data.spec.sir_db)} dB "
              f"(max deviation {np.abs(sir - want).max():.2e} dB)")


def _read_dataset(path, what: str):
    if path is None:
        raise UsageError(f"missing {what} path")
    if not os.path.exists(path):
        raise DataError(f"{what} not found: {path}")
    return ds_mod.read(path)


def _model_settings(cp, kind: str) -> dict:
    """``[model]`` keys go to every kind that knows them; ``[model.<kind>]`` to one kind."""
    from .detectors.models import MODEL_CLASSES

    out = {}
    if cp.has_section("model"):
        for key, value in cp.items("model"):
            if not any(key in cls.defaults for cls in MODEL_CLASSES.values()):
                raise UsageError(f"unknown model setting {key!r}")
            if key in MODEL_CLASSES[kind].defaults:
                out[key] = _literal(value)
    if cp.has_section(f"model.{kind}"):
        out.update({k: _literal(v) for k, v in cp.items(f"model.{kind}")})
    return out


def cmd_train(args, cp) -> int:
    from .detectors import (
        DESK_PRESETS, KINDS, OeConfig, TrainConfig, build_detector, from_checkpoint,
        to_checkpoint, train_detector, train_echo,
    )

    kind = _pick(args.model, cp, "train", "model", str, None)
    if kind not in KINDS:
        raise UsageError(f"train needs --model from {', '.join(KINDS)}")
    out = _pick(args.out, cp, "train", "out", str, None)
    if out is None:
        raise UsageError("train needs --out")
    oe_on = args.oe or (cp.getboolean("train", "oe") if cp.has_option("train", "oe") else False)
    lam = _pick(args.lam, cp, "train", "lam", float, 0.5)
    preset = DESK_PRESETS[kind]
    seed = _seed(args, cp)
    steps = _pick(args.steps, cp, "train", "steps", int, preset["steps"])
    lr = _pick(args.lr, cp, "train", "lr", float, preset["lr"])
    batch = _pick(None, cp, "train", "batch_size", int, 64)
    opt_kind = _pick(None, cp, "train", "optimizer", str, "radam")

    # validate every input before any training starts
    din = _read_dataset(_pick(args.data, cp, "train", "data", str, None), "training dataset")
    if din.kind.name != "din":
        raise DataError(f"training data must be an in-distribution set, got {din.kind.label}")
    oe_data = None
    oe = OeConfig(enabled=oe_on, lam=lam)
    if oe.active:
        oe_data = _read_dataset(_pick(args.oe_data, cp, "train", "oe_data", str, None),
                                "outlier-exposure dataset")
        if oe_data.kind.name != "dout-oe":
            raise DataError(f"outlier data must be dout-oe, got {oe_data.kind.label}")

    start = 0
    optimizers = None
    if args.resume:
        if not os.path.exists(args.resume):
            raise DataError(f"checkpoint not found: {args.resume}")
        ck = ckpt_mod.load(args.resume)
        if ck.kind != kind:
            raise DataError(f"resume checkpoint holds a {ck.kind} model, not {kind}")
        model, optimizers = from_checkpoint(ck)
        start = int(ck.train_config.get("step", 0))
        seed = int(ck.train_config.get("seed", seed))
    else:
        model_cfg = dict(preset["model"], init_seed=seed, **_model_settings(cp, kind))
        try:
            model = build_detector(kind, oe, **model_cfg)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad model settings: {exc}") from None

    log_path = args.log or f"{out}.log"
    cfg = TrainConfig(steps=steps, batch_size=batch, seed=seed + start,
                      optimizer=OptimizerConfig(kind=opt_kind, lr=lr), log_path=log_path)
    t0 = time.perf_counter()
    _, opts = train_detector(model, din.flat_iq(), din.flat_labels(), oe, cfg,
                             oe_iq=None if oe_data is None else oe_data.flat_iq(),
                             optimizers=optimizers, start_step=start)
    step = start + steps
    echo = train_echo(kind, cfg, oe, step, seed=seed)
    ckpt = to_checkpoint(model, echo, opts)
    ckpt_mod.save(ckpt, out)
    print(f"wrote {out}: model={kind} oe={oe.active} steps={start}->{step} "
          f"({time.perf_counter() - t0:.1f}s), log {log_path}")
    return 0


def cmd_score(args, cp) -> int:
    from .detectors import from_checkpoint

    if args.checkpoint is None or args.data is None or args.out is None:
        raise UsageError("score needs --checkpoint, --data and --out")
    if not os.path.exists(args.checkpoint):
        raise DataError(f"checkpoint not found: {args.checkpoint}")
    data = _read_dataset(args.data, "dataset")
    ck = ckpt_mod.load(args.checkpoint)
    model, _ = from_checkpoint(ck)
    expected = (960, 2)
    got = (data.spec.block_size, data.spec.n_channels)
    if got != expected:
        raise DataError(f"model expects [{expected[0]}, {expected[1]}] examples, "
                        f"dataset has [{got[0]}, {got[1]}]")
    oe = ck.train_config.get("oe", {})
    meta = {"oe": bool(oe.get("enabled")) and oe.get("lam", 0) > 0,
            "seed": ck.train_config.get("seed", "?"),
            "checkpoint": os.path.basename(args.checkpoint)}
    table = score_batch(model, data, meta)
    write_scores(table, args.out)
    print(f"wrote {args.out}: {table.n_rows} scores ({model.kind} on {data.kind.label})")
    return 0


def cmd_eval(args, cp) -> int:
    if args.din_scores is None or args.dout_scores is None or args.out is None:
        raise UsageError("eval needs --din-scores, --dout-scores and --out")
    din = read_scores(args.din_scores)
    dout = read_scores(args.dout_scores)
    grid = evaluate_experiment(din, dout, keep_curves=not args.no_roc)
    paths = report(grid, args.out, roc_points=not args.no_roc)
    print(f"wrote {len(paths)} files to {args.out}; grid {grid.values.shape[0]}x"
          f"{grid.values.shape[1]}, mean AUROC {grid.values.mean():.4f}")
    return 0


def cmd_report(args, cp) -> int:
    """Collect grid CSVs into one summary row per experiment."""
    if not args.grids or args.out is None:
        raise UsageError("report needs one or more --grid files and --out")
    rows = []
    for path in args.grids:
        if not os.path.exists(path):
            raise DataError(f"grid not found: {path}")
        with open(path) as fh:
            grid = parse_grid_csv(fh.read())
        meta = grid.metadata
        rows.append([meta.get("model", "?"), meta.get("oe", "?"), meta.get("dataset", "?"),
                     meta.get("seed", "?"), f"{grid.values[:, 0].mean():.6f}",
                     f"{grid.weakest_bins_mean():.6f}", f"{grid.values.mean():.6f}"])
    header = ["model", "oe", "dataset", "seed", "auroc_lowest_sir", "auroc_weakest5", "auroc_mean"]
    text = "\n".join(",".join(map(str, r)) for r in [header] + rows) + "\n"
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    with open(args.out, "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ofdm-ood", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="INI file with [run]/[dataset]/[synth]/[train]/[model]")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")

    s = sub.add_parser("synth", help="generate a dataset file")
    common(s)
    s.add_argument("--kind", help=f"one of {', '.join(SYNTH_KINDS)}")
    s.add_argument("--interferer", choices=("dsss", "ofdm"))
    s.add_argument("--channel", action="store_true", help="multipath channel on the interferer")
    s.add_argument("--n-batches", type=int, dest="n_batches")
    s.add_argument("--manifest", help="manifest TSV (default: manifest.tsv beside --out)")

    t = sub.add_parser("train", help="train a detector")
    common(t)
    t.add_argument("--model", choices=("msp", "dml", "vae", "ar"))
    t.add_argument("--oe", action="store_true", help="enable outlier exposure")
    t.add_argument("--lam", type=float, help="outlier-exposure weight")
    t.add_argument("--data", help="in-distribution training set")
    t.add_argument("--oe-data", dest="oe_data", help="outlier-exposure set")
    t.add_argument("--steps", type=int)
    t.add_argument("--lr", type=float)
    t.add_argument("--log")
    t.add_argument("--resume", help="continue from this checkpoint")

    c = sub.add_parser("score", help="score a dataset with a checkpoint")
    common(c)
    c.add_argument("--checkpoint")
    c.add_argument("--data")

    e = sub.add_parser("eval", help="AUROC grid from ID and OOD score tables")
    common(e)
    e.add_argument("--din-scores", dest="din_scores")
    e.add_argument("--dout-scores", dest="dout_scores")
    e.add_argument("--no-roc", action="store_true", dest="no_roc", help="skip ROC point files")

    r = sub.add_parser("report", help="summarize grid CSVs")
    common(r)
    r.add_argument("--grid", action="append", dest="grids")
    return p


COMMANDS = {"synth": cmd_synth, "train": cmd_train, "score": cmd_score, "eval": cmd_eval,
            "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    from .detectors import TrainingError

    try:
        cp = load_config(args.config)
        return COMMANDS[args.command](args, cp)
    except UsageError as exc:
        print(f"ofdm-ood {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"ofdm-ood {args.command}: training error: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except (DataError, DatasetError, CheckpointError, ScoreTableError, EvaluationError,
            configparser.Error, OSError, ValueError) as exc:
        print(f"ofdm-ood {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
