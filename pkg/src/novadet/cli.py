"""Command-line front end: train, eval, ablate, report."""
import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, parse_config
from .datasets import DATASET_CHANNELS, load_dataset
from .exceptions import NovadetError, UsageError
from .pipeline import make_split
from .scoring import (EvalReport, ablation_suite, evaluate, evaluate_coil,
                      roc_points)
from .training import fit, load_checkpoint, save_checkpoint

VERBS = ("train", "eval", "ablate", "report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="novadet",
        description="One-class novelty detection: adversarial denoising "
                    "auto-encoder with channel attention and latent entropy "
                    "minimization.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb)
        p.add_argument("--config", default=None, help="flat key=value config file")
        # every config key is also a flag; flags override file values
        for f in dataclasses.fields(ExperimentConfig):
            p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None)
    return parser


def _resolve_config(args) -> ExperimentConfig:
    overrides = {f.name: getattr(args, f.name)
                 for f in dataclasses.fields(ExperimentConfig)
                 if getattr(args, f.name) is not None}
    return parse_config(args.config, overrides)


def _out_dirs(cfg: ExperimentConfig):
    out = Path(cfg.out_dir)
    for sub in ("checkpoints", "logs", "reports"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    cfg.echo(out / "config.txt")
    return out


def _prepare_split(cfg: ExperimentConfig):
    raw = load_dataset(cfg.dataset, cfg.data_root)
    split = make_split(raw, cfg.inlier_class, cfg.seed)
    if cfg.limit_train and len(split.train_x) > cfg.limit_train:
        split.train_x = split.train_x[:cfg.limit_train]
        split.train_idx = split.train_idx[:cfg.limit_train]
    return raw, split


def _ckpt_path(out: Path, cfg: ExperimentConfig) -> Path:
    return out / "checkpoints" / f"{cfg.dataset}_cls{cfg.inlier_class}_seed{cfg.seed}.pt"


def cmd_train(cfg: ExperimentConfig) -> int:
    out = _out_dirs(cfg)
    _, split = _prepare_split(cfg)
    model_cfg = cfg.model_config(split.in_channels)
    ckpt = fit(split, model_cfg, cfg.train_config(),
               log_path=out / "logs" / "train.jsonl",
               fingerprint=cfg.fingerprint())
    path = _ckpt_path(out, cfg)
    save_checkpoint(ckpt, path)
    print(f"checkpoint written to {path}")
    return 0


def cmd_eval(cfg: ExperimentConfig) -> int:
    out = _out_dirs(cfg)
    raw, split = _prepare_split(cfg)
    if cfg.checkpoint:
        if not Path(cfg.checkpoint).exists():
            raise UsageError(f"checkpoint not found: {cfg.checkpoint}")
        ckpt = load_checkpoint(cfg.checkpoint, expected_fingerprint=cfg.fingerprint())
        report = evaluate(ckpt, split, cfg.dataset, cfg.score_lambda, seed=cfg.seed)
    elif cfg.dataset == "coil100":
        # full protocol: fresh split and training per repeat
        report = evaluate_coil(raw, cfg.inlier_class,
                               cfg.model_config(split.in_channels),
                               cfg.train_config(), cfg.score_lambda,
                               repeats=cfg.coil_repeats, retrain=cfg.coil_retrain,
                               fingerprint=cfg.fingerprint())
    else:
        raise UsageError("eval requires --checkpoint for mnist/cifar10")
    path = out / "reports" / f"eval_{cfg.dataset}_cls{cfg.inlier_class}.json"
    report.save(path)
    print(f"{cfg.dataset} class {cfg.inlier_class}: AUC = {report.auc:.4f}")
    print(f"report written to {path}")
    return 0


ABLATION_ROW_NAMES = {
    "baseline": "Generator and discriminator",
    "entropy": "With latent entropy loss",
    "full": "With channel attention",
}


def cmd_ablate(cfg: ExperimentConfig) -> int:
    out = _out_dirs(cfg)
    raw = load_dataset(cfg.dataset, cfg.data_root)

    def split_factory(cls, seed):
        split = make_split(raw, cls, seed)
        if cfg.limit_train and len(split.train_x) > cfg.limit_train:
            split.train_x = split.train_x[:cfg.limit_train]
            split.train_idx = split.train_idx[:cfg.limit_train]
        return split

    in_channels = DATASET_CHANNELS[cfg.dataset]
    result = ablation_suite(split_factory, [cfg.inlier_class], cfg.seed_list(),
                            cfg.model_config(in_channels), cfg.train_config(),
                            cfg.score_lambda)
    json_path = out / "reports" / "ablation.json"
    import json as _json
    json_path.write_text(_json.dumps(result, indent=2))
    lines = [f"{'Method':<32}{'AUC':>8}"]
    for name in ("baseline", "entropy", "full"):
        lines.append(f"{ABLATION_ROW_NAMES[name]:<32}{result['means'][name]:>8.3f}")
    table = "\n".join(lines)
    (out / "reports" / "ablation.txt").write_text(table + "\n")
    print(table)
    return 0


def cmd_report(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    reports_dir = out / "reports"
    paths = sorted(reports_dir.glob("eval_*.json"))
    if not paths:
        raise UsageError(f"no evaluation reports under {reports_dir}")
    header = f"{'Dataset':<10}{'Class':>6}{'AUC':>8}  Seeds"
    lines = [header]
    for p in paths:
        rep = EvalReport.load(p)
        lines.append(f"{rep.dataset:<10}{rep.inlier_class:>6}{rep.auc:>8.3f}  "
                     f"{','.join(str(s) for s in rep.seeds)}")
        if rep.scores:
            fpr, tpr = roc_points(np.asarray(rep.scores), np.asarray(rep.labels))
            roc_path = reports_dir / f"roc_{rep.dataset}_cls{rep.inlier_class}.txt"
            roc_path.write_text(
                "\n".join(f"{f:.6f}\t{t:.6f}" for f, t in zip(fpr, tpr)) + "\n")
    print("\n".join(lines))
    return 0


_COMMANDS = {"train": cmd_train, "eval": cmd_eval,
             "ablate": cmd_ablate, "report": cmd_report}


def run_command(verb: str, cfg: ExperimentConfig) -> int:
    return _COMMANDS[verb](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return run_command(args.verb, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (NovadetError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
