"""Novelty scoring, score normalization, ROC-AUC and experiment drivers."""
import dataclasses
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import torch

from .exceptions import NumericError, UndefinedMetricError
from .losses import per_sample_context, per_sample_feature
from .networks import ModelConfig
from .pipeline import OneClassSplit, make_coil_split
from .training import Checkpoint, TrainConfig, fit, models_from_checkpoint

DEFAULT_SCORE_LAMBDA = 0.9


@torch.no_grad()
def novelty_score(x, generator, discriminator, lam: float = DEFAULT_SCORE_LAMBDA,
                  batch_size: int = 256) -> np.ndarray:
    """Per-sample novelty score: lam * context error + (1 - lam) * feature error.

    Runs in eval mode on clean inputs; higher means more novel. Scores are
    independent of batch composition because batch-norm uses running
    statistics.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"score lambda must be in [0, 1], got {lam}")
    generator.eval()
    discriminator.eval()
    x = torch.as_tensor(np.asarray(x, dtype=np.float32))
    scores = []
    for start in range(0, len(x), batch_size):
        xb = x[start:start + batch_size]
        x_hat, _ = generator(xb)
        _, feat_real = discriminator(xb)
        _, feat_fake = discriminator(x_hat)
        con = per_sample_context(xb, x_hat)
        fea = per_sample_feature(feat_real, feat_fake)
        scores.append((lam * con + (1.0 - lam) * fea).numpy())
    out = np.concatenate(scores)
    if not np.isfinite(out).all():
        raise NumericError("non-finite novelty score")
    return out


def normalize_scores(raw: np.ndarray):
    """Min-max map to [0, 1]; all-equal input yields zeros plus a flag."""
    raw = np.asarray(raw, dtype=np.float64)
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.zeros_like(raw), True
    return (raw - lo) / (hi - lo), False


def roc_points(scores: np.ndarray, labels: np.ndarray):
    """ROC curve as (fpr, tpr) arrays, one point per distinct threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = int((labels == 1).sum())
    neg = int((labels == 0).sum())
    if pos == 0 or neg == 0:
        raise UndefinedMetricError("AUC needs both inlier and outlier labels")
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tps = np.cumsum(sorted_labels == 1)
    fps = np.cumsum(sorted_labels == 0)
    # keep only the last index of each tied score block
    distinct = np.r_[np.flatnonzero(np.diff(sorted_scores)), len(scores) - 1]
    tpr = np.r_[0.0, tps[distinct] / pos]
    fpr = np.r_[0.0, fps[distinct] / neg]
    return fpr, tpr


def compute_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Trapezoidal area under the ROC curve; tied scores contribute 1/2."""
    fpr, tpr = roc_points(scores, labels)
    trapezoid = getattr(np, "trapezoid", np.trapz)
    return float(trapezoid(tpr, fpr))


@dataclass
class ScoreSet:
    raw: np.ndarray
    normalized: np.ndarray
    labels: np.ndarray
    degenerate: bool


def score_test_set(split: OneClassSplit, generator, discriminator,
                   lam: float = DEFAULT_SCORE_LAMBDA) -> ScoreSet:
    raw = novelty_score(split.test_x, generator, discriminator, lam)
    normalized, degenerate = normalize_scores(raw)
    return ScoreSet(raw=raw, normalized=normalized,
                    labels=np.asarray(split.test_y), degenerate=degenerate)


@dataclass
class EvalReport:
    dataset: str
    inlier_class: int
    auc: float
    seeds: List[int]
    score_lambda: float
    config_fingerprint: str = ""
    per_repeat_aucs: Optional[List[float]] = None
    scores: List[float] = field(default_factory=list)
    normalized: List[float] = field(default_factory=list)
    labels: List[int] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls(**json.loads(text))

    def save(self, path):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "EvalReport":
        return cls.from_json(Path(path).read_text())


def evaluate(ckpt: Checkpoint, split: OneClassSplit, dataset: str,
             lam: float = DEFAULT_SCORE_LAMBDA, seed: int = 0) -> EvalReport:
    """Score the split's test set with the checkpointed model and compute AUC.

    AUC is computed on the raw scores; min-max normalization is monotone
    and kept for reporting only.
    """
    gen, disc, _ = models_from_checkpoint(ckpt)
    scoreset = score_test_set(split, gen, disc, lam)
    auc = compute_auc(scoreset.raw, scoreset.labels)
    return EvalReport(
        dataset=dataset, inlier_class=split.inlier_class, auc=auc,
        seeds=[seed], score_lambda=lam,
        config_fingerprint=ckpt.config_fingerprint,
        scores=scoreset.raw.tolist(), normalized=scoreset.normalized.tolist(),
        labels=scoreset.labels.tolist(),
    )


def evaluate_coil(raw_dataset, inlier_class: int, model_cfg: ModelConfig,
                  cfg: TrainConfig, lam: float = DEFAULT_SCORE_LAMBDA,
                  repeats: int = 20, retrain: bool = True,
                  fingerprint: str = "") -> EvalReport:
    """20-repeat COIL-100 protocol: fresh split and training per repeat.

    retrain=False reuses the first repeat's model for the remaining splits;
    that is a speed shortcut, not the published protocol.
    """
    aucs = []
    ckpt = None
    last = None
    for r in range(repeats):
        seed = cfg.seed + r
        split = make_coil_split(raw_dataset, inlier_class, seed)
        if retrain or ckpt is None:
            ckpt = fit(split, model_cfg, replace(cfg, seed=seed), fingerprint=fingerprint)
        last = evaluate(ckpt, split, "coil100", lam, seed=seed)
        aucs.append(last.auc)
    report = replace(last, auc=float(np.mean(aucs)), per_repeat_aucs=aucs,
                     seeds=[cfg.seed + r for r in range(repeats)])
    return report


ABLATION_CONFIGS = ("baseline", "entropy", "full")


def _ablation_variant(name: str, model_cfg: ModelConfig, cfg: TrainConfig):
    if name == "baseline":
        return replace(model_cfg, use_attention=False), replace(cfg, use_entropy=False)
    if name == "entropy":
        return replace(model_cfg, use_attention=False), replace(cfg, use_entropy=True)
    if name == "full":
        return replace(model_cfg, use_attention=True), replace(cfg, use_entropy=True)
    raise ValueError(f"unknown ablation config {name!r}")


def ablation_suite(split_factory, classes: Sequence[int], seeds: Sequence[int],
                   model_cfg: ModelConfig, cfg: TrainConfig,
                   lam: float = DEFAULT_SCORE_LAMBDA) -> dict:
    """Train and evaluate baseline / +entropy / +attention over classes x seeds.

    split_factory(inlier_class, seed) must return a OneClassSplit. Returns
    per-run rows and per-config means.
    """
    rows = []
    for name in ABLATION_CONFIGS:
        mcfg, tcfg = _ablation_variant(name, model_cfg, cfg)
        for cls in classes:
            for seed in seeds:
                split = split_factory(cls, seed)
                ckpt = fit(split, mcfg, replace(tcfg, seed=seed))
                report = evaluate(ckpt, split, "ablation", lam, seed=seed)
                rows.append({"config": name, "inlier_class": int(cls),
                             "seed": int(seed), "auc": report.auc})
    means = {name: float(np.mean([r["auc"] for r in rows if r["config"] == name]))
             for name in ABLATION_CONFIGS}
    return {"rows": rows, "means": means}
