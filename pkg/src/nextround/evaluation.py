"""Confusion-matrix metrics and the three-way single-vs-merged modality ablation.

F1 is the harmonic mean 2PR/(P+R); any quantity whose denominator is zero is
defined as 0. The headline number everywhere is the positive-class (label 1)
F1, with macro-F1 reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataset import stratified_split
from .errors import DataError
from .features import FeatureSample
from .model import FusionModel, MODES, forward_batch, make_batch


def precision_recall_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if min(tp, fp, fn) < 0:
        raise DataError("confusion counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def f1_score(tp: int, fp: int, fn: int) -> float:
    return precision_recall_f1(tp, fp, fn)[2]


def confusion_counts(y_true, y_pred, positive: int = 1) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) treating ``positive`` as the positive class."""
    t = np.asarray(y_true) == positive
    p = np.asarray(y_pred) == positive
    tp = int(np.sum(t & p))
    fp = int(np.sum(~t & p))
    fn = int(np.sum(t & ~p))
    tn = int(np.sum(~t & ~p))
    return tp, fp, fn, tn


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: dict[int, float]
    recall: dict[int, float]
    f1: dict[int, float]
    macro_f1: float
    positive_class: int = 1

    @property
    def n_samples(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def positive_f1(self) -> float:
        return self.f1[self.positive_class]

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": {str(k): v for k, v in self.precision.items()},
            "recall": {str(k): v for k, v in self.recall.items()},
            "f1": {str(k): v for k, v in self.f1.items()},
            "macro_f1": self.macro_f1,
            "positive_class": self.positive_class,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        return cls(
            tp=doc["tp"],
            fp=doc["fp"],
            fn=doc["fn"],
            tn=doc["tn"],
            precision={int(k): v for k, v in doc["precision"].items()},
            recall={int(k): v for k, v in doc["recall"].items()},
            f1={int(k): v for k, v in doc["f1"].items()},
            macro_f1=doc["macro_f1"],
            positive_class=doc["positive_class"],
        )

    def render_table(self) -> str:
        lines = [
            "class  precision  recall     f1",
            f"    0  {self.precision[0]:9.4f}  {self.recall[0]:6.4f}  {self.f1[0]:6.4f}",
            f"    1  {self.precision[1]:9.4f}  {self.recall[1]:6.4f}  {self.f1[1]:6.4f}",
            f"macro f1: {self.macro_f1:.4f}",
            f"positive-class f1: {self.positive_f1:.4f}",
            f"counts: tp={self.tp} fp={self.fp} fn={self.fn} tn={self.tn}",
        ]
        return "\n".join(lines)


def report_from_counts(tp: int, fp: int, fn: int, tn: int) -> EvalReport:
    p1, r1, f1_pos = precision_recall_f1(tp, fp, fn)
    # class 0 as positive: its hits are the true negatives of class 1
    p0, r0, f1_neg = precision_recall_f1(tn, fn, fp)
    return EvalReport(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        precision={0: p0, 1: p1},
        recall={0: r0, 1: r1},
        f1={0: f1_neg, 1: f1_pos},
        macro_f1=(f1_neg + f1_pos) / 2.0,
    )


def predict(model: FusionModel, samples: list[FeatureSample]) -> np.ndarray:
    """Eval-mode class predictions; argmax ties resolve to class 0."""
    if not samples:
        raise DataError("cannot evaluate an empty sample set")
    batch = make_batch(samples, model.mode)
    probs, _ = forward_batch(model, batch)
    return np.argmax(probs, axis=1)


def evaluate(model: FusionModel, samples: list[FeatureSample]) -> EvalReport:
    """Aggregate confusion counts of eval-mode predictions over the set."""
    preds = predict(model, samples)
    y_true = np.array([s.label.value for s in samples])
    tp, fp, fn, tn = confusion_counts(y_true, preds, positive=1)
    return report_from_counts(tp, fp, fn, tn)


@dataclass(frozen=True)
class AblationReport:
    """The three modality runs evaluated on one shared test partition."""

    merged: EvalReport
    facial_only: EvalReport
    meta_only: EvalReport
    n_train: int
    n_test: int

    def report_for(self, mode: str) -> EvalReport:
        return {"merged": self.merged, "facial_only": self.facial_only, "meta_only": self.meta_only}[mode]

    def to_dict(self) -> dict:
        return {
            "merged": self.merged.to_dict(),
            "facial_only": self.facial_only.to_dict(),
            "meta_only": self.meta_only.to_dict(),
            "n_train": self.n_train,
            "n_test": self.n_test,
        }

    def render_table(self) -> str:
        header = "mode         positive_f1  macro_f1  tp  fp  fn  tn"
        rows = []
        for mode in MODES:
            r = self.report_for(mode)
            rows.append(
                f"{mode:<12} {r.positive_f1:11.4f}  {r.macro_f1:8.4f}  {r.tp:2d}  {r.fp:2d}  {r.fn:2d}  {r.tn:2d}"
            )
        return "\n".join([header, *rows])


def split_for_ablation(
    samples: list[FeatureSample], test_fraction: float, seed: int
) -> tuple[list[FeatureSample], list[FeatureSample], list[FeatureSample]]:
    """One stratified test split, then a stratified 20% validation carve-out."""
    labels = [s.label.value for s in samples]
    train_idx, test_idx = stratified_split(labels, test_fraction, seed)
    trainval = [samples[i] for i in train_idx]
    test = [samples[i] for i in test_idx]
    tv_labels = [s.label.value for s in trainval]
    fit_idx, val_idx = stratified_split(tv_labels, 0.2, seed)
    return [trainval[i] for i in fit_idx], [trainval[i] for i in val_idx], test


def ablate(samples: list[FeatureSample], config, test_fraction: float = 0.2) -> AblationReport:
    """Train merged, facial_only, and meta_only on one shared split and
    evaluate all three on the identical test partition."""
    from .training import fit  # deferred: training imports this module's metrics

    train, val, test = split_for_ablation(samples, test_fraction, config.seed)
    reports: dict[str, EvalReport] = {}
    for mode in MODES:
        model, _ = fit(train, val, replace(config, mode=mode))
        reports[mode] = evaluate(model, test)
    return AblationReport(
        merged=reports["merged"],
        facial_only=reports["facial_only"],
        meta_only=reports["meta_only"],
        n_train=len(train) + len(val),
        n_test=len(test),
    )
