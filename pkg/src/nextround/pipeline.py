"""File-level orchestration shared by the HTTP service and the CLI.

Every function here takes paths plus plain config objects and returns
JSON-ready dicts, so the service layer stays a thin translation of HTTP
bodies onto these calls and the CLI can reuse them identically.
"""

from __future__ import annotations

import dataclasses
import json
import os

import numpy as np

from .dataset import (
    GolferMeta,
    Label,
    LandmarkSeries,
    MetaStats,
    NationalityVocab,
    build_vocab,
    derive_label,
    parse_labels,
    parse_landmarks,
    parse_metadata,
    parse_scores,
    stratified_split,
)
from .errors import DataError
from .evaluation import ablate, evaluate
from .features import FeatureSample, build_sample
from .model import forward_batch, load_checkpoint, make_batch, save_checkpoint
from .synthgen import SynthSpec, write_bundle
from .training import TrainConfig, fit, grad_check_suite


def _must_exist(*paths: str | None) -> None:
    for p in paths:
        if p is not None and not os.path.isfile(p):
            raise DataError(f"input file not found: {p}")


def load_label_map(scores_path: str | None, labels_path: str | None) -> dict[str, Label]:
    """Labels come from scores or from an explicit labels file, never both."""
    if scores_path and labels_path:
        raise DataError("ambiguous label source: supply a scores CSV or a labels CSV, not both")
    _must_exist(scores_path, labels_path)
    if labels_path:
        return parse_labels(labels_path)
    if scores_path:
        return {r.video_id: derive_label(r) for r in parse_scores(scores_path)}
    raise DataError("no label source: supply a scores CSV or a labels CSV")


def load_features(
    landmarks_path: str, metadata_path: str
) -> tuple[list[LandmarkSeries], list[GolferMeta]]:
    """Parse and align landmarks with metadata, in landmarks-file order."""
    _must_exist(landmarks_path, metadata_path)
    series_list = parse_landmarks(landmarks_path)
    metas = {m.video_id: m for m in parse_metadata(metadata_path)}
    missing = [s.video_id for s in series_list if s.video_id not in metas]
    if missing:
        raise DataError(f"metadata missing for video(s): {', '.join(sorted(missing)[:5])}")
    return series_list, [metas[s.video_id] for s in series_list]


def load_corpus(
    landmarks_path: str,
    metadata_path: str,
    scores_path: str | None = None,
    labels_path: str | None = None,
) -> tuple[list[LandmarkSeries], list[GolferMeta], list[Label]]:
    series_list, metas = load_features(landmarks_path, metadata_path)
    label_map = load_label_map(scores_path, labels_path)
    missing = [s.video_id for s in series_list if s.video_id not in label_map]
    if missing:
        raise DataError(f"label missing for video(s): {', '.join(sorted(missing)[:5])}")
    return series_list, metas, [label_map[s.video_id] for s in series_list]


def build_samples(
    series_list: list[LandmarkSeries],
    metas: list[GolferMeta],
    labels: list[Label],
    vocab: NationalityVocab | None = None,
    stats: MetaStats | None = None,
) -> tuple[list[FeatureSample], NationalityVocab, MetaStats]:
    """Encode a corpus; fits fresh encoders unless frozen ones are supplied."""
    if vocab is None:
        vocab = build_vocab(metas)
    if stats is None:
        stats = MetaStats.fit(metas)
    samples = [build_sample(s, m, vocab, stats, y) for s, m, y in zip(series_list, metas, labels)]
    return samples, vocab, stats


def corpus_summary(
    series_list: list[LandmarkSeries], metas: list[GolferMeta], labels: list[Label]
) -> dict:
    lengths = [len(s) for s in series_list]
    counts = {0: 0, 1: 0}
    for y in labels:
        counts[y.value] += 1
    return {
        "n_videos": len(series_list),
        "class_counts": {"down_or_flat": counts[0], "up": counts[1]},
        "frames": {
            "min": int(min(lengths)),
            "max": int(max(lengths)),
            "mean": float(np.mean(lengths)),
        },
        "n_truncated": sum(1 for s in series_list if s.truncated_from is not None),
        "n_golfers": len({m.golfer_id for m in metas}),
        "n_nationalities": len({m.nationality for m in metas}),
    }


def run_ingest(
    landmarks_path: str,
    metadata_path: str,
    scores_path: str | None = None,
    labels_path: str | None = None,
    bundle_path: str | None = None,
) -> dict:
    """Validate a corpus; optionally write it as one self-contained JSON bundle."""
    series_list, metas, labels = load_corpus(landmarks_path, metadata_path, scores_path, labels_path)
    summary = corpus_summary(series_list, metas, labels)
    if bundle_path:
        doc = {
            "format": "nextround-dataset-bundle",
            "version": 1,
            "summary": summary,
            "videos": [
                {
                    "video_id": s.video_id,
                    "frame_index": s.frame_index.tolist(),
                    "timestamps": s.timestamps.tolist(),
                    "channels": s.channels.tolist(),
                    "truncated_from": s.truncated_from,
                    "meta": {
                        "golfer_id": m.golfer_id,
                        "age": m.age,
                        "career_years": m.career_years,
                        "height_cm": m.height_cm,
                        "prev_rank": m.prev_rank,
                        "nationality": m.nationality,
                    },
                    "label": y.value,
                }
                for s, m, y in zip(series_list, metas, labels)
            ],
        }
        with open(bundle_path, "w") as f:
            json.dump(doc, f, sort_keys=True)
            f.write("\n")
        summary = dict(summary)
        summary["bundle_path"] = bundle_path
    return summary


def _encoder_extras(vocab: NationalityVocab, stats: MetaStats) -> dict:
    return {
        "vocab_codes": list(vocab.codes),
        "meta_means": stats.means.tolist(),
        "meta_stds": stats.stds.tolist(),
    }


def encoders_from_extras(extras: dict) -> tuple[NationalityVocab, MetaStats]:
    try:
        vocab = NationalityVocab(codes=tuple(extras["vocab_codes"]))
        stats = MetaStats(
            means=np.asarray(extras["meta_means"], dtype=np.float64),
            stds=np.asarray(extras["meta_stds"], dtype=np.float64),
        )
    except KeyError as exc:
        raise DataError(f"checkpoint lacks feature encoder field {exc}") from exc
    return vocab, stats


def run_train(
    landmarks_path: str,
    metadata_path: str,
    scores_path: str | None = None,
    labels_path: str | None = None,
    checkpoint_path: str | None = None,
    config: TrainConfig | None = None,
) -> dict:
    """Train on the full corpus with an internal stratified validation carve-out."""
    config = config or TrainConfig()
    series_list, metas, labels = load_corpus(landmarks_path, metadata_path, scores_path, labels_path)
    samples, vocab, stats = build_samples(series_list, metas, labels)
    train_idx, val_idx = stratified_split([y.value for y in labels], 0.2, config.seed)
    model, report = fit(
        [samples[i] for i in train_idx], [samples[i] for i in val_idx], config
    )
    if checkpoint_path:
        save_checkpoint(model, checkpoint_path, seed=config.seed, extras=_encoder_extras(vocab, stats))
        report.checkpoint_path = checkpoint_path
    # evaluating over the whole corpus (not just the carve-out) means a later
    # `eval` run against the same files and the saved checkpoint reproduces
    # this report exactly
    final_eval = evaluate(model, samples)
    return {
        "n_train": len(train_idx),
        "n_val": len(val_idx),
        "mode": config.mode,
        "report": report.to_dict(),
        "final_eval": final_eval.to_dict(),
    }


def _restore(checkpoint_path: str):
    _must_exist(checkpoint_path)
    model, seed, extras = load_checkpoint(checkpoint_path)
    vocab, stats = encoders_from_extras(extras)
    return model, seed, vocab, stats


def run_eval(
    checkpoint_path: str,
    landmarks_path: str,
    metadata_path: str,
    scores_path: str | None = None,
    labels_path: str | None = None,
) -> dict:
    model, _, vocab, stats = _restore(checkpoint_path)
    series_list, metas, labels = load_corpus(landmarks_path, metadata_path, scores_path, labels_path)
    samples, _, _ = build_samples(series_list, metas, labels, vocab=vocab, stats=stats)
    report = evaluate(model, samples)
    return {"mode": model.mode, "n_samples": len(samples), "report": report.to_dict()}


def run_predict(checkpoint_path: str, landmarks_path: str, metadata_path: str) -> dict:
    """Per-video up-probability from a saved model; no labels required."""
    model, _, vocab, stats = _restore(checkpoint_path)
    series_list, metas = load_features(landmarks_path, metadata_path)
    placeholder = [Label(0)] * len(series_list)  # labels unused by the forward pass
    samples, _, _ = build_samples(series_list, metas, placeholder, vocab=vocab, stats=stats)
    probs, _ = forward_batch(model, make_batch(samples, model.mode))
    preds = np.argmax(probs, axis=1)
    return {
        "mode": model.mode,
        "predictions": [
            {
                "video_id": s.video_id,
                "probability_up": float(probs[i, 1]),
                "predicted_label": int(preds[i]),
            }
            for i, s in enumerate(samples)
        ],
    }


def run_ablate(
    landmarks_path: str,
    metadata_path: str,
    scores_path: str | None = None,
    labels_path: str | None = None,
    config: TrainConfig | None = None,
    test_fraction: float = 0.2,
) -> dict:
    config = config or TrainConfig()
    series_list, metas, labels = load_corpus(landmarks_path, metadata_path, scores_path, labels_path)
    samples, _, _ = build_samples(series_list, metas, labels)
    report = ablate(samples, config, test_fraction=test_fraction)
    return report.to_dict()


def run_gradcheck(n_configs: int = 20, tolerance: float = 1e-4, base_seed: int = 0) -> dict:
    reports = grad_check_suite(n_configs=n_configs, tolerance=tolerance, base_seed=base_seed)
    return {
        "all_passed": all(r.passed for r in reports),
        "max_rel_error": float(max(r.max_rel_error for r in reports)),
        "tolerance": tolerance,
        "reports": [r.to_dict() for r in reports],
    }


def run_synth(spec: SynthSpec, out_dir: str) -> dict:
    bundle = write_bundle(spec, out_dir)
    return {
        "spec": spec.to_dict(),
        "paths": dataclasses.asdict(bundle),
    }


_TRAIN_CONFIG_FIELDS = {f.name for f in dataclasses.fields(TrainConfig)}
_SYNTH_SPEC_FIELDS = {f.name for f in dataclasses.fields(SynthSpec)}


def train_config_from_dict(doc: dict) -> TrainConfig:
    unknown = set(doc) - _TRAIN_CONFIG_FIELDS
    if unknown:
        raise DataError(f"unknown training option(s): {', '.join(sorted(unknown))}")
    if "class_weights" in doc and doc["class_weights"] is not None:
        doc = dict(doc)
        doc["class_weights"] = {int(k): float(v) for k, v in doc["class_weights"].items()}
    return TrainConfig(**doc)


def synth_spec_from_dict(doc: dict) -> SynthSpec:
    unknown = set(doc) - _SYNTH_SPEC_FIELDS
    if unknown:
        raise DataError(f"unknown synthesis option(s): {', '.join(sorted(unknown))}")
    return SynthSpec(**doc)
