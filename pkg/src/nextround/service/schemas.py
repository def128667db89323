"""Request and response bodies of the HTTP service.

Option models mirror the core config dataclasses field for field, but every
field is optional: omitted fields fall back to the core defaults, so the
wire contract never duplicates default values.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict

from ..pipeline import synth_spec_from_dict, train_config_from_dict
from ..synthgen import SynthSpec
from ..training import TrainConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TrainOptions(_Strict):
    epochs: int | None = None
    learning_rate: float | None = None
    optimizer: str | None = None
    batch_size: int | None = None
    dropout_rate: float | None = None
    seed: int | None = None
    class_weights: dict[int, float] | None = None
    early_stop_patience: int | None = None
    mode: str | None = None
    head_activation: str | None = None
    reduction: str | None = None

    def to_config(self) -> TrainConfig:
        given = {k: v for k, v in self.model_dump().items() if v is not None}
        return train_config_from_dict(given)


class SynthOptions(_Strict):
    n_samples: int | None = None
    class_balance: float | None = None
    frames: int | None = None
    p_face: float | None = None
    p_meta: float | None = None
    noise_sigma: float | None = None
    seed: int | None = None
    nationality_pool: int | None = None

    def to_spec(self) -> SynthSpec:
        given = {k: v for k, v in self.model_dump().items() if v is not None}
        return synth_spec_from_dict(given)


class CorpusPaths(_Strict):
    landmarks_path: str
    metadata_path: str
    scores_path: str | None = None
    labels_path: str | None = None


class IngestRequest(CorpusPaths):
    bundle_path: str | None = None


class TrainRequest(CorpusPaths):
    checkpoint_path: str | None = None
    config: TrainOptions = TrainOptions()


class EvalRequest(CorpusPaths):
    checkpoint_path: str


class PredictRequest(_Strict):
    checkpoint_path: str
    landmarks_path: str
    metadata_path: str


class AblateRequest(CorpusPaths):
    config: TrainOptions = TrainOptions()
    test_fraction: float = 0.2


class GradcheckRequest(_Strict):
    n_configs: int = 20
    tolerance: float = 1e-4
    base_seed: int = 0


class SynthRequest(_Strict):
    out_dir: str
    spec: SynthOptions = SynthOptions()


class FramesSummary(_Strict):
    min: int
    max: int
    mean: float


class IngestResponse(_Strict):
    n_videos: int
    class_counts: dict[str, int]
    frames: FramesSummary
    n_truncated: int
    n_golfers: int
    n_nationalities: int
    bundle_path: str | None = None


class TrainResponse(_Strict):
    n_train: int
    n_val: int
    mode: str
    report: dict
    final_eval: dict


class EvalResponse(_Strict):
    mode: str
    n_samples: int
    report: dict


class PredictionRow(_Strict):
    video_id: str
    probability_up: float
    predicted_label: int


class PredictResponse(_Strict):
    mode: str
    predictions: list[PredictionRow]


class AblateResponse(_Strict):
    merged: dict
    facial_only: dict
    meta_only: dict
    n_train: int
    n_test: int


class GradcheckResponse(_Strict):
    all_passed: bool
    max_rel_error: float
    tolerance: float
    reports: list[dict]


class SynthResponse(_Strict):
    spec: dict
    paths: dict


class HealthResponse(_Strict):
    status: str
    version: str
