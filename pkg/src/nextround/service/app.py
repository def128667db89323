"""HTTP facade over the pipeline operations.

Paths in request bodies refer to the server's filesystem; the bundled CLI
runs the app in-process so those are the caller's own files. Data and
validation problems surface as 400, numeric failures as 500.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..errors import DataError, NumericError
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(title="nextround", version=__version__)

    @app.exception_handler(DataError)
    async def data_error(request: Request, exc: DataError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(NumericError)
    async def numeric_error(request: Request, exc: NumericError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/ingest", response_model=schemas.IngestResponse)
    def ingest(req: schemas.IngestRequest):
        return pipeline.run_ingest(
            req.landmarks_path,
            req.metadata_path,
            scores_path=req.scores_path,
            labels_path=req.labels_path,
            bundle_path=req.bundle_path,
        )

    @app.post("/synth", response_model=schemas.SynthResponse)
    def synth(req: schemas.SynthRequest):
        return pipeline.run_synth(req.spec.to_spec(), req.out_dir)

    @app.post("/train", response_model=schemas.TrainResponse)
    def train(req: schemas.TrainRequest):
        return pipeline.run_train(
            req.landmarks_path,
            req.metadata_path,
            scores_path=req.scores_path,
            labels_path=req.labels_path,
            checkpoint_path=req.checkpoint_path,
            config=req.config.to_config(),
        )

    @app.post("/eval", response_model=schemas.EvalResponse)
    def eval_(req: schemas.EvalRequest):
        return pipeline.run_eval(
            req.checkpoint_path,
            req.landmarks_path,
            req.metadata_path,
            scores_path=req.scores_path,
            labels_path=req.labels_path,
        )

    @app.post("/predict", response_model=schemas.PredictResponse)
    def predict(req: schemas.PredictRequest):
        return pipeline.run_predict(req.checkpoint_path, req.landmarks_path, req.metadata_path)

    @app.post("/ablate", response_model=schemas.AblateResponse)
    def ablate(req: schemas.AblateRequest):
        return pipeline.run_ablate(
            req.landmarks_path,
            req.metadata_path,
            scores_path=req.scores_path,
            labels_path=req.labels_path,
            config=req.config.to_config(),
            test_fraction=req.test_fraction,
        )

    @app.post("/gradcheck", response_model=schemas.GradcheckResponse)
    def gradcheck(req: schemas.GradcheckRequest):
        return pipeline.run_gradcheck(
            n_configs=req.n_configs, tolerance=req.tolerance, base_seed=req.base_seed
        )

    return app
