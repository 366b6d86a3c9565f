import logging
import time
from typing import List, Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from grouptest.channel import ChannelParams, end_to_end_measure, flip_counts, z_channel_sample
from grouptest.config import settings
from grouptest.construction import is_disjunct
from grouptest.decoder import distance_decode
from grouptest.design import DesignSpec, Strategy, design
from grouptest.experiments.sweeps import sweep_design_surface, sweep_tests_vs_failure
from grouptest.experiments.trials import SupportMode, TrialConfig, run_trials
from grouptest.matrix_io import format_outcome, parse_outcome, read_matrix
from grouptest.model import ContactMatrix, SupportSet
from grouptest.utils.payloads import to_payload


logger = logging.getLogger(__name__)

StrategyName = Literal["per-instance", "universal"]


class MatrixSource(BaseModel):
    matrix_file: Optional[str] = Field(
        None, description="Matrix file name located in the data directory"
    )
    columns: Optional[List[List[int]]] = Field(
        None, description="Inline matrix as 0-based row supports, one list per column"
    )
    rows: Optional[int] = Field(None, ge=1, description="Number of rows for an inline matrix")


class DesignRequest(BaseModel):
    n: int = Field(..., ge=2, description="Population size N")
    k: int = Field(..., ge=1, description="Sparsity bound K")
    p: float = Field(..., gt=0, le=1, description="Activation probability")
    pf1: float = Field(0.001, gt=0, lt=1, description="Flip-overflow failure target")
    pf2: float = Field(0.001, gt=0, lt=1, description="Disjunctness failure target")
    strategy: StrategyName = Field("per-instance", description="Design strategy")
    alpha_min: Optional[float] = Field(None, gt=0, description="Smallest alpha; config.yaml default if omitted")
    alpha_max: Optional[float] = Field(None, gt=0, description="Largest alpha; config.yaml default if omitted")
    alpha_step: Optional[float] = Field(None, gt=0, description="Alpha grid step")
    delta_step: Optional[float] = Field(None, gt=0, description="Delta scan step")
    include_diagnostics: bool = Field(False, description="Return the per-alpha diagnostics")


class FailureSweepRequest(DesignRequest):
    targets: List[float] = Field(..., min_length=1, description="Failure targets, used for pf1 and pf2")


class SurfaceRequest(DesignRequest):
    p_values: List[float] = Field(..., min_length=1, description="Activation probabilities to sweep")


class DecodeRequest(MatrixSource):
    outcome: str = Field(..., description="Test outcome as a 0/1 string")
    e: float = Field(..., ge=0, description="Decoder threshold (floored)")
    k: Optional[int] = Field(None, ge=1, description="Sparsity bound for the oversize flag")


class SimulateRequest(MatrixSource):
    support: List[int] = Field(..., description="0-based defective indices")
    p: float = Field(..., gt=0, le=1, description="Activation probability")
    seed: int = Field(settings.seed, ge=0, description="Channel seed")
    include_sampling: bool = Field(False, description="Also return the sampling matrix columns")


class DisjunctRequest(MatrixSource):
    k: int = Field(..., ge=0, description="Subset size K")
    e: int = Field(..., ge=0, description="Error parameter e")
    force: bool = Field(False, description="Run even above the configured size guard")


class TrialsRequest(BaseModel):
    n: int = Field(..., ge=2, description="Population size N")
    k: int = Field(..., ge=1, description="Number of defectives K")
    p: float = Field(..., gt=0, le=1, description="Activation probability")
    m: int = Field(..., ge=1, description="Number of tests M")
    alpha: float = Field(..., gt=0, description="Density parameter (q = alpha / K)")
    e: float = Field(..., ge=0, description="Decoder threshold (floored)")
    trials: int = Field(settings.trials, ge=1, le=10_000, description="Number of trials")
    seed: int = Field(settings.seed, ge=0, description="Master seed")
    support_mode: Literal["fixed-support", "random-support"] = Field(
        "random-support", description="Reuse one support or draw one per trial"
    )
    fixed_matrix: bool = Field(False, description="Reuse one contact matrix for all trials")


app = FastAPI(title="Group Testing API", version="0.1.0")


@app.middleware("http")
async def add_runtime_header(request, call_next):
    start = time.perf_counter()
    response = await call_next(request)
    elapsed = time.perf_counter() - start
    response.headers["X-Runtime-Seconds"] = f"{elapsed:.2f}"
    return response


def _load_matrix(source: MatrixSource) -> ContactMatrix:
    if source.matrix_file:
        return read_matrix(settings.ensure_data_dir() / source.matrix_file)
    if source.columns is not None and source.rows:
        return ContactMatrix.from_columns(source.rows, source.columns)
    raise HTTPException(status_code=400, detail="Provide matrix_file, or rows and columns.")


def _spec(body: DesignRequest, **overrides) -> DesignSpec:
    values = dict(
        n=body.n,
        k=body.k,
        p=body.p,
        pf1=body.pf1,
        pf2=body.pf2,
        strategy=Strategy(body.strategy),
        alpha_min=body.alpha_min,
        alpha_max=body.alpha_max,
        alpha_step=body.alpha_step,
        delta_step=body.delta_step,
    )
    values.update(overrides)
    return DesignSpec(**values)


def _run(action, what: str):
    try:
        return action()
    except HTTPException:
        raise
    except FileNotFoundError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except Exception as exc:
        logger.exception("%s failed", what)
        raise HTTPException(status_code=500, detail=f"{what} failed: {exc}")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/files")
def list_files() -> dict:
    data_dir = settings.ensure_data_dir()
    matrix_files = sorted(p.name for p in data_dir.glob("*.txt"))
    csv_files = sorted(p.name for p in data_dir.glob("*.csv"))
    return to_payload({"data_dir": str(data_dir), "matrix_files": matrix_files, "csv_files": csv_files})


@app.post("/design")
def post_design(body: DesignRequest) -> dict:
    result = _run(lambda: design(_spec(body)), "Design")
    payload = to_payload(result)
    payload["threshold"] = result.threshold
    if not body.include_diagnostics:
        payload.pop("diagnostics", None)
    return payload


@app.post("/decode")
def post_decode(body: DecodeRequest) -> dict:
    def action():
        m = _load_matrix(body)
        return distance_decode(m, parse_outcome(body.outcome), body.e, k=body.k)

    result = _run(action, "Decode")
    return to_payload({
        "detected": result.detected,
        "deficits": result.deficits,
        "threshold": result.threshold,
        "oversize_flag": result.oversize_flag,
    })


@app.post("/simulate")
def post_simulate(body: SimulateRequest) -> dict:
    def action():
        m = _load_matrix(body)
        x = SupportSet.of(body.support, m.cols)
        cp = ChannelParams(p=body.p, seed=body.seed)
        payload = {"outcome": format_outcome(end_to_end_measure(m, x, cp))}
        if body.include_sampling:
            s = z_channel_sample(m, cp)
            payload["sampling_columns"] = [s.column_support(i) for i in range(s.cols)]
            payload["flip_counts"] = flip_counts(m, s)
        return payload

    return to_payload(_run(action, "Simulation"))


@app.post("/verify-disjunct")
def post_verify_disjunct(body: DisjunctRequest) -> dict:
    report = _run(lambda: is_disjunct(_load_matrix(body), body.k, body.e, force=body.force), "Disjunctness check")
    return to_payload(report)


@app.post("/trials")
def post_trials(body: TrialsRequest) -> dict:
    def action():
        cfg = TrialConfig(
            n=body.n,
            k=body.k,
            p=body.p,
            m=body.m,
            alpha=body.alpha,
            e=body.e,
            trials=body.trials,
            seed=body.seed,
            support_mode=SupportMode(body.support_mode),
            fixed_matrix=body.fixed_matrix,
        )
        return run_trials(cfg)

    report = _run(action, "Trial run")
    payload = to_payload(report)
    payload.update(to_payload({
        "success_rate": report.success_rate,
        "missed_items": report.missed_items,
        "extra_items": report.extra_items,
    }))
    return payload


@app.post("/sweeps/failure")
def post_failure_sweep(body: FailureSweepRequest) -> dict:
    frame = _run(lambda: sweep_tests_vs_failure(_spec(body), body.targets), "Failure sweep")
    return to_payload({"rows": frame})


@app.post("/sweeps/surface")
def post_surface(body: SurfaceRequest) -> dict:
    surface, minima = _run(lambda: sweep_design_surface(_spec(body), body.p_values), "Surface sweep")
    return to_payload({"surface": surface, "minima": minima})
