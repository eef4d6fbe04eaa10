"""Request/response models for the experiment service (and the CLI client)."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class FidelityRequest(BaseModel):
    r_min: float = Field(0.0, ge=0.0)
    r_max: float = Field(2.0, ge=0.0)
    steps: int = Field(9, ge=1)
    gain: float = 1.0
    shots: int = Field(200, ge=1)
    mean_x: float = 1.0
    mean_p: float = 0.0
    seed: int = 0

    @model_validator(mode="after")
    def _range_ok(self):
        if self.r_max < self.r_min:
            raise ValueError("empty sweep range: r_max < r_min")
        return self


class FidelityRow(BaseModel):
    r: float
    f_analytic: float
    f_shot_estimate: float
    stderr: float


class FidelityResponse(BaseModel):
    rows: list[FidelityRow]
    config: FidelityRequest
    version: str


class PostselectRequest(BaseModel):
    r: float = Field(..., ge=0.0)
    mean_x: float = 0.0
    mean_p: float = 0.0


class PostselectResponse(BaseModel):
    output_mean: list[float]
    output_cov: list[list[float]]
    fidelity: float
    joint_density: float
    low_fidelity: bool
    config: PostselectRequest
    version: str


class IntervalSchemeModel(BaseModel):
    x0: float
    L: float
    n: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _segment_ok(self):
        if not self.L > self.x0:
            raise ValueError("segment end L must exceed start x0")
        return self


class TransitionTableModel(BaseModel):
    n: int = Field(..., ge=1)
    pairs: list[tuple[int, int]]
    halting: list[int]


class RunRequest(BaseModel):
    mode: Literal["loop", "qnd"]
    scheme: IntervalSchemeModel
    table: TransitionTableModel
    word: str
    r: float = Field(..., ge=0.0)
    gain: float = 1.0
    shots: int = Field(1000, ge=1)
    seed: int = 0
    max_iter: Optional[int] = Field(None, ge=1)
    displace_alice: bool = False
    resolution: Optional[float] = Field(None, gt=0.0)


class QndReadoutModel(BaseModel):
    x_sq_out1: float
    x_sq_out2: float
    delta: float
    inferred_length: float


class LoopDetailsModel(BaseModel):
    joint_density: float
    displaced_alice: bool
    bob_x_peak: Optional[float]
    bob_p_mean: float
    readout_resolution: float


class QndShotDataModel(BaseModel):
    shots: int
    success_count: int
    failed_shots: int
    success_rate: float
    mean_delta: float
    var_delta: float
    mean_inferred_length: float
    decoded_counts: list[tuple[int, int]]
    sample_readouts: list[QndReadoutModel]


class RunReportModel(BaseModel):
    scheme: Literal["loop", "qnd"]
    intervals: IntervalSchemeModel
    initial_index: int
    final_index: int
    iterations: int
    trajectory: list[int]
    decoded_index: Optional[int]
    consistent: bool
    r: float
    gain: Optional[float]
    shots: Optional[int]
    seed: Optional[int]
    surrogate_note: Optional[str]
    warning: Optional[str]
    loop: Optional[LoopDetailsModel] = None
    qnd: Optional[QndShotDataModel] = None


class RunResponse(BaseModel):
    status: Literal["consistent", "inconsistent", "non-halting"]
    report: Optional[RunReportModel]
    trajectory: Optional[list[int]] = None
    config: RunRequest
    version: str


class WignerRequest(BaseModel):
    state: str = "vacuum"
    x_min: float = -4.0
    x_max: float = 4.0
    p_min: float = -4.0
    p_max: float = 4.0
    resolution: float = Field(0.1, gt=0.0)

    @model_validator(mode="after")
    def _window_ok(self):
        if not (self.x_max > self.x_min and self.p_max > self.p_min):
            raise ValueError("window must satisfy x_max > x_min and p_max > p_min")
        return self


class WignerResponse(BaseModel):
    xs: list[float]
    ps: list[float]
    values: list[list[float]]  # values[i][j] = W(xs[i], ps[j])
    grid_mass: float  # sum * dx * dp, should be ~1 for a covering window
    config: WignerRequest
    version: str


class HealthResponse(BaseModel):
    name: str
    version: str
