"""Experiment handlers: pure functions from request models to response models.

The FastAPI routes and the CLI both call these, so a command line run and a
service call with the same payload produce identical results.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .. import __version__
from ..encoding import IntervalScheme
from ..gaussian import GaussianState, coherent, fidelity_pure, squeezed_vacuum, wigner
from ..pctc import NonHaltingError, PctcRunReport, TransitionTable, run_loop_scheme, run_qnd_scheme
from ..teleport import (
    TeleportConfig,
    teleport_expected,
    teleport_postselected,
    teleport_sampled_means,
)
from . import schemas

LOW_FIDELITY_BOUND = 0.9


def run_fidelity_sweep(req: schemas.FidelityRequest) -> schemas.FidelityResponse:
    """Analytic fidelity per r plus an unbiased shot-level estimate."""
    input_state = coherent(req.mean_x, req.mean_p)
    rs = np.linspace(req.r_min, req.r_max, req.steps)
    rows = []
    for i, r in enumerate(rs):
        cfg = TeleportConfig(r=float(r), g_x=req.gain, g_p=req.gain)
        analytic = fidelity_pure(input_state, teleport_expected(input_state, cfg))
        means, cond_cov = teleport_sampled_means(
            input_state, cfg, req.shots, seed=req.seed + i
        )
        total = input_state.cov + cond_cov
        inv = np.linalg.inv(total)
        norm = 1.0 / (2.0 * math.sqrt(float(np.linalg.det(total))))
        d = means - input_state.mean
        per_shot = norm * np.exp(-0.5 * np.einsum("ki,ij,kj->k", d, inv, d))
        stderr = float(per_shot.std(ddof=1) / math.sqrt(req.shots)) if req.shots > 1 else 0.0
        rows.append(
            schemas.FidelityRow(
                r=float(r),
                f_analytic=analytic,
                f_shot_estimate=float(per_shot.mean()),
                stderr=stderr,
            )
        )
    return schemas.FidelityResponse(rows=rows, config=req, version=__version__)


def run_postselect(req: schemas.PostselectRequest) -> schemas.PostselectResponse:
    input_state = coherent(req.mean_x, req.mean_p)
    result = teleport_postselected(input_state, req.r)
    fid = fidelity_pure(input_state, result.output)
    return schemas.PostselectResponse(
        output_mean=[float(v) for v in result.output.mean],
        output_cov=[[float(v) for v in row] for row in result.output.cov],
        fidelity=fid,
        joint_density=result.joint_density,
        low_fidelity=fid < LOW_FIDELITY_BOUND,
        config=req,
        version=__version__,
    )


def _report_model(report: PctcRunReport) -> schemas.RunReportModel:
    return schemas.RunReportModel.model_validate(dataclasses.asdict(report))


def run_experiment(req: schemas.RunRequest) -> schemas.RunResponse:
    """Loop or QND end-to-end run; non-halting is a result, not an error."""
    scheme = IntervalScheme(req.scheme.x0, req.scheme.L, req.scheme.n)
    table = TransitionTable.from_pairs(req.table.n, req.table.pairs, req.table.halting)
    try:
        if req.mode == "loop":
            report = run_loop_scheme(
                scheme,
                table,
                req.word,
                r=req.r,
                max_iter=req.max_iter,
                seed=req.seed,
                displace_alice=req.displace_alice,
                resolution=req.resolution,
            )
        else:
            report = run_qnd_scheme(
                scheme,
                table,
                req.word,
                r=req.r,
                gain=req.gain,
                shots=req.shots,
                seed=req.seed,
                max_iter=req.max_iter,
            )
    except NonHaltingError as exc:
        return schemas.RunResponse(
            status="non-halting",
            report=None,
            trajectory=list(exc.trajectory),
            config=req,
            version=__version__,
        )
    return schemas.RunResponse(
        status="consistent" if report.consistent else "inconsistent",
        report=_report_model(report),
        config=req,
        version=__version__,
    )


def _parse_floats(parts: list[str], n_min: int, n_max: int, spec: str) -> list[float]:
    if not n_min <= len(parts) <= n_max:
        raise ValueError(f"bad state spec {spec!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ValueError(f"bad number in state spec {spec!r}") from exc


def build_state(spec: str) -> GaussianState:
    """Parse a single-mode state description.

    Formats: "vacuum", "coherent:X,P", "squeezed:R[,axis[,X,P]]",
    "teleported:R,X,P" (unit-gain expected output for a coherent input),
    "postselected:R,X,P" (Bob's conditioned mode for a coherent input).
    """
    name, _, rest = spec.partition(":")
    parts = [p.strip() for p in rest.split(",")] if rest else []
    name = name.strip().lower()
    if name == "vacuum":
        if parts:
            raise ValueError("vacuum takes no parameters")
        return coherent(0.0, 0.0)
    if name == "coherent":
        x, p = _parse_floats(parts, 2, 2, spec)
        return coherent(x, p)
    if name == "squeezed":
        axis = "x"
        if len(parts) >= 2:
            axis = parts[1].lower()
            if axis not in ("x", "p"):
                raise ValueError(f"squeeze axis must be x or p, got {parts[1]!r}")
        nums = _parse_floats([parts[0]] + parts[2:], 1, 3, spec)
        state = squeezed_vacuum(nums[0], axis)
        if len(nums) == 3:
            state = GaussianState(np.array([nums[1], nums[2]]), state.cov)
        elif len(nums) == 2:
            raise ValueError(f"state spec {spec!r} needs both X and P means")
        return state
    if name in ("teleported", "postselected"):
        r, x, p = _parse_floats(parts, 3, 3, spec)
        if r < 0:
            raise ValueError("squeezing r must be >= 0")
        if name == "teleported":
            return teleport_expected(coherent(x, p), TeleportConfig(r=r))
        return teleport_postselected(coherent(x, p), r).output
    raise ValueError(f"unknown state spec {spec!r}")


def run_wigner(req: schemas.WignerRequest) -> schemas.WignerResponse:
    state = build_state(req.state)
    # grid coordinates rounded to 12 decimals: keeps CSV rows clean and
    # avoids accumulation artifacts like 4.4e-16 instead of 0.0
    nx = int(math.floor((req.x_max - req.x_min) / req.resolution + 1e-9)) + 1
    np_count = int(math.floor((req.p_max - req.p_min) / req.resolution + 1e-9)) + 1
    xs = np.round(req.x_min + req.resolution * np.arange(nx), 12)
    ps = np.round(req.p_min + req.resolution * np.arange(np_count), 12)
    gx, gp = np.meshgrid(xs, ps, indexing="ij")
    points = np.column_stack([gx.ravel(), gp.ravel()])
    values = wigner(state, 0, points).reshape(len(xs), len(ps))
    mass = float(values.sum() * req.resolution**2)
    return schemas.WignerResponse(
        xs=[float(v) for v in xs],
        ps=[float(v) for v in ps],
        values=[[float(v) for v in row] for row in values],
        grid_mass=mass,
        config=req,
        version=__version__,
    )
