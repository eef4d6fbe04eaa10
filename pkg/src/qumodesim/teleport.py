"""EPR sources and continuous-variable teleportation circuits.

The standard circuit mixes the input with Alice's EPR arm on a balanced
beam splitter, measures x on the difference arm and p on the sum arm, and
displaces Bob's arm by sqrt(2) * gain * outcome. The post-selected variant
forces both outcomes to zero by Gaussian conditioning and applies no
displacement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    GaussianState,
    MeasurementRecord,
    apply,
    beam_splitter_op,
    displace_p,
    displace_x,
    fidelity_pure,
    homodyne,
    joint_quadrature_moments,
    rotation_op,
    sample_quadratures,
    squeeze_op,
    tensor,
    two_mode_squeeze_op,
    vacuum,
)


@dataclass(frozen=True)
class TeleportConfig:
    """Squeezing, classical gains, and the optional forced outcomes."""

    r: float
    g_x: float = 1.0
    g_p: float = 1.0
    postselect: bool = False
    forced_x_u: float = 0.0
    forced_p_v: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0.0):
            raise ValueError(f"squeezing r must be finite and >= 0, got {self.r}")
        if not (math.isfinite(self.g_x) and math.isfinite(self.g_p)):
            raise ValueError("gains must be finite")


@dataclass(frozen=True)
class TeleportResult:
    """Bob's output mode plus the two measurement records that produced it."""

    output: GaussianState
    records: tuple[MeasurementRecord, MeasurementRecord]
    joint_density: float
    config: TeleportConfig
    seed: int | None = None


def make_epr(r: float) -> GaussianState:
    """Two-mode EPR state from a p-squeezed and an x-squeezed vacuum.

    Var(x_A - x_B) = Var(p_A + p_B) = 2 e^{-2r} / 4 for every r >= 0.
    """
    if r < 0.0:
        raise ValueError("squeezing r must be >= 0")
    state = apply(vacuum(2), squeeze_op(2, 0, r, "p"))
    state = apply(state, squeeze_op(2, 1, r, "x"))
    return apply(state, beam_splitter_op(2, 1, 0, 0.5))


def identical_squeezed_pair(r: float) -> GaussianState:
    """Two independent modes with identical x-squeezed covariances.

    A two-mode squeezer feeding a balanced beam splitter leaves the arms
    squeezed along orthogonal axes; rotating one arm's quadrature frame by
    90 degrees (a local-oscillator phase choice) aligns them, giving each
    mode variance e^{-2r}/4 in x and e^{+2r}/4 in p with no correlations.
    """
    if r < 0.0:
        raise ValueError("squeezing r must be >= 0")
    state = apply(vacuum(2), two_mode_squeeze_op(2, 0, 1, r))
    state = apply(state, beam_splitter_op(2, 0, 1, 0.5))
    return apply(state, rotation_op(2, 0, math.pi / 2))


def _run_circuit(
    input_state: GaussianState,
    cfg: TeleportConfig,
    seed=None,
    alice_shift_x: float = 0.0,
    alice_shift_p: float = 0.0,
) -> TeleportResult:
    if input_state.n_modes != 1:
        raise ValueError("input must be a single-mode state")
    joint = tensor(input_state, make_epr(cfg.r))  # modes: 0 input, 1 Alice, 2 Bob
    if alice_shift_x:
        joint = displace_x(joint, 1, alice_shift_x)
    if alice_shift_p:
        joint = displace_p(joint, 1, alice_shift_p)
    # difference arm lands on mode 0: x_u = (x_in - x_A)/sqrt(2)
    joint = apply(joint, beam_splitter_op(3, 1, 0, 0.5))

    rng = np.random.default_rng(seed)
    forced_u = cfg.forced_x_u if cfg.postselect else None
    forced_v = cfg.forced_p_v if cfg.postselect else None
    state, rec_u = homodyne(joint, 0, "x", forced_outcome=forced_u, seed=rng)
    state, rec_v = homodyne(state, 0, "p", forced_outcome=forced_v, seed=rng)

    bob = displace_x(state, 0, math.sqrt(2.0) * cfg.g_x * rec_u.outcome)
    bob = displace_p(bob, 0, math.sqrt(2.0) * cfg.g_p * rec_v.outcome)
    return TeleportResult(
        output=bob,
        records=(rec_u, rec_v),
        joint_density=rec_u.density * rec_v.density,
        config=cfg,
        seed=seed if isinstance(seed, int) else None,
    )


def teleport(input_state: GaussianState, cfg: TeleportConfig, seed=None) -> TeleportResult:
    """One shot of the teleportation circuit.

    Samples both homodyne outcomes (seeded) unless cfg.postselect forces
    them, then applies the gain-weighted displacement to Bob's arm.
    """
    return _run_circuit(input_state, cfg, seed=seed)


def teleport_postselected(
    input_state: GaussianState,
    r: float,
    alice_shift_x: float = 0.0,
    alice_shift_p: float = 0.0,
) -> TeleportResult:
    """Conditional teleportation with x_u = p_v = 0 and no displacement.

    joint_density records how atypical the double post-selection was.
    The optional Alice shifts pre-displace her EPR arm, which keeps the
    forced outcomes typical when the input mode itself is displaced.
    """
    cfg = TeleportConfig(r=r, g_x=0.0, g_p=0.0, postselect=True)
    return _run_circuit(
        input_state, cfg, alice_shift_x=alice_shift_x, alice_shift_p=alice_shift_p
    )


def _output_transfer(cfg: TeleportConfig) -> np.ndarray:
    # x_out = g_x x_in - g_x x_A + x_B ; p_out = g_p p_in + g_p p_A + p_B
    return np.array(
        [
            [cfg.g_x, 0.0, -cfg.g_x, 0.0, 1.0, 0.0],
            [0.0, cfg.g_p, 0.0, cfg.g_p, 0.0, 1.0],
        ]
    )


def teleport_expected(input_state: GaussianState, cfg: TeleportConfig) -> GaussianState:
    """Unconditional (ensemble-averaged) output state, no sampling.

    Uses the exact linear relation between output and input/EPR
    quadratures, so at unit gain the mean is preserved and the covariance
    gains 2 e^{-2r}/4 per quadrature.
    """
    if input_state.n_modes != 1:
        raise ValueError("input must be a single-mode state")
    joint = tensor(input_state, make_epr(cfg.r))
    t = _output_transfer(cfg)
    return GaussianState(t @ joint.mean, t @ joint.cov @ t.T)


def teleport_sampled_means(
    input_state: GaussianState, cfg: TeleportConfig, shots: int, seed=None
) -> tuple[np.ndarray, np.ndarray]:
    """Per-shot output means plus the shared conditional covariance.

    Returns (means, cov) with means of shape (shots, 2). The conditional
    covariance of Bob's mode is outcome-independent; only the mean moves
    from shot to shot. Sampling the joint (x_u, p_v) marginal is equivalent
    in law to running the two homodynes sequentially.
    """
    if input_state.n_modes != 1:
        raise ValueError("input must be a single-mode state")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    joint = tensor(input_state, make_epr(cfg.r))
    joint = apply(joint, beam_splitter_op(3, 1, 0, 0.5))

    meas = [(0, "x"), (1, "p")]
    mu_uv, k_uv = joint_quadrature_moments(joint, meas)
    bob_idx = [4, 5]
    uv_idx = [0, 3]
    cross = joint.cov[np.ix_(bob_idx, uv_idx)]
    gain_mat = cross @ np.linalg.inv(k_uv)
    cond_cov = joint.cov[np.ix_(bob_idx, bob_idx)] - gain_mat @ cross.T

    outcomes = sample_quadratures(joint, meas, shots, seed=seed)
    displacement = math.sqrt(2.0) * outcomes * np.array([cfg.g_x, cfg.g_p])
    means = joint.mean[bob_idx] + (outcomes - mu_uv) @ gain_mat.T + displacement
    return means, 0.5 * (cond_cov + cond_cov.T)


def fidelity_sweep(
    r_values, gain: float, input_state: GaussianState
) -> list[tuple[float, float]]:
    """Deterministic (r, fidelity) table for the expectation-level output."""
    r_values = list(r_values)
    if not r_values:
        raise ValueError("r_values must be nonempty")
    out = []
    for r in r_values:
        cfg = TeleportConfig(r=float(r), g_x=gain, g_p=gain)
        out.append((float(r), fidelity_pure(input_state, teleport_expected(input_state, cfg))))
    return out
