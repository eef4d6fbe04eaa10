"""Gaussian qumode states and their phase-space primitives.

Conventions used throughout the package: hbar = 1/2, so the vacuum variance
is 1/4 per quadrature, and an n-mode state is ordered (x1, p1, ..., xn, pn).
States and operations are immutable values; every function returns a new
object, which makes everything safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

VACUUM_VARIANCE = 0.25
SYMPLECTIC_TOL = 1e-10
HEISENBERG_SLACK = 1e-9
PINV_CUTOFF = 1e-12
PURITY_TOL = 1e-6

Quadrature = Literal["x", "p"]


class NonSymplecticError(ValueError):
    """Matrix does not preserve the symplectic form."""


class InvalidStateError(ValueError):
    """Mean/covariance pair is not a valid Gaussian quantum state."""


class OutOfWindowError(ValueError):
    """A scanned peak landed on the window boundary."""


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form for the interleaved (x1, p1, ...) ordering."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), block)


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Moduli of the eigenvalues of Omega @ cov, one per mode, ascending.

    A physical covariance has every value >= 1/4; pure states sit exactly
    at 1/4.
    """
    n = cov.shape[0] // 2
    if n == 0:
        return np.empty(0)
    eig = np.linalg.eigvals(omega(n) @ cov)
    return np.sort(np.abs(eig))[::2]


def _quad_index(mode: int, quadrature: Quadrature) -> int:
    if quadrature not in ("x", "p"):
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    return 2 * mode + (quadrature == "p")


@dataclass(frozen=True, eq=False)
class GaussianState:
    """First and second quadrature moments of an n-mode Gaussian state.

    The covariance is re-symmetrized on construction and the state is
    rejected if any symplectic eigenvalue falls below 1/4 (up to slack),
    so numerical drift cannot accumulate into an unphysical state.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size % 2:
            raise InvalidStateError(f"mean must have even length, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise InvalidStateError(
                f"covariance shape {cov.shape} does not match mean length {mean.size}"
            )
        if mean.size:
            scale = max(1.0, float(np.abs(cov).max()))
            asym = float(np.abs(cov - cov.T).max())
            if asym > SYMPLECTIC_TOL * scale:
                raise InvalidStateError(f"covariance is not symmetric (|A - A.T| = {asym:g})")
            cov = 0.5 * (cov + cov.T)
            nu_min = float(symplectic_eigenvalues(cov).min())
            # the eigenproblem loses ~eps * |cov|^2 absolute accuracy for
            # strongly squeezed covariances, so the slack must scale with it
            slack = max(HEISENBERG_SLACK, 16.0 * np.finfo(float).eps * scale**2)
            if nu_min < VACUUM_VARIANCE - slack:
                raise InvalidStateError(
                    f"uncertainty principle violated: min symplectic eigenvalue {nu_min:.12g}"
                )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def reduced(self, mode: int) -> "GaussianState":
        """Single-mode marginal obtained by discarding all other modes."""
        if not 0 <= mode < self.n_modes:
            raise ValueError(f"mode {mode} out of range for {self.n_modes}-mode state")
        idx = [2 * mode, 2 * mode + 1]
        return GaussianState(self.mean[idx], self.cov[np.ix_(idx, idx)])

    def quad_mean(self, mode: int, quadrature: Quadrature) -> float:
        return float(self.mean[_quad_index(mode, quadrature)])

    def quad_var(self, mode: int, quadrature: Quadrature) -> float:
        i = _quad_index(mode, quadrature)
        return float(self.cov[i, i])

    def is_pure(self, tol: float = PURITY_TOL) -> bool:
        nu = symplectic_eigenvalues(self.cov)
        return bool(nu.size == 0 or np.abs(nu - VACUUM_VARIANCE).max() <= tol)


def states_close(a: GaussianState, b: GaussianState, tol: float = 1e-9) -> bool:
    """True when both moments agree within an absolute tolerance."""
    return (
        a.n_modes == b.n_modes
        and np.abs(a.mean - b.mean).max(initial=0.0) <= tol
        and np.abs(a.cov - b.cov).max(initial=0.0) <= tol
    )


def vacuum(n_modes: int) -> GaussianState:
    """n-mode vacuum: zero mean, covariance (1/4) * identity."""
    if n_modes < 1:
        raise ValueError("need at least one mode")
    return GaussianState(np.zeros(2 * n_modes), VACUUM_VARIANCE * np.eye(2 * n_modes))


def coherent(mean_x: float, mean_p: float) -> GaussianState:
    """Single-mode coherent state: displaced vacuum."""
    return GaussianState(np.array([mean_x, mean_p]), VACUUM_VARIANCE * np.eye(2))


def squeezed_vacuum(r: float, axis: Quadrature = "x") -> GaussianState:
    """Single-mode squeezed vacuum with the chosen quadrature at e^{-2r}/4."""
    return apply(vacuum(1), squeeze_op(1, 0, r, axis))


def tensor(*states: GaussianState) -> GaussianState:
    """Product state: direct sum of means and covariances."""
    mean = np.concatenate([s.mean for s in states])
    dims = [2 * s.n_modes for s in states]
    cov = np.zeros((sum(dims), sum(dims)))
    at = 0
    for s, d in zip(states, dims):
        cov[at : at + d, at : at + d] = s.cov
        at += d
    return GaussianState(mean, cov)


@dataclass(frozen=True, eq=False)
class SymplecticOp:
    """Linear phase-space map: state -> (matrix @ mean + shift, matrix @ cov @ matrix.T)."""

    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        shift = np.array(self.shift, dtype=float).reshape(-1)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
            raise NonSymplecticError(f"matrix must be square with even size, got {matrix.shape}")
        if shift.size != matrix.shape[0]:
            raise NonSymplecticError("shift length does not match matrix size")
        omg = omega(matrix.shape[0] // 2)
        err = float(np.abs(matrix @ omg @ matrix.T - omg).max())
        # allow the fp floor for large-entry matrices (strong squeezing)
        bound = max(SYMPLECTIC_TOL, 32 * np.finfo(float).eps * (1.0 + np.abs(matrix).max()) ** 2)
        if err > bound:
            raise NonSymplecticError(f"S Omega S^T deviates from Omega by {err:g}")
        matrix.setflags(write=False)
        shift.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "shift", shift)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def identity(cls, n_modes: int) -> "SymplecticOp":
        return cls(np.eye(2 * n_modes), np.zeros(2 * n_modes))

    def inverse(self) -> "SymplecticOp":
        omg = omega(self.n_modes)
        inv = -omg @ self.matrix.T @ omg
        return SymplecticOp(inv, -inv @ self.shift)


def apply(state: GaussianState, op: SymplecticOp) -> GaussianState:
    """Evolve a state through a Gaussian gate."""
    if state.n_modes != op.n_modes:
        raise ValueError(f"state has {state.n_modes} modes but op expects {op.n_modes}")
    return GaussianState(op.matrix @ state.mean + op.shift, op.matrix @ state.cov @ op.matrix.T)


def _embed(n_modes: int, block: np.ndarray, modes: Sequence[int]) -> np.ndarray:
    for m in modes:
        if not 0 <= m < n_modes:
            raise ValueError(f"mode {m} out of range for {n_modes} modes")
    if len(set(modes)) != len(modes):
        raise ValueError("modes must be distinct")
    full = np.eye(2 * n_modes)
    idx = [i for m in modes for i in (2 * m, 2 * m + 1)]
    full[np.ix_(idx, idx)] = block
    return full


def squeeze_op(n_modes: int, mode: int, r: float, axis: Quadrature = "x") -> SymplecticOp:
    """Single-mode squeezer: the chosen quadrature variance scales by e^{-2r}.

    axis = 'x' maps variances (Vx, Vp) -> (e^{-2r} Vx, e^{2r} Vp); axis = 'p'
    swaps the roles.
    """
    if not math.isfinite(r):
        raise ValueError("squeezing parameter must be finite")
    if axis not in ("x", "p"):
        raise ValueError(f"axis must be 'x' or 'p', got {axis!r}")
    down, up = math.exp(-r), math.exp(r)
    block = np.diag([down, up] if axis == "x" else [up, down])
    return SymplecticOp(_embed(n_modes, block, [mode]), np.zeros(2 * n_modes))


def rotation_op(n_modes: int, mode: int, theta: float) -> SymplecticOp:
    """Phase-space rotation (x, p) -> (x cos t + p sin t, -x sin t + p cos t)."""
    c, s = math.cos(theta), math.sin(theta)
    block = np.array([[c, s], [-s, c]])
    return SymplecticOp(_embed(n_modes, block, [mode]), np.zeros(2 * n_modes))


def beam_splitter_op(
    n_modes: int, mode_a: int, mode_b: int, transmissivity: float = 0.5
) -> SymplecticOp:
    """Beam splitter mixing two modes.

    Acts identically on the x and p blocks with the rotation
    (sqrt(t), sqrt(1-t); -sqrt(1-t), sqrt(t)); t = 1/2 is the balanced case.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {transmissivity}")
    c = math.sqrt(transmissivity)
    s = math.sqrt(1.0 - transmissivity)
    mix = np.array([[c, s], [-s, c]])
    block = np.kron(mix, np.eye(2))
    return SymplecticOp(_embed(n_modes, block, [mode_a, mode_b]), np.zeros(2 * n_modes))


def two_mode_squeeze_op(n_modes: int, mode_a: int, mode_b: int, r: float) -> SymplecticOp:
    """Two-mode squeezer (parametric amplifier) correlating x and anti-correlating p."""
    if not math.isfinite(r):
        raise ValueError("squeezing parameter must be finite")
    ch, sh = math.cosh(r), math.sinh(r)
    block = np.array(
        [
            [ch, 0.0, sh, 0.0],
            [0.0, ch, 0.0, -sh],
            [sh, 0.0, ch, 0.0],
            [0.0, -sh, 0.0, ch],
        ]
    )
    return SymplecticOp(_embed(n_modes, block, [mode_a, mode_b]), np.zeros(2 * n_modes))


def qnd_op(n_modes: int, mode_1: int, mode_2: int, gain: float) -> SymplecticOp:
    """QND position coupling with gain G.

    x1' = x1, x2' = x2 + G x1, p1' = p1 - G p2, p2' = p2; symplectic for
    any G.
    """
    if not math.isfinite(gain):
        raise ValueError("gain must be finite")
    block = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, -gain],
            [gain, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return SymplecticOp(_embed(n_modes, block, [mode_1, mode_2]), np.zeros(2 * n_modes))


def displace_x(state: GaussianState, mode: int, s: float) -> GaussianState:
    """Shift the x mean of one mode by s; covariance untouched."""
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range")
    mean = state.mean.copy()
    mean[2 * mode] += s
    return GaussianState(mean, state.cov)


def displace_p(state: GaussianState, mode: int, p0: float) -> GaussianState:
    """Shift the p mean of one mode by p0; covariance untouched."""
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range")
    mean = state.mean.copy()
    mean[2 * mode + 1] += p0
    return GaussianState(mean, state.cov)


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome of a single homodyne detection.

    density is the Gaussian marginal density of the outcome; warning is set
    when a forced outcome lands far outside a (near-)deterministic
    quadrature, i.e. the post-selection has vanishing probability density.
    """

    mode: int
    quadrature: Quadrature
    outcome: float
    density: float
    warning: bool = False


def homodyne(
    state: GaussianState,
    mode: int,
    quadrature: Quadrature = "x",
    forced_outcome: float | None = None,
    seed=None,
) -> tuple[GaussianState, MeasurementRecord]:
    """Measure one quadrature of one mode and remove that mode.

    Without forced_outcome the result is drawn from the Gaussian marginal
    (seeded and reproducible; seed may be an int or a numpy Generator).
    Either way the remaining modes are conditioned on the outcome through
    the Schur complement of the measured quadrature, with a pseudo-inverse
    cutoff for (near-)deterministic quadratures.
    """
    if state.n_modes < 1:
        raise ValueError("state has no modes to measure")
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range")
    i = _quad_index(mode, quadrature)
    mu = float(state.mean[i])
    var = float(state.cov[i, i])
    if forced_outcome is None:
        rng = np.random.default_rng(seed)
        outcome = float(rng.normal(mu, math.sqrt(max(var, 0.0))))
    else:
        outcome = float(forced_outcome)
    safe_var = max(var, PINV_CUTOFF)
    density = math.exp(-0.5 * (outcome - mu) ** 2 / safe_var) / math.sqrt(2 * math.pi * safe_var)
    warning = var < PINV_CUTOFF and abs(outcome - mu) > 6.0 * math.sqrt(safe_var)

    keep = [j for j in range(2 * state.n_modes) if j not in (2 * mode, 2 * mode + 1)]
    weight = 0.0 if var < PINV_CUTOFF else 1.0 / var
    cross = state.cov[keep, i]
    new_mean = state.mean[keep] + cross * (weight * (outcome - mu))
    new_cov = state.cov[np.ix_(keep, keep)] - np.outer(cross, cross) * weight
    record = MeasurementRecord(mode, quadrature, outcome, density, warning)
    return GaussianState(new_mean, new_cov), record


def joint_quadrature_moments(
    state: GaussianState, quads: Sequence[tuple[int, Quadrature]]
) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance of a list of (mode, quadrature) observables."""
    idx = [_quad_index(m, q) for m, q in quads]
    return state.mean[idx].copy(), state.cov[np.ix_(idx, idx)].copy()


def sample_quadratures(
    state: GaussianState,
    quads: Sequence[tuple[int, Quadrature]],
    shots: int,
    seed=None,
) -> np.ndarray:
    """Draw joint homodyne outcomes for several quadratures, shape (shots, k).

    Sampling the joint marginal is equivalent in law to measuring the
    quadratures one after another with conditional updates in between.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    mean, cov = joint_quadrature_moments(state, quads)
    rng = np.random.default_rng(seed)
    return rng.multivariate_normal(mean, cov, size=shots, method="svd")


def fidelity_pure(state_in: GaussianState, state_out: GaussianState) -> float:
    """Overlap of a pure single-mode state with an arbitrary single-mode state.

    F = exp(-d^T (S_in + S_out)^{-1} d / 2) / (2 sqrt(det(S_in + S_out)));
    the prefactor makes identical pure states give exactly 1 in the
    hbar = 1/2 convention.
    """
    for name, st in (("input", state_in), ("output", state_out)):
        if st.n_modes != 1:
            raise ValueError(f"{name} state must be single-mode")
    if not state_in.is_pure():
        raise ValueError("input state must be pure (all symplectic eigenvalues 1/4)")
    total = state_in.cov + state_out.cov
    delta = state_out.mean - state_in.mean
    expo = -0.5 * float(delta @ np.linalg.solve(total, delta))
    value = math.exp(expo) / (2.0 * math.sqrt(float(np.linalg.det(total))))
    return float(min(max(value, 0.0), 1.0))


def wigner(state: GaussianState, mode: int, points) -> np.ndarray:
    """Gaussian Wigner density of one reduced mode at an array of (x, p) points.

    W(x, p) = exp(-d^T S^{-1} d / 2) / (2 pi sqrt(det S)), normalized so the
    full phase-space integral is 1.
    """
    red = state.reduced(mode)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 2:
        raise ValueError("points must be (x, p) pairs")
    det = float(np.linalg.det(red.cov))
    if det <= 0.0:
        raise InvalidStateError("singular reduced covariance")
    inv = np.linalg.inv(red.cov)
    d = pts - red.mean
    expo = -0.5 * np.einsum("ki,ij,kj->k", d, inv, d)
    return np.exp(expo) / (2.0 * math.pi * math.sqrt(det))


def peak_x(
    state: GaussianState, mode: int, window: tuple[float, float], resolution: float
) -> float:
    """Location of the x-marginal maximum, scanned over a discretized window.

    For Gaussian states the peak equals the x mean; the scan emulates a
    tomographic readout. A peak on the window boundary signals that the
    state sits outside the window and raises OutOfWindowError.
    """
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError("window must be a nonempty (lo, hi) interval")
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    steps = int(math.floor((hi - lo) / resolution + 1e-9))
    if steps < 2:
        raise ValueError("window spans fewer than two resolution steps")
    xs = lo + resolution * np.arange(steps + 1)
    red = state.reduced(mode)
    mu, var = red.mean[0], red.cov[0, 0]
    # argmax over the log density: immune to exp underflow at strong squeezing
    log_density = -0.5 * (xs - mu) ** 2 / var
    k = int(np.argmax(log_density))
    if k in (0, steps):
        raise OutOfWindowError(
            f"x-marginal peak at window boundary {xs[k]:g}; encoding range too small"
        )
    return float(xs[k])
