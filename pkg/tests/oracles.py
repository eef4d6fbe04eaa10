"""Independent numerical oracles used to freeze expected values.

Everything here deliberately avoids the production code paths it checks:
overlaps come from grid quadrature of Wigner functions, and variances from
hand-rolled linear propagation of covariance blocks.
"""

from __future__ import annotations

import math

import numpy as np

from qumodesim.gaussian import GaussianState, wigner


def wigner_overlap(a: GaussianState, b: GaussianState, points: int = 501) -> float:
    """Overlap Tr[rho_a rho_b] = 2*pi*hbar * integral(W_a W_b), hbar = 1/2.

    Grid quadrature over +-8 standard deviations around both states.
    """
    spread = 8.0 * math.sqrt(max(a.cov.max(), b.cov.max(), 0.25))
    los = np.minimum(a.mean, b.mean) - spread
    his = np.maximum(a.mean, b.mean) + spread
    xs = np.linspace(los[0], his[0], points)
    ps = np.linspace(los[1], his[1], points)
    gx, gp = np.meshgrid(xs, ps, indexing="ij")
    grid = np.column_stack([gx.ravel(), gp.ravel()])
    wa = wigner(a, 0, grid).reshape(points, points)
    wb = wigner(b, 0, grid).reshape(points, points)
    dx = xs[1] - xs[0]
    dp = ps[1] - ps[0]
    return float(np.pi * np.trapezoid(np.trapezoid(wa * wb, dx=dp, axis=1), dx=dx))


def propagate_cov(matrix: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Brute-force S @ cov @ S.T written out elementwise."""
    n = matrix.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                for l in range(n):
                    acc += matrix[i, k] * cov[k, l] * matrix[j, l]
            out[i, j] = acc
    return out


def linear_combination_variance(cov: np.ndarray, weights: np.ndarray) -> float:
    """Var(sum_i w_i q_i) accumulated term by term."""
    acc = 0.0
    for i, wi in enumerate(weights):
        for j, wj in enumerate(weights):
            acc += wi * wj * cov[i, j]
    return acc


def qnd_delta_variance(r: float, gain: float) -> float:
    """Var(x_sq_out1 - x_sq_out2) for the four-mode readout circuit.

    Hand propagation of Eq.-style updates: four independent x-squeezed
    modes (variance e^{-2r}/4 each), ancilla 2 reads mode 0 and ancilla 3
    reads mode 1 with gain G, then the two ancilla positions are
    differenced.
    """
    sq = math.exp(-2.0 * r) / 4.0
    cov = np.diag([sq] * 4)  # x variances of modes 0..3; p plays no role
    # after the couplings: x2' = x2 + G x0, x3' = x3 + G x1
    m = np.eye(4)
    m[2, 0] = gain
    m[3, 1] = gain
    out = propagate_cov(m, cov)
    return linear_combination_variance(out[2:, 2:], np.array([1.0, -1.0]))


def normal_tail(z: float) -> float:
    """Q(z) = P(N(0,1) > z)."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def random_pure_state(rng: np.random.Generator, max_r: float = 1.5) -> GaussianState:
    """Rotated, squeezed, displaced vacuum (pure by construction)."""
    from qumodesim.gaussian import apply, rotation_op, squeeze_op, vacuum

    state = apply(vacuum(1), rotation_op(1, 0, rng.uniform(0, 2 * math.pi)))
    state = apply(state, squeeze_op(1, 0, rng.uniform(0, max_r)))
    state = apply(state, rotation_op(1, 0, rng.uniform(0, 2 * math.pi)))
    return GaussianState(state.mean + rng.uniform(-2, 2, 2), state.cov)


def random_mixed_state(rng: np.random.Generator, max_r: float = 1.5) -> GaussianState:
    """Pure state plus isotropic classical noise (valid, generally mixed)."""
    pure = random_pure_state(rng, max_r)
    return GaussianState(pure.mean, pure.cov + rng.uniform(0.0, 0.5) * np.eye(2))
