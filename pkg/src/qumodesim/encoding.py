"""Interval encoding of classical words on a qumode position axis.

A segment [x0, L] is split into n intervals of width alpha; a word (bit
string or binary matrix) selects interval k and is written by an x
displacement to that interval's midpoint, giving a symmetric +-alpha/2
decode tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gaussian import GaussianState, displace_p, displace_x


class OutOfSegmentError(ValueError):
    """Measured position fell outside [x0, L): encoding overflow."""


@dataclass(frozen=True)
class IntervalScheme:
    x0: float
    L: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("interval count n must be >= 1")
        if not self.L > self.x0:
            raise ValueError(f"segment end {self.L} must exceed start {self.x0}")

    @property
    def alpha(self) -> float:
        return (self.L - self.x0) / self.n

    def midpoint(self, k: int) -> float:
        return self.x0 + (k + 0.5) * self.alpha


@dataclass(frozen=True)
class InputWord:
    """A bit string, or a binary matrix flattened row-major.

    A string and a matrix with the same flattened bits share the same
    index; the two alphabets deliberately coexist and collisions between
    them are possible.
    """

    rows: tuple[str, ...]
    is_matrix: bool

    def __post_init__(self):
        if not self.rows or any(not row for row in self.rows):
            raise ValueError("word must be nonempty")
        width = len(self.rows[0])
        for row in self.rows:
            if len(row) != width:
                raise ValueError("matrix rows must have uniform width")
            if set(row) - {"0", "1"}:
                raise ValueError(f"word may contain only 0/1, got {row!r}")

    @classmethod
    def bits(cls, text: str) -> "InputWord":
        return cls((text,), is_matrix=False)

    @classmethod
    def matrix(cls, rows: Sequence[str]) -> "InputWord":
        return cls(tuple(rows), is_matrix=True)

    @classmethod
    def parse(cls, text: str) -> "InputWord":
        """CLI syntax: plain 0/1 string, or semicolon-separated matrix rows."""
        if ";" in text:
            return cls.matrix(text.split(";"))
        return cls.bits(text)

    @property
    def flat(self) -> str:
        return "".join(self.rows)


def index_of(word: InputWord | str) -> int:
    """Binary value of the word, most-significant bit first."""
    if isinstance(word, str):
        word = InputWord.parse(word)
    return int(word.flat, 2)


def encode(scheme: IntervalScheme, k: int) -> float:
    """Displacement s = (k + 1/2) alpha landing x0 + s on interval k's midpoint."""
    if not 0 <= k < scheme.n:
        raise ValueError(f"index {k} outside [0, {scheme.n})")
    return (k + 0.5) * scheme.alpha


@dataclass(frozen=True)
class DecodeVerdict:
    index: int
    distance_to_midpoint: float
    within_tolerance: bool


def decode(scheme: IntervalScheme, x_measured: float) -> DecodeVerdict:
    """Interval index containing a measured position (floor semantics).

    Positions outside [x0, L) raise OutOfSegmentError; boundary points
    belong to the upper interval.
    """
    if not scheme.x0 <= x_measured < scheme.L:
        raise OutOfSegmentError(
            f"x = {x_measured:g} outside segment [{scheme.x0:g}, {scheme.L:g})"
        )
    index = min(int(math.floor((x_measured - scheme.x0) / scheme.alpha)), scheme.n - 1)
    distance = x_measured - scheme.midpoint(index)
    within = abs(distance) <= 0.5 * scheme.alpha * (1.0 + 1e-12)
    return DecodeVerdict(index=index, distance_to_midpoint=distance, within_tolerance=within)


def encode_onto(
    state: GaussianState,
    mode: int,
    scheme: IntervalScheme,
    word: InputWord | str,
    p_scheme: IntervalScheme | None = None,
    p_word: InputWord | str | None = None,
) -> GaussianState:
    """Load a word by displacing x (and optionally p) to interval midpoints.

    The p channel is independent and only applied when p_scheme is given;
    it reuses the x word unless p_word overrides it.
    """
    out = displace_x(state, mode, encode(scheme, index_of(word)))
    if p_scheme is not None:
        out = displace_p(out, mode, encode(p_scheme, index_of(p_word if p_word is not None else word)))
    return out


def decode_error_rate(
    scheme: IntervalScheme, k: int, noise_sigma: float, shots: int, seed=None
) -> float:
    """Monte Carlo P(decode(midpoint_k + noise) != k) under Gaussian position noise.

    Out-of-segment samples count as errors. Expectation is 2 Q(alpha / 2 sigma)
    with Q the standard normal tail.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if noise_sigma < 0.0:
        raise ValueError("noise sigma must be >= 0")
    encode(scheme, k)  # range check
    mid = scheme.midpoint(k)
    rng = np.random.default_rng(seed)
    xs = mid + noise_sigma * rng.standard_normal(shots)
    inside = (xs >= scheme.x0) & (xs < scheme.L)
    idx = np.floor((xs - scheme.x0) / scheme.alpha).astype(int)
    errors = (~inside) | (idx != k)
    return float(errors.mean())
