"""Kinetic (large-N) limit equations for the circle models.

The one-particle density solves df/dt = rate_factor * (G(f) - f), where G is
the model's gain operator:

* leader model (cl): G(f) = (f + g * f) / 2, which in Fourier modes gives the
  closed form fhat(k, t) = fhat(k, 0) * exp(rate_factor * (ghat(k) - 1) * t / 2);
* midpoint model (bdg): G(f) = g * mu_f, where mu_f is the pushforward of the
  product f x f under the shorter-arc midpoint map.

rate_factor defaults to 2: events arrive at total rate N and each event moves
one particle (cl) or two (bdg), so a tagged particle is refreshed at rate 1
under cl, i.e. its mode k relaxes at rate 1 - ghat(k). The factor is kept
configurable because it is exactly what the flow-matching verification
scenario arbitrates against particle data.

The grid solver deposits midpoint mass on the nearest cell; when the exact
midpoint falls on a cell boundary (odd cell difference) the mass is split
evenly between the two adjacent cells, which keeps the scheme translation
invariant and free of directional drift. The antipodal tie takes the arc
counterclockwise from the first argument, matching ``models.midpoint_angle``.
Discretization error is O(1/M) and is covered by the refinement checks in the
acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .circle import TWO_PI, FourierDensity, GridDensity, NoiseSpec

__all__ = [
    "KineticConfig",
    "bisector_tables",
    "cl_evolve",
    "bdg_midpoint_pushforward",
    "bdg_gain",
    "bdg_evolve",
    "bdg_evolve_checkpoints",
]

DEFAULT_RATE_FACTOR = 2.0


@dataclass(frozen=True)
class KineticConfig:
    """Solver settings; dt must satisfy dt <= 0.1 / rate_factor."""

    rate_factor: float = DEFAULT_RATE_FACTOR
    K: int = 64
    M: int = 256
    dt: float = 0.02
    t_end: float = 1.0

    def __post_init__(self):
        if self.rate_factor <= 0.0:
            raise ValueError("rate_factor must be positive")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.dt <= 0.0 or self.dt > 0.1 / self.rate_factor + 1e-15:
            raise ValueError(f"dt={self.dt} out of range; need 0 < dt <= 0.1/rate_factor")
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")


def cl_evolve(f0: FourierDensity, g: NoiseSpec, t: float,
              config: KineticConfig = KineticConfig()) -> FourierDensity:
    """Exact mode-wise solution of the leader-model kinetic equation.

    Every mode decays independently:
    fhat(k, t) = fhat(k, 0) * exp(rate_factor * (ghat(k) - 1) * t / 2).
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    ghat = np.asarray(g.fourier(f0.kvals), dtype=float)
    decay = np.exp(0.5 * config.rate_factor * (ghat - 1.0) * t)
    return FourierDensity(f0.coeffs * decay)


@lru_cache(maxsize=None)
def bisector_tables(M: int):
    """Midpoint deposition tables for every ordered cell pair.

    The shorter-arc midpoint of cells (a, b) sits either on a cell center or
    exactly on a cell boundary (odd cell difference). Returns (lo, hi, w_hi):
    midpoint mass goes to cell lo[a, b] with weight 1 - w_hi[a, b] and to
    cell hi[a, b] with weight w_hi[a, b]; centered midpoints have w_hi = 0
    and boundary ties split evenly (w_hi = 1/2). The even split is the only
    deterministic choice that is both translation invariant (so rotations
    commute with the deposition and uniform stays exactly uniform) and free
    of the half-cell drift a one-sided rounding would inject.

    Arc conventions match ``models.midpoint_angle``, including the antipodal
    case (a quarter turn counterclockwise from the first cell).
    """
    d = (np.arange(M)[None, :] - np.arange(M)[:, None]) % M
    signed = np.where(d <= M // 2, d, d - M).astype(float)
    pos = np.arange(M)[:, None] + 0.5 * signed
    base = np.floor(pos)
    w_hi = pos - base  # 0.0 at cell centers, 0.5 at boundary ties
    lo = base.astype(np.int64) % M
    hi = (base.astype(np.int64) + 1) % M
    for a in (lo, hi, w_hi):
        a.setflags(write=False)
    return lo, hi, w_hi


def _pushforward_masses(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    # bilinear midpoint deposition of the product measure pa x pb
    M = pa.size
    lo, hi, w_hi = bisector_tables(M)
    pm = np.outer(pa, pb).ravel()
    w = w_hi.ravel()
    out = np.bincount(lo.ravel(), weights=pm * (1.0 - w), minlength=M)
    out += np.bincount(hi.ravel(), weights=pm * w, minlength=M)
    return out


def _convolve_masses(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    M = pa.size
    return np.fft.irfft(np.fft.rfft(pa) * np.fft.rfft(pb), M)


def _noise_masses(g: Union[NoiseSpec, GridDensity], M: int) -> np.ndarray:
    if isinstance(g, GridDensity):
        if g.M != M:
            raise ValueError(f"noise grid M={g.M} does not match density grid M={M}")
        return g.masses
    return g.tabulate(M).masses


def bdg_midpoint_pushforward(f: GridDensity) -> GridDensity:
    """Distribution of the pair midpoint when both angles are i.i.d. from f."""
    masses = _pushforward_masses(f.masses, f.masses)
    return GridDensity.from_unnormalized(masses * (f.M / TWO_PI))


def bdg_gain(f: GridDensity, g: Union[NoiseSpec, GridDensity]) -> GridDensity:
    """Gain term of the midpoint model: noise convolved with the midpoint law."""
    gm = _noise_masses(g, f.M)
    masses = _convolve_masses(_pushforward_masses(f.masses, f.masses), gm)
    if masses.min() < -1e-12:
        raise ValueError(f"gain came out negative (min {masses.min():.3e})")
    masses = np.clip(masses, 0.0, None)
    return GridDensity.from_unnormalized(masses * (f.M / TWO_PI))


def _gain_rhs(p: np.ndarray, gm_hat: np.ndarray, rate_factor: float) -> np.ndarray:
    # d p / dt in mass space; mass is conserved exactly when sum(p) == 1
    M = p.size
    push = _pushforward_masses(p, p)
    gain = np.fft.irfft(np.fft.rfft(push) * gm_hat, M)
    return rate_factor * (gain - p)


def bdg_evolve(f0: GridDensity, g: Union[NoiseSpec, GridDensity], t: float,
               config: KineticConfig = KineticConfig()) -> GridDensity:
    """Integrate the midpoint-model kinetic equation to time t with RK4.

    After each step tiny negative undershoots are clipped and the density is
    renormalized; a value below -1e-6 or a mass drift beyond 1e-10 aborts,
    since either indicates the step size is too large for this data.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    p = f0.masses.copy()
    if t == 0.0:
        return GridDensity(f0.values)
    gm_hat = np.fft.rfft(_noise_masses(g, f0.M))
    rf = config.rate_factor
    steps = max(1, int(np.ceil(t / config.dt - 1e-12)))
    h = t / steps
    for _ in range(steps):
        k1 = _gain_rhs(p, gm_hat, rf)
        k2 = _gain_rhs(p + 0.5 * h * k1, gm_hat, rf)
        k3 = _gain_rhs(p + 0.5 * h * k2, gm_hat, rf)
        k4 = _gain_rhs(p + h * k3, gm_hat, rf)
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        mass = p.sum()
        if abs(mass - 1.0) > 1e-10:
            raise RuntimeError(f"mass drifted to {mass!r}; reduce dt")
        if p.min() < -1e-6:
            raise RuntimeError(f"density undershoot {p.min():.3e}; reduce dt")
        if p.min() < 0.0:
            p = np.clip(p, 0.0, None)
            p /= p.sum()
    return GridDensity.from_unnormalized(p * (f0.M / TWO_PI))


def bdg_evolve_checkpoints(f0: GridDensity, g: Union[NoiseSpec, GridDensity],
                           times: Sequence[float],
                           config: KineticConfig = KineticConfig()) -> list:
    """Solutions at the given nondecreasing times, integrating segment-wise."""
    times = np.asarray(times, dtype=float)
    if times.size and (np.any(np.diff(times) < 0.0) or times[0] < 0.0):
        raise ValueError("times must be nondecreasing and nonnegative")
    out = []
    current = GridDensity(f0.values)
    t_prev = 0.0
    for t in times:
        current = bdg_evolve(current, g, t - t_prev, config)
        out.append(current)
        t_prev = t
    return out
