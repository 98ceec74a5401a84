"""Ensemble estimators linking particle data to the kinetic predictions.

For each checkpoint and mode k the summary holds

* f1(k): mean over replicas of the per-replica particle average of
  exp(-i k theta); its standard error is computed across replicas only,
  never across particles, since particles within a replica are correlated;
* C(k): unbiased pair statistic mean over replicas of
  (|S_k|^2 - N) / (N (N - 1)) with S_k the per-replica phasor sum, which
  estimates E exp(-i k (theta_1 - theta_2)) and is real by symmetry.

The chaos distance D = sum_{0 < |k| <= K} |C(k) - |fhat(k)|^2|^2 measures
how far the ensemble is from a product law with marginal f; it vanishes in
probability as N grows when propagation of chaos holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .circle import FourierDensity, GridDensity, fourier_coeffs, sample_grid_density
from .models import EnsembleResult

__all__ = [
    "EnsembleSummary",
    "summarize",
    "chaos_distance",
    "compare_flow",
    "iid_chaos_samples",
    "resample_chaos_samples",
    "summary_rows",
    "SUMMARY_COLUMNS",
]

DEFAULT_KMAX = 16


def _mode_stats(snapshots: np.ndarray, kmax: int):
    # per-replica statistics a_r(k) and b_r(k) for k = 0..kmax
    R, T, N = snapshots.shape
    z = np.exp(-1j * snapshots)
    powers = np.ones_like(z)
    a = np.empty((R, T, kmax + 1), dtype=complex)
    b = np.empty((R, T, kmax + 1))
    a[..., 0] = 1.0
    b[..., 0] = 1.0
    for k in range(1, kmax + 1):
        powers = powers * z
        S = powers.sum(axis=-1)
        a[..., k] = S / N
        b[..., k] = (np.abs(S) ** 2 - N) / (N * (N - 1))
    return a, b


@dataclass(eq=False)
class EnsembleSummary:
    times: np.ndarray        # (T,)
    n_replicas: int
    n_particles: int
    kmax: int
    f1: np.ndarray           # (T, kmax+1) complex, mean one-particle coefficient
    f1_se: np.ndarray        # (T, kmax+1)
    pair: np.ndarray         # (T, kmax+1) real pair statistic C(k)
    pair_se: np.ndarray
    f1_reps: np.ndarray      # (R, T, kmax+1) per-replica a_r(k), kept for resampling
    pair_reps: np.ndarray    # (R, T, kmax+1) per-replica b_r(k)


def summarize(result: EnsembleResult, kmax: int = DEFAULT_KMAX) -> EnsembleSummary:
    """Mode statistics with across-replica standard errors (needs >= 2 replicas)."""
    snaps = result.snapshots
    if snaps.ndim != 3 or snaps.shape[0] < 2:
        raise ValueError("need an ensemble with at least 2 replicas")
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    R, T, N = snaps.shape
    a, b = _mode_stats(snaps, kmax)
    f1 = a.mean(axis=0)
    f1_se = np.sqrt((a.real.var(axis=0, ddof=1) + a.imag.var(axis=0, ddof=1)) / R)
    pair = b.mean(axis=0)
    pair_se = np.sqrt(b.var(axis=0, ddof=1) / R)
    return EnsembleSummary(times=result.times, n_replicas=R, n_particles=N, kmax=kmax,
                           f1=f1, f1_se=f1_se, pair=pair, pair_se=pair_se,
                           f1_reps=a, pair_reps=b)


def _reference_pair_power(f: FourierDensity, kmax: int) -> np.ndarray:
    if kmax > f.K:
        raise ValueError(f"reference density resolves only |k| <= {f.K}")
    return np.abs(f.coeffs[f.K:f.K + kmax + 1]) ** 2


def chaos_distance(summary: EnsembleSummary, f: FourierDensity,
                   kmax: Optional[int] = None, checkpoint: int = -1) -> float:
    """Distance D between the pair statistic and the product-law prediction."""
    K = summary.kmax if kmax is None else kmax
    if K < 1 or K > summary.kmax:
        raise ValueError(f"kmax must be in 1..{summary.kmax}")
    ref = _reference_pair_power(f, K)
    dev = summary.pair[checkpoint, 1:K + 1] - ref[1:]
    return float(2.0 * np.sum(dev ** 2))


def compare_flow(summary: EnsembleSummary, kinetic_coeffs: np.ndarray,
                 kmax: Optional[int] = None) -> np.ndarray:
    """Standardized deviations z(t, k) = (f1 - kinetic) / SE for k = 0..kmax.

    kinetic_coeffs has shape (T, kmax+1) with the predicted fhat(k, t). At
    k = 0 both sides are 1 and z is set to 0. A zero standard error with a
    nonzero deviation yields inf, so it cannot pass unnoticed.
    """
    K = summary.kmax if kmax is None else kmax
    if K < 1 or K > summary.kmax:
        raise ValueError(f"kmax must be in 1..{summary.kmax}")
    ref = np.asarray(kinetic_coeffs)
    if ref.shape != (summary.times.size, K + 1):
        raise ValueError(f"kinetic coefficients must have shape (T, {K + 1})")
    dev = summary.f1[:, :K + 1] - ref
    se = summary.f1_se[:, :K + 1]
    z = np.zeros_like(dev)
    ok = se > 0.0
    z[ok] = dev[ok] / se[ok]
    bad = (~ok) & (np.abs(dev) > 1e-12)
    z[bad] = np.inf
    z[:, 0] = 0.0
    return z


def iid_chaos_samples(f: Union[FourierDensity, GridDensity], n_particles: int,
                      n_replicas: int, kmax: int, n_boot: int,
                      rng: np.random.Generator, grid_size: int = 512) -> np.ndarray:
    """Monte Carlo draws of D for i.i.d. ensembles from f (the noise floor).

    Each draw builds a fresh ensemble of n_replicas x n_particles independent
    angles from f and evaluates the chaos distance against f itself.
    """
    if isinstance(f, GridDensity):
        grid = f
        ref_density = fourier_coeffs(grid, kmax)
    else:
        from .circle import density_from_coeffs

        grid = density_from_coeffs(f, max(grid_size, 2 * f.K + 2))
        ref_density = f
    ref = _reference_pair_power(ref_density, kmax)[1:]
    N, R = n_particles, n_replicas
    out = np.empty(n_boot)
    for bi in range(n_boot):
        angles = sample_grid_density(grid, rng, (R, N))
        z = np.exp(-1j * angles)
        powers = np.ones_like(z)
        dev2 = 0.0
        for k in range(1, kmax + 1):
            powers = powers * z
            S = powers.sum(axis=-1)
            bstat = ((np.abs(S) ** 2 - N) / (N * (N - 1))).mean()
            dev2 += (bstat - ref[k - 1]) ** 2
        out[bi] = 2.0 * dev2
    return out


def resample_chaos_samples(summary: EnsembleSummary, f: FourierDensity, n_boot: int,
                           rng: np.random.Generator, kmax: Optional[int] = None,
                           checkpoint: int = -1) -> np.ndarray:
    """Bootstrap draws of D by resampling replicas with replacement."""
    K = summary.kmax if kmax is None else kmax
    ref = _reference_pair_power(f, K)[1:]
    b = summary.pair_reps[:, checkpoint, 1:K + 1]
    R = b.shape[0]
    out = np.empty(n_boot)
    for bi in range(n_boot):
        pick = rng.integers(R, size=R)
        dev = b[pick].mean(axis=0) - ref
        out[bi] = 2.0 * np.sum(dev ** 2)
    return out


SUMMARY_COLUMNS = ("t", "k", "re_f1", "im_f1", "se_f1", "re_C", "im_C", "se_C", "z_kinetic")


def summary_rows(summary: EnsembleSummary, z: Optional[np.ndarray] = None):
    """Rows for the summary CSV; z_kinetic is |z| when provided, else nan."""
    for ti, t in enumerate(summary.times):
        for k in range(summary.kmax + 1):
            zk = float("nan") if z is None else float(np.abs(z[ti, k]))
            yield (float(t), k,
                   float(summary.f1[ti, k].real), float(summary.f1[ti, k].imag),
                   float(summary.f1_se[ti, k]),
                   float(summary.pair[ti, k]), 0.0, float(summary.pair_se[ti, k]),
                   zk)
