"""Semiclassical fidelity from dephasing of first-order action differences.

The amplitude for one initial position theta0 is the momentum average

    m(theta0, t) = <exp(i*sigma*dS/epsilon)>_{p0}

over a uniform deterministic grid of p0 covering [0, 2*pi), with dS/epsilon
accumulated along unperturbed sawtooth trajectories.  Averaging over a
theta0 ensemble splits the mean fidelity into a mean-value part
Ma = |<m>|^2, the full semiclassical Msc = <|m|^2>, and the fluctuation part
Mf = Msc - Ma (exact decomposition by construction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cmap
from .params import TWO_PI, MapParams
from .series import FidelitySeries

# r0 rows evolved per block; fixed so results never depend on memory pressure.
_R0_CHUNK = 64


@dataclass(frozen=True)
class SemiclassicalConfig:
    """Momentum-grid resolution and theta0 ensemble for the dephasing average."""

    p0_grid_size: int = 16384
    r0_count: int = 500
    seed: int = 0
    t_max: int = 30

    def __post_init__(self):
        if self.p0_grid_size < 1:
            raise ValueError("p0_grid_size must be >= 1")
        if self.r0_count < 1:
            raise ValueError("r0_count must be >= 1")


def r0_angles(config: SemiclassicalConfig, params: MapParams | None = None) -> np.ndarray:
    """theta0 draws, one keyed stream per member (seed, index); snapped to the
    position grid when params is given so they coincide with quantum point
    sources built from the same seed."""
    theta0 = np.empty(config.r0_count)
    for i in range(config.r0_count):
        rng = np.random.default_rng(np.random.SeedSequence([int(config.seed), i]))
        theta0[i] = rng.uniform(0.0, TWO_PI)
    if params is not None:
        step = TWO_PI / params.N
        theta0 = (np.round(theta0 / step) % params.N) * step
    return theta0


def p0_grid(config: SemiclassicalConfig) -> np.ndarray:
    return TWO_PI * np.arange(config.p0_grid_size) / config.p0_grid_size


def _amplitude_table(K0: float, sigma: float, theta0s: np.ndarray,
                     grid: np.ndarray, t_max: int) -> np.ndarray:
    """m[t, i] = <exp(i*sigma*dS)>_{p0} for each theta0, t = 0..t_max."""
    R = len(theta0s)
    m = np.empty((t_max + 1, R), dtype=np.complex128)
    m[0] = 1.0
    for lo in range(0, R, _R0_CHUNK):
        hi = min(lo + _R0_CHUNK, R)
        theta = np.broadcast_to(theta0s[lo:hi, None], (hi - lo, len(grid))).copy()
        p = np.broadcast_to(grid[None, :], (hi - lo, len(grid))).copy()
        dS = np.zeros((hi - lo, len(grid)))
        for t in range(1, t_max + 1):
            theta, p, dS = cmap.advance_with_action(theta, p, dS, K0)
            m[t, lo:hi] = np.exp(1j * sigma * dS).mean(axis=1)
    return m


def action_table(K0: float, t: int, config: SemiclassicalConfig,
                 params: MapParams | None = None) -> np.ndarray:
    """dS/epsilon at time t on the full (theta0, p0) lattice, shape (R, G)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    theta0s = r0_angles(config, params)
    grid = p0_grid(config)
    theta = np.broadcast_to(theta0s[:, None], (len(theta0s), len(grid))).copy()
    p = np.broadcast_to(grid[None, :], (len(theta0s), len(grid))).copy()
    dS = np.zeros((len(theta0s), len(grid)))
    for _ in range(t):
        theta, p, dS = cmap.advance_with_action(theta, p, dS, K0)
    return dS


def _series_from_amplitudes(m: np.ndarray, params: MapParams,
                            config: SemiclassicalConfig) -> FidelitySeries:
    T, R = m.shape[0] - 1, m.shape[1]
    abs2 = np.abs(m) ** 2                # (T+1, R)
    msc = abs2.mean(axis=1)
    mbar = m.mean(axis=1)
    ma = np.abs(mbar) ** 2
    mf = msc - ma

    if R > 1:
        sqrt_r = math.sqrt(R)
        msc_err = abs2.std(axis=1, ddof=1) / sqrt_r
        # Delta method: Ma and Mf are smooth functions of the member mean, so
        # their errors come from the member-wise influence values.
        lin = 2.0 * np.real(np.conj(mbar)[:, None] * m)
        ma_err = lin.std(axis=1, ddof=1) / sqrt_r
        mf_err = (abs2 - lin).std(axis=1, ddof=1) / sqrt_r
    else:
        msc_err = ma_err = mf_err = np.zeros(T + 1)

    return FidelitySeries(
        t=np.arange(T + 1),
        columns={"Ma": ma, "Msc": msc, "Mf": mf},
        errors={"Ma": ma_err, "Msc": msc_err, "Mf": mf_err},
        params=params,
        meta={"p0_grid_size": config.p0_grid_size, "r0_count": config.r0_count,
              "seed": config.seed},
    )


def dephasing_series(params: MapParams, config: SemiclassicalConfig,
                     t_max: int | None = None) -> FidelitySeries:
    """Ma, Msc, Mf for t = 0..t_max from one shared trajectory set."""
    T = config.t_max if t_max is None else t_max
    if T < 0:
        raise ValueError("t_max must be >= 0")
    theta0s = r0_angles(config, params)
    m = _amplitude_table(params.K0, params.sigma, theta0s, p0_grid(config), T)
    return _series_from_amplitudes(m, params, config)


def m_semiclassical(theta0: float, params: MapParams, t: int,
                    config: SemiclassicalConfig) -> complex:
    """Dephasing amplitude for a single initial position; |m| <= 1."""
    if t < 0:
        raise ValueError("t must be >= 0")
    m = _amplitude_table(params.K0, params.sigma, np.array([float(theta0)]),
                         p0_grid(config), t)
    return complex(m[t, 0])


def mean_part_Ma(params: MapParams, t: int, config: SemiclassicalConfig) -> float:
    """Ma(t) = |<m(theta0, t)>_{theta0}|^2."""
    return float(dephasing_series(params, config, t_max=t)["Ma"][t])


def semiclassical_fidelity_Msc(params: MapParams, t: int, config: SemiclassicalConfig) -> float:
    """Msc(t) = <|m(theta0, t)|^2>_{theta0}."""
    return float(dephasing_series(params, config, t_max=t)["Msc"][t])


def fluctuating_part_Mf(params: MapParams, t: int, config: SemiclassicalConfig) -> float:
    """Mf(t) = Msc(t) - Ma(t)."""
    return float(dephasing_series(params, config, t_max=t)["Mf"][t])


def Ma_from_characteristic(samples: np.ndarray, sigma: float) -> float:
    """|empirical characteristic function|^2 of pooled dS/epsilon samples at sigma."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("empty sample set")
    return float(np.abs(np.exp(1j * sigma * samples).mean()) ** 2)
