"""Quantum sawtooth map on the torus and exact fidelity (Loschmidt echo).

One map step applies the kick phase exp(+i*k*(theta - pi)^2/2) on the position
grid theta_j = 2*pi*j/N, transforms to the momentum representation with the
unitary DFT, applies the free phase exp(-i*p^2/(2*hbar)), and transforms back.
Momentum takes the integer-quantum values p = hbar*m with m in
{-N/2, ..., N/2-1}, stored in standard DFT bin order.

The echo compares evolution with kick coefficient k0 against k = k0 + sigma:
M(t) = |<psi_k(t)|psi_k0(t)>|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import TWO_PI, MapParams
from .series import FidelitySeries

POSITION = "position"
MOMENTUM = "momentum"

# Chunk cap for batched ensemble evolution (complex elements per array).
# Fixed constant so results never depend on worker or memory settings.
_BATCH_ELEMENTS = 2**22


def position_grid(N: int) -> np.ndarray:
    """theta_j = 2*pi*j/N for j = 0..N-1."""
    return TWO_PI * np.arange(N) / N


def momentum_quanta(N: int) -> np.ndarray:
    """Integer momentum quanta in DFT bin order: 0..N/2-1, then -N/2..-1."""
    m = np.arange(N)
    return np.where(m < (N + 1) // 2, m, m - N)


def momentum_grid(params: MapParams) -> np.ndarray:
    """p_m = hbar*m in DFT bin order, covering [-pi, pi)."""
    return params.hbar * momentum_quanta(params.N)


@dataclass
class QuantumState:
    """Normalized amplitude vector on the torus Hilbert space."""

    amplitudes: np.ndarray
    rep: str = POSITION
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.ndim != 1:
            raise ValueError("amplitudes must be a 1-d vector")
        if self.rep not in (POSITION, MOMENTUM):
            raise ValueError(f"rep must be {POSITION!r} or {MOMENTUM!r}, got {self.rep!r}")

    @property
    def N(self) -> int:
        return len(self.amplitudes)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def to_position(self) -> "QuantumState":
        if self.rep == POSITION:
            return self
        amps = np.fft.ifft(self.amplitudes, norm="ortho")
        return QuantumState(amps, POSITION, dict(self.meta))

    def to_momentum(self) -> "QuantumState":
        if self.rep == MOMENTUM:
            return self
        amps = np.fft.fft(self.amplitudes, norm="ortho")
        return QuantumState(amps, MOMENTUM, dict(self.meta))

    def overlap(self, other: "QuantumState") -> complex:
        """<self|other>, converting `other` to this state's representation."""
        if self.N != other.N:
            raise ValueError("dimension mismatch")
        o = other.to_position() if self.rep == POSITION else other.to_momentum()
        return complex(np.vdot(self.amplitudes, o.amplitudes))


def make_point_source(theta0: float, params: MapParams) -> QuantumState:
    """Position eigenstate at the grid point nearest theta0."""
    if not math.isfinite(theta0):
        raise ValueError(f"theta0 must be finite, got {theta0!r}")
    N = params.N
    j = int(round((theta0 % TWO_PI) / (TWO_PI / N))) % N
    amps = np.zeros(N, dtype=np.complex128)
    amps[j] = 1.0
    return QuantumState(amps, POSITION, {"theta0": TWO_PI * j / N, "grid_index": j})


def make_gaussian(theta0: float, p0: float, params: MapParams, n_images: int = 3) -> QuantumState:
    """Periodized minimum-uncertainty Gaussian centered at (theta0, p0).

    Position variance hbar/2 (symmetric split with the momentum variance).
    p0 is snapped to the momentum grid so the image charges at theta0 + 2*pi*n
    carry no extra phase.  If the unwrapped packet puts more than 1e-6 of its
    probability mass beyond half the torus (images overlap materially),
    meta["overlap_warning"] is set.
    """
    if not (math.isfinite(theta0) and math.isfinite(p0)):
        raise ValueError("theta0 and p0 must be finite")
    N = params.N
    hbar = params.hbar
    half = N // 2
    m0 = int(round(p0 / hbar))
    m0 = min(max(m0, -half), half - 1)

    theta = position_grid(N)
    envelope = np.zeros(N)
    for n in range(-n_images, n_images + 1):
        envelope += np.exp(-((theta - theta0 + TWO_PI * n) ** 2) / (2.0 * hbar))
    # |psi|^2 ~ exp(-x^2/hbar): mass of one image beyond |x| > pi.
    overlap = math.erfc(math.pi / math.sqrt(hbar))

    amps = envelope * np.exp(1j * m0 * theta)
    amps /= np.linalg.norm(amps)
    meta = {"theta0": theta0, "p0": hbar * m0, "periodization_overlap": overlap}
    if overlap > 1e-6:
        meta["overlap_warning"] = True
    return QuantumState(amps, POSITION, meta)


def kick_phases(kick: float, N: int) -> np.ndarray:
    """Diagonal kick factor exp(+i*kick*(theta_j - pi)^2/2) on the position grid."""
    theta = position_grid(N)
    return np.exp(0.5j * kick * (theta - math.pi) ** 2)


def free_phases(params: MapParams) -> np.ndarray:
    """Diagonal free-rotation factor exp(-i*p^2/(2*hbar)) in DFT bin order."""
    m = momentum_quanta(params.N)
    return np.exp(-1j * math.pi * m.astype(float) ** 2 / params.N)


def evolve_step(state: QuantumState, kick: float, params: MapParams) -> QuantumState:
    """One sawtooth-map step; accepts either representation, returns position."""
    if state.N != params.N:
        raise ValueError(f"state dimension {state.N} != params.N {params.N}")
    psi = state.to_position().amplitudes * kick_phases(kick, params.N)
    phi = np.fft.fft(psi, norm="ortho") * free_phases(params)
    return QuantumState(np.fft.ifft(phi, norm="ortho"), POSITION, dict(state.meta))


def _evolve_batch(psi: np.ndarray, kick_phase: np.ndarray, free_phase: np.ndarray) -> np.ndarray:
    """One step for a (rows, N) block of position-representation states."""
    phi = np.fft.fft(psi * kick_phase, axis=-1, norm="ortho")
    phi *= free_phase
    return np.fft.ifft(phi, axis=-1, norm="ortho")


def _echo_rows(psi0: np.ndarray, params: MapParams, T: int,
               kick_a: float, kick_b: float) -> np.ndarray:
    """Per-row fidelity M(t) = |<psi_b(t)|psi_a(t)>|^2 for a (rows, N) block."""
    ka = kick_phases(kick_a, params.N)
    kb = kick_phases(kick_b, params.N)
    fp = free_phases(params)
    a = psi0.copy()
    b = psi0.copy()
    M = np.empty((psi0.shape[0], T + 1))
    M[:, 0] = np.abs(np.sum(np.conj(b) * a, axis=-1)) ** 2
    for t in range(1, T + 1):
        a = _evolve_batch(a, ka, fp)
        b = _evolve_batch(b, kb, fp)
        M[:, t] = np.abs(np.sum(np.conj(b) * a, axis=-1)) ** 2
    return M


def fidelity_series(state0: QuantumState, params: MapParams, T: int,
                    kicks: tuple[float, float] | None = None) -> FidelitySeries:
    """Exact echo M(t) = |<psi_k(t)|psi_k0(t)>|^2 for t = 0..T.

    `kicks` overrides the (k0, k) pair, e.g. to check the swap symmetry.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    if state0.N != params.N:
        raise ValueError("dimension mismatch")
    kick_a, kick_b = kicks if kicks is not None else (params.k0, params.k)
    psi0 = state0.to_position().amplitudes[None, :]
    M = _echo_rows(psi0, params, T, kick_a, kick_b)[0]
    return FidelitySeries(
        t=np.arange(T + 1),
        columns={"M": M},
        errors={"M": np.zeros(T + 1)},
        params=params,
        meta={"ensemble": "single", "kicks": (kick_a, kick_b)},
    )


@dataclass(frozen=True)
class EnsembleSpec:
    """Initial-state ensemble: point sources or Gaussian packets.

    Member draws come from independent streams keyed by (seed, member index),
    so results are bitwise reproducible under any execution schedule.
    """

    kind: str = "point"
    count: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("point", "gaussian"):
            raise ValueError(f"kind must be 'point' or 'gaussian', got {self.kind!r}")
        if self.count < 1:
            raise ValueError("count must be >= 1")


def member_initial_conditions(ensemble: EnsembleSpec, params: MapParams):
    """(theta0, p0) draws per member: theta0 uniform on [0, 2*pi), p0 on the
    momentum grid (always 0 for point sources)."""
    theta0 = np.empty(ensemble.count)
    p0 = np.zeros(ensemble.count)
    half = params.N // 2
    for i in range(ensemble.count):
        rng = np.random.default_rng(np.random.SeedSequence([int(ensemble.seed), i]))
        theta0[i] = rng.uniform(0.0, TWO_PI)
        if ensemble.kind == "gaussian":
            p0[i] = params.hbar * rng.integers(-half, half)
    return theta0, p0


def _member_states(ensemble: EnsembleSpec, params: MapParams) -> np.ndarray:
    theta0, p0 = member_initial_conditions(ensemble, params)
    psi = np.empty((ensemble.count, params.N), dtype=np.complex128)
    for i in range(ensemble.count):
        if ensemble.kind == "point":
            psi[i] = make_point_source(theta0[i], params).amplitudes
        else:
            psi[i] = make_gaussian(theta0[i], p0[i], params).amplitudes
    return psi


def ensemble_mean_fidelity(ensemble: EnsembleSpec, params: MapParams, T: int) -> FidelitySeries:
    """Mean echo over the ensemble with its standard error.

    Members are evolved in fixed-size batches and averaged in member order;
    the result depends only on (spec, params, T), never on parallelism.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    psi = _member_states(ensemble, params)
    rows_per_chunk = max(1, _BATCH_ELEMENTS // params.N)
    M = np.empty((ensemble.count, T + 1))
    for lo in range(0, ensemble.count, rows_per_chunk):
        hi = min(lo + rows_per_chunk, ensemble.count)
        M[lo:hi] = _echo_rows(psi[lo:hi], params, T, params.k0, params.k)
    mean = M.mean(axis=0)
    if ensemble.count > 1:
        err = M.std(axis=0, ddof=1) / math.sqrt(ensemble.count)
    else:
        err = np.zeros(T + 1)
    return FidelitySeries(
        t=np.arange(T + 1),
        columns={"M": mean},
        errors={"M": err},
        params=params,
        meta={"ensemble": ensemble.kind, "count": ensemble.count, "seed": ensemble.seed},
    )
