"""Parameter bundle for the kicked sawtooth map on the quantized torus."""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MapParams:
    """Kick strength K0, perturbation epsilon, Hilbert dimension N.

    The derived quantities follow from the torus quantization: the effective
    Planck constant is hbar = 2*pi/N, the dimensionless kick coefficients are
    k0 = K0/hbar and k = k0 + sigma with sigma = epsilon/hbar.

    epsilon << K0 is the intended usage regime; it is documented, not enforced.
    """

    K0: float
    epsilon: float
    N: int

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")
        if not (math.isfinite(self.K0) and math.isfinite(self.epsilon)):
            raise ValueError("K0 and epsilon must be finite")

    @property
    def hbar(self) -> float:
        return TWO_PI / self.N

    @property
    def k0(self) -> float:
        return self.K0 / self.hbar

    @property
    def sigma(self) -> float:
        return self.epsilon / self.hbar

    @property
    def k(self) -> float:
        return self.k0 + self.sigma

    @classmethod
    def from_sigma(cls, K0: float, sigma: float, N: int) -> "MapParams":
        """Build params from the dimensionless perturbation sigma = epsilon/hbar."""
        if not isinstance(N, int) or N < 2:
            raise ValueError(f"N must be an integer >= 2, got {N!r}")
        return cls(K0=K0, epsilon=sigma * TWO_PI / N, N=N)
