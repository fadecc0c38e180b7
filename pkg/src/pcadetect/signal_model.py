"""Uplink pilot-block simulation for a multiuser massive-MIMO base station.

The base station has M antennas; K single-antenna users each transmit an
N-symbol pilot row. Channels are flat block-fading with i.i.d. circularly
symmetric complex Gaussian taps (Rayleigh envelopes). An active eavesdropper
may replay the attacked user's pilot with power Pe, which corrupts the
least-squares channel estimate at the base station.

Two generation paths exist:

* ``simulate_uplink``: builds the full M x N received block.
* ``synthesize_estimate``: samples the LS channel estimate directly from its
  exact distribution under orthogonal pilots (h + sqrt(Pe/Pk) h_e + w with
  w ~ CN(0, sigma^2 / (Pk N))).  Statistically identical to simulating and
  then estimating, at O(M) instead of O(M N K) per trial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class PilotSetError(ValueError):
    """No orthogonal pilot set of the requested size exists (K > N)."""


@dataclass(frozen=True)
class UplinkConfig:
    """Scenario parameters for one uplink pilot block.

    ``user_power`` may be a single float (all users transmit alike) or a
    sequence with one entry per user. ``eavesdropper_power = 0`` encodes the
    no-attack hypothesis. ``num_users = 0`` is allowed as a noise-only
    scenario (only useful for calibration checks) and requires Pe = 0.
    """

    num_antennas: int
    num_users: int
    noise_variance: float
    pilot_length: int = 300
    user_power: float | tuple[float, ...] = 1.0
    eavesdropper_power: float = 0.0
    channel_variance: float = 1.0
    attacked_user_index: int = 0

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be >= 1")
        if self.num_users < 0:
            raise ValueError("num_users must be >= 0")
        if self.pilot_length < 1:
            raise ValueError("pilot_length must be >= 1")
        if self.num_users > self.pilot_length:
            raise PilotSetError(
                f"{self.num_users} users need {self.num_users} orthogonal pilots "
                f"but only {self.pilot_length} symbols are available"
            )
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")
        if self.channel_variance <= 0:
            raise ValueError("channel_variance must be > 0")
        if self.eavesdropper_power < 0:
            raise ValueError("eavesdropper_power must be >= 0")
        if isinstance(self.user_power, (list, tuple, np.ndarray)):
            powers = tuple(float(p) for p in self.user_power)
            if len(powers) != self.num_users:
                raise ValueError("user_power sequence must have one entry per user")
            object.__setattr__(self, "user_power", powers)
        elif float(self.user_power) < 0:
            raise ValueError("user_power must be >= 0")
        if self.num_users == 0:
            if self.eavesdropper_power > 0:
                raise ValueError("an attack needs at least one user to impersonate")
        elif not 0 <= self.attacked_user_index < self.num_users:
            raise ValueError("attacked_user_index out of range")
        if min(self.user_powers(), default=0.0) < 0:
            raise ValueError("user powers must be >= 0")

    @classmethod
    def from_snr_db(cls, num_antennas: int, num_users: int, snr_db: float, **kwargs) -> "UplinkConfig":
        """Build a config from an SNR in dB: sigma^2 = 10^(-SNR/10) (unit user power)."""
        return cls(
            num_antennas=num_antennas,
            num_users=num_users,
            noise_variance=10.0 ** (-float(snr_db) / 10.0),
            **kwargs,
        )

    @property
    def snr_db(self) -> float:
        """SNR in dB implied by the noise variance under unit user power."""
        if self.noise_variance == 0:
            return math.inf
        return 0.0 + -10.0 * math.log10(self.noise_variance)  # +0.0 avoids “-0”

    def user_powers(self) -> np.ndarray:
        """Per-user transmit powers as a length-K array."""
        if isinstance(self.user_power, tuple):
            return np.asarray(self.user_power, dtype=float)
        return np.full(self.num_users, float(self.user_power))

    @property
    def attacked_user_power(self) -> float:
        if self.num_users == 0:
            return float(self.user_power) if not isinstance(self.user_power, tuple) else 1.0
        return float(self.user_powers()[self.attacked_user_index])


def complex_gaussian(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """CN(0, variance) samples; real and imaginary parts carry variance/2 each."""
    draws = rng.standard_normal(tuple(shape) + (2,))
    # Interleaved (re, im) pairs reinterpreted in place; same values as
    # draws[..., 0] + 1j * draws[..., 1] without the temporaries.
    return math.sqrt(variance / 2.0) * draws.view(np.complex128)[..., 0]


def generate_pilots(num_users: int, pilot_length: int) -> np.ndarray:
    """Mutually orthogonal unit-modulus pilots: rows of the N-point DFT basis.

    Row k holds x_k(n) = exp(-2j pi k n / N), so every row has energy exactly
    N and distinct rows are orthogonal.

    Returns:
        (num_users, pilot_length) complex array.
    """
    if num_users < 1 or pilot_length < 1:
        raise ValueError("num_users and pilot_length must be >= 1")
    if num_users > pilot_length:
        raise PilotSetError(
            f"cannot build {num_users} orthogonal pilots of length {pilot_length}"
        )
    k = np.arange(num_users)[:, None]
    n = np.arange(pilot_length)[None, :]
    return np.exp(-2j * np.pi * k * n / pilot_length)


def sample_channel(num_antennas: int, channel_variance: float, rng: np.random.Generator) -> np.ndarray:
    """One flat-fading channel vector: M i.i.d. CN(0, channel_variance) taps."""
    if num_antennas < 1:
        raise ValueError("num_antennas must be >= 1")
    if channel_variance <= 0:
        raise ValueError("channel_variance must be > 0")
    return complex_gaussian(rng, (num_antennas,), channel_variance)


def simulate_uplink(config: UplinkConfig, pilots: np.ndarray, rng: np.random.Generator):
    """Simulate one received uplink block.

    Y = sum_k sqrt(Pk) h_k x_k + sqrt(Pe) h_e x_e + V, where the eavesdropper
    term is present iff Pe > 0 and x_e is an exact copy of the attacked
    user's pilot row (impersonation). V has i.i.d. CN(0, sigma^2) entries.

    Args:
        config: scenario parameters.
        pilots: (K, N) pilot matrix for this config.
        rng: source of randomness; identical state gives identical output.

    Returns:
        (received, user_channels, eve_channel): the M x N block, the (K, M)
        array of true user channels, and the eavesdropper channel (omitted as
        None when Pe = 0). True channels are returned for test oracles.
    """
    pilots = np.asarray(pilots)
    if pilots.shape != (config.num_users, config.pilot_length):
        raise ValueError(
            f"pilot matrix shape {pilots.shape} does not match config "
            f"({config.num_users}, {config.pilot_length})"
        )
    m, n = config.num_antennas, config.pilot_length

    user_channels = complex_gaussian(rng, (config.num_users, m), config.channel_variance)
    eve_channel = None
    if config.eavesdropper_power > 0:
        eve_channel = complex_gaussian(rng, (m,), config.channel_variance)
    noise = complex_gaussian(rng, (m, n), config.noise_variance) if config.noise_variance > 0 else 0.0

    received = np.zeros((m, n), dtype=complex)
    if config.num_users > 0:
        amplitudes = np.sqrt(config.user_powers())
        received += (amplitudes[:, None] * user_channels).T @ pilots
    if eve_channel is not None:
        eve_pilot = pilots[config.attacked_user_index]
        received += math.sqrt(config.eavesdropper_power) * np.outer(eve_channel, eve_pilot)
    received = received + noise
    return received, user_channels, eve_channel


def synthesize_estimate(config: UplinkConfig, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Sample the attacked user's LS channel estimate directly.

    h_hat = h + sqrt(Pe/Pk) h_e + w with w ~ CN(0, sigma^2 / (Pk N)); under
    orthogonal pilots this is exactly the distribution of ls_estimate applied
    to simulate_uplink output.

    Args:
        size: None for a single (M,) draw, otherwise the number of
            independent draws, returned as (size, M).
    """
    pk = config.attacked_user_power
    if pk <= 0:
        raise ValueError("attacked user's power must be > 0")
    m = config.num_antennas
    shape = (m,) if size is None else (int(size), m)

    estimate = complex_gaussian(rng, shape, config.channel_variance)
    if config.eavesdropper_power > 0:
        ratio = config.eavesdropper_power / pk
        estimate += math.sqrt(ratio) * complex_gaussian(rng, shape, config.channel_variance)
    if config.noise_variance > 0:
        estimate += complex_gaussian(rng, shape, config.noise_variance / (pk * config.pilot_length))
    return estimate
