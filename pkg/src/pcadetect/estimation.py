"""Least-squares channel estimation and the per-antenna energy feature."""

from __future__ import annotations

import math

import numpy as np


def ls_estimate(received: np.ndarray, pilot_row: np.ndarray, user_power: float = 1.0) -> np.ndarray:
    """LS channel estimate for one user: h_hat = Y x^H / (sqrt(Pk) ||x||^2).

    Args:
        received: (M, N) uplink block.
        pilot_row: (N,) pilot of the user being estimated.
        user_power: that user's transmit power Pk.

    Returns:
        (M,) complex estimate.
    """
    received = np.asarray(received)
    pilot_row = np.asarray(pilot_row)
    if received.ndim != 2 or pilot_row.ndim != 1 or received.shape[1] != pilot_row.shape[0]:
        raise ValueError("pilot row length must match the block's column count")
    if user_power <= 0:
        raise ValueError("user_power must be > 0")
    pilot_energy = float(np.real(pilot_row @ pilot_row.conj()))
    if pilot_energy <= 0:
        raise ValueError("pilot row has zero energy")
    return received @ pilot_row.conj() / (math.sqrt(user_power) * pilot_energy)


def energy_feature(estimate: np.ndarray):
    """Per-antenna energy of a channel estimate: ||h_hat||^2 / M.

    Accepts a single (M,) estimate or a batch (..., M); the antenna axis is
    always the last one. Returns a float for a single estimate, an array for
    a batch.
    """
    estimate = np.asarray(estimate)
    if estimate.size == 0 or estimate.ndim == 0 or estimate.shape[-1] == 0:
        raise ValueError("estimate must contain at least one tap")
    energy = np.mean(np.abs(estimate) ** 2, axis=-1)
    return float(energy) if energy.ndim == 0 else energy
