"""Bayes-optimal accuracy of a synthetic spec, used as the end-to-end
pipeline target.

Scalar features use fine-grid numeric integration of the class densities;
electrode features use Monte Carlo on the sentence-level Gaussian. Only
pure Gaussian class conditionals are supported: specs with per-subject or
per-block hierarchy are rejected, since their class conditionals are
mixtures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, UnsupportedDistributionError
from ..seeding import derived_rng
from .synth import Gaussian, SynthSpec
from .types import N_CHANNELS

GRID_STEP_FRACTION = 1e-4  # grid step as a fraction of the support range
MIN_MC_DRAWS = 1_000_000


@dataclass(frozen=True)
class BayesOracleResult:
    accuracy: float
    std_error: float | None  # None for the deterministic grid method
    method: str  # "grid" or "monte_carlo"


def bayes_oracle(spec: SynthSpec, feature: str = "omission_rate",
                 mc_draws: int = MIN_MC_DRAWS, seed: int = 0) -> BayesOracleResult:
    """Bayes accuracy for NR vs TSR under equal priors on ``feature``.

    ``feature`` is one of ``omission_rate``, ``reading_speed`` or
    ``electrode_features_<band>``.
    """
    if "NR" not in spec.classes or "TSR" not in spec.classes:
        raise ParameterError("oracle needs both NR and TSR in spec.classes")

    if feature in ("omission_rate", "reading_speed", "reading_speed_s"):
        if spec.subject_omission_spread > 0 or spec.subject_speed_spread > 0:
            raise UnsupportedDistributionError(
                "per-subject spread makes the class conditional a Gaussian "
                "mixture; the oracle only supports pure Gaussians"
            )
        attr = "omission_rate" if feature == "omission_rate" else "reading_speed_s"
        g1: Gaussian = getattr(spec.classes["NR"], attr)
        g2: Gaussian = getattr(spec.classes["TSR"], attr)
        return BayesOracleResult(
            accuracy=gaussian_bayes_accuracy_1d(g1.mean, g1.std, g2.mean, g2.std),
            std_error=None,
            method="grid",
        )

    if feature.startswith("electrode_features_"):
        band = feature[len("electrode_features_"):]
        if spec.eeg is None:
            raise UnsupportedDistributionError("spec has no EEG parameters")
        if band not in spec.eeg.bands:
            raise ParameterError(f"band {band!r} not in spec.eeg.bands")
        if spec.eeg.block_drift_std > 0 or spec.eeg.subject_offset_std > 0:
            raise UnsupportedDistributionError(
                "block drift / subject offsets make the class conditional a "
                "Gaussian mixture; the oracle only supports pure Gaussians"
            )
        delta = np.zeros(N_CHANNELS)
        shifts = spec.eeg.class_shift.get(band, {})
        diff = shifts.get("TSR", 0.0) - shifts.get("NR", 0.0)
        delta[list(spec.eeg.shift_channels)] += diff
        if spec.session_layout == "by_task":
            # NR is recorded in session 1, TSR in session 2, so a session
            # shift is indistinguishable from a class shift.
            delta += spec.eeg.session_shift.get(band, 0.0)
        return _monte_carlo_two_gaussians(
            delta, spec.eeg.sentence_std, max(mc_draws, MIN_MC_DRAWS), seed
        )

    raise UnsupportedDistributionError(
        f"no oracle for feature {feature!r}; supported: omission_rate, "
        f"reading_speed, electrode_features_<band>"
    )


def gaussian_bayes_accuracy_1d(m1: float, s1: float, m2: float, s2: float) -> float:
    """0.5 * integral of max(f1, f2) on a grid with step <= 1e-4 of the
    support range (10 sigma beyond both means)."""
    if s1 <= 0 or s2 <= 0:
        raise ParameterError("standard deviations must be > 0")
    lo = min(m1 - 10.0 * s1, m2 - 10.0 * s2)
    hi = max(m1 + 10.0 * s1, m2 + 10.0 * s2)
    n = int(round(1.0 / GRID_STEP_FRACTION)) + 1
    x = np.linspace(lo, hi, n)
    f1 = np.exp(-0.5 * ((x - m1) / s1) ** 2) / (s1 * np.sqrt(2.0 * np.pi))
    f2 = np.exp(-0.5 * ((x - m2) / s2) ** 2) / (s2 * np.sqrt(2.0 * np.pi))
    return float(0.5 * np.trapezoid(np.maximum(f1, f2), x))


def _monte_carlo_two_gaussians(delta: np.ndarray, sigma: float,
                               draws: int, seed: int) -> BayesOracleResult:
    """Equal-covariance isotropic Gaussians N(0, s^2 I) vs N(delta, s^2 I):
    the Bayes rule is the linear discriminant through delta/2."""
    if sigma <= 0:
        raise ParameterError("sentence_std must be > 0")
    if not np.any(delta):
        return BayesOracleResult(accuracy=0.5, std_error=0.0, method="monte_carlo")
    rng = derived_rng(seed, "bayes_mc")
    per_class = draws // 2
    # project onto the discriminant direction; 1-D sufficient statistic
    norm = float(np.linalg.norm(delta))
    correct = 0
    # class 0 at 0, class 1 at norm along the direction; threshold at norm/2
    z0 = rng.normal(0.0, sigma, per_class)
    z1 = rng.normal(norm, sigma, per_class)
    correct += int(np.sum(z0 < norm / 2.0))
    correct += int(np.sum(z1 >= norm / 2.0))
    total = 2 * per_class
    acc = correct / total
    se = float(np.sqrt(acc * (1.0 - acc) / total))
    return BayesOracleResult(accuracy=acc, std_error=se, method="monte_carlo")
