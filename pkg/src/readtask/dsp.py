"""Band-pass filtering, Hilbert envelopes, and per-segment band power.

The extraction chain for one sentence and one frequency band:

1. zero-phase 4th-order Butterworth band-pass of the continuous signal,
2. Hilbert envelope (magnitude of the analytic signal) of the filtered
   signal, computed once for the whole sentence,
3. mean of the envelope over the union of the requested time segments
   (fixations, or the full sentence), per channel.

"Power" defaults to mean Hilbert amplitude in µV; set
``power="amplitude_squared"`` on :class:`DspConfig` for squared amplitude.
Edges carry filter transients, so quantitative checks should look at the
central region of a signal; segment extraction at sentence boundaries is
protected by the reflection padding `sosfiltfilt` applies before filtering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .errors import NoFixationsError, NumericError, ParameterError, SignalLengthError

FILTER_ORDER = 4
MIN_HILBERT_LENGTH = 16


@dataclass(frozen=True)
class FrequencyBand:
    name: str
    low_hz: float
    high_hz: float

    def check(self, sample_rate_hz: float) -> None:
        if not 0.0 < self.low_hz < self.high_hz:
            raise ParameterError(
                f"band {self.name!r}: need 0 < low < high, got "
                f"({self.low_hz}, {self.high_hz})"
            )
        if self.high_hz >= sample_rate_hz / 2.0:
            raise ParameterError(
                f"band {self.name!r}: high edge {self.high_hz} Hz is at or above "
                f"Nyquist ({sample_rate_hz / 2.0} Hz)"
            )


BANDS: dict[str, FrequencyBand] = {
    "theta": FrequencyBand("theta", 4.0, 8.0),
    "alpha": FrequencyBand("alpha", 8.5, 13.0),
    "beta": FrequencyBand("beta", 13.5, 30.0),
    "gamma": FrequencyBand("gamma", 30.5, 49.5),
    "broadband": FrequencyBand("broadband", 0.1, 50.0),
}

CANONICAL_BANDS = ("theta", "alpha", "beta", "gamma")


def split_band(band: FrequencyBand) -> tuple[FrequencyBand, FrequencyBand]:
    """Lower and upper halves of a band, split at the midpoint frequency
    (the 8-sub-band option)."""
    mid = 0.5 * (band.low_hz + band.high_hz)
    return (
        FrequencyBand(f"{band.name}1", band.low_hz, mid),
        FrequencyBand(f"{band.name}2", mid, band.high_hz),
    )


@dataclass(frozen=True)
class DspConfig:
    power: str = "amplitude"  # or "amplitude_squared"
    subbands: int = 4  # 4 canonical bands, or 8 half-bands

    def check(self) -> None:
        if self.power not in ("amplitude", "amplitude_squared"):
            raise ParameterError(
                f"power must be 'amplitude' or 'amplitude_squared', got {self.power!r}"
            )
        if self.subbands not in (4, 8):
            raise ParameterError(f"subbands must be 4 or 8, got {self.subbands}")


def resolve_band(band: str | FrequencyBand) -> FrequencyBand:
    if isinstance(band, FrequencyBand):
        return band
    try:
        return BANDS[band]
    except KeyError:
        raise ParameterError(
            f"unknown band {band!r}; expected one of {tuple(BANDS)}"
        ) from None


def bandpass(signal: np.ndarray, band: str | FrequencyBand,
             sample_rate_hz: float) -> np.ndarray:
    """Zero-phase Butterworth band-pass along the last axis.

    Same length as the input: the filter runs forward then backward, which
    cancels the phase response (peak cross-correlation lag 0).
    """
    band = resolve_band(band)
    if not sample_rate_hz > 0:
        raise ParameterError("sample_rate_hz must be > 0")
    band.check(sample_rate_hz)
    x = np.asarray(signal, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NumericError("bandpass input must be finite")
    sos = butter(FILTER_ORDER, [band.low_hz, band.high_hz], btype="bandpass",
                 fs=sample_rate_hz, output="sos")
    base_padlen = 3 * (2 * sos.shape[0] + 1)
    if x.shape[-1] <= base_padlen:
        raise SignalLengthError(
            f"signal length {x.shape[-1]} too short for zero-phase filtering "
            f"(needs > {base_padlen} samples)"
        )
    # Reflect-pad for ~3 periods of the low band edge so narrow-band ringing
    # settles outside the signal; capped at the signal length.
    padlen = min(
        x.shape[-1] - 1,
        max(base_padlen, int(3.0 * sample_rate_hz / band.low_hz)),
    )
    return sosfiltfilt(sos, x, axis=-1, padlen=padlen)


def hilbert_envelope(signal: np.ndarray) -> np.ndarray:
    """Magnitude of the analytic signal along the last axis.

    Frequency-domain construction: zero the negative frequencies, double
    the positive ones, keep DC (and Nyquist for even lengths) untouched.
    """
    x = np.asarray(signal, dtype=float)
    n = x.shape[-1]
    if n < MIN_HILBERT_LENGTH:
        raise SignalLengthError(
            f"hilbert_envelope needs >= {MIN_HILBERT_LENGTH} samples, got {n}"
        )
    if not np.all(np.isfinite(x)):
        raise NumericError("hilbert_envelope input must be finite")
    spectrum = np.fft.fft(x, axis=-1)
    gain = np.zeros(n)
    if n % 2 == 0:
        gain[0] = 1.0
        gain[n // 2] = 1.0
        gain[1:n // 2] = 2.0
    else:
        gain[0] = 1.0
        gain[1:(n + 1) // 2] = 2.0
    analytic = np.fft.ifft(spectrum * gain, axis=-1)
    return np.abs(analytic)


def segment_samples(onset_ms: float, duration_ms: float,
                    sample_rate_hz: float) -> tuple[int, int]:
    start = int(round(onset_ms / 1000.0 * sample_rate_hz))
    stop = int(round((onset_ms + duration_ms) / 1000.0 * sample_rate_hz))
    return start, stop


def segment_band_power(
    eeg: np.ndarray,
    band: str | FrequencyBand,
    sample_rate_hz: float,
    segments: list[tuple[float, float]],
    config: DspConfig | None = None,
) -> np.ndarray:
    """Per-channel mean band envelope over the union of (onset_ms,
    duration_ms) segments.

    ``eeg`` is channels x time. The whole-signal envelope is computed once,
    then averaged over the union of segment samples, so overlapping or
    duplicated segments do not double-count.
    """
    config = config or DspConfig()
    config.check()
    x = np.atleast_2d(np.asarray(eeg, dtype=float))
    n = x.shape[-1]
    if not segments:
        raise NoFixationsError("no fixations: empty segment list")
    duration_ms_total = n / sample_rate_hz * 1000.0
    mask = np.zeros(n, dtype=bool)
    for onset_ms, duration_ms in segments:
        if onset_ms < -1e-9 or duration_ms <= 0:
            raise ParameterError(
                f"segment ({onset_ms}, {duration_ms}) must have onset >= 0 "
                f"and duration > 0"
            )
        if onset_ms + duration_ms > duration_ms_total + 1e-6:
            raise ParameterError(
                f"segment ({onset_ms}, {duration_ms}) ms extends past the "
                f"signal ({duration_ms_total:.1f} ms)"
            )
        start, stop = segment_samples(onset_ms, duration_ms, sample_rate_hz)
        stop = min(stop, n)
        mask[start:stop] = True
    if not mask.any():
        raise ParameterError("segments cover zero samples")

    env = hilbert_envelope(bandpass(x, band, sample_rate_hz))
    if config.power == "amplitude_squared":
        env = env ** 2
    return env[:, mask].mean(axis=1)
