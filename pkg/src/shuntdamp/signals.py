"""Excitation synthesis and spectral analysis.

Spectral scaling convention (used everywhere in the package): a bin holds the
*peak* amplitude and the *cosine-referenced* phase of the component, so the
series ``A cos(2 pi f t + phi)`` shows up as ``A exp(j phi)`` at bin ``f``.
DC and Nyquist bins hold the plain mean level.

Noise comes from numpy's PCG64 generator (64-bit permuted congruential
generator, fixed algorithm) seeded with the excitation seed, drawn through
``Generator.standard_normal``.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError

DEFAULT_SAMPLE_RATE = 16000.0
DEFAULT_EPOCH_LENGTH = 4096

#: Coherent gain of the periodic Hann window.
HANN_COHERENT_GAIN = 0.5


@dataclass(frozen=True, eq=False)
class TimeSeries:
    sample_rate: float
    samples: np.ndarray

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise DomainError("sample_rate must be > 0")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self):
        return len(self) / self.sample_rate

    @property
    def times(self):
        return np.arange(len(self)) / self.sample_rate


@dataclass(frozen=True, eq=False)
class SpectrumFrame:
    bin_frequencies: np.ndarray
    bins: np.ndarray
    n_samples: int
    sample_rate: float

    def __len__(self):
        return self.bins.shape[0]

    @property
    def resolution(self):
        return self.sample_rate / self.n_samples

    @property
    def amplitudes(self):
        return np.abs(self.bins)


@dataclass(frozen=True)
class ExcitationSpec:
    """Tones ``(frequency_hz, amplitude, phase_rad)`` plus white Gaussian noise."""

    tones: tuple = ()
    noise_rms: float = 0.0
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        tones = tuple(tuple(float(x) for x in t) for t in self.tones)
        for f, a, _ in tones:
            if f <= 0:
                raise DomainError(f"tone frequency must be > 0, got {f}")
            if a < 0:
                raise DomainError(f"tone amplitude must be >= 0, got {a}")
        if self.noise_rms < 0:
            raise DomainError("noise_rms must be >= 0")
        object.__setattr__(self, "tones", tones)


def next_power_of_two(n):
    return 1 << max(int(n) - 1, 0).bit_length()


def synthesize(spec, sample_rate, duration, start_time=0.0, seed=None):
    """Sum of tones plus seeded noise, sampled at ``sample_rate``.

    ``start_time`` shifts the tone phases so consecutive epochs join up;
    the noise stream depends only on ``seed`` (defaulting to ``spec.seed``).
    """
    n = round(duration * sample_rate)
    if n < 2:
        raise DomainError("duration * sample_rate must be >= 2")
    nyquist = sample_rate / 2.0
    t = start_time + np.arange(n) / sample_rate
    x = np.zeros(n)
    for f, a, ph in spec.tones:
        if f >= nyquist:
            raise DomainError(f"tone at {f} Hz is not below Nyquist ({nyquist} Hz)")
        x += a * np.cos(2.0 * np.pi * f * t + ph)
    if spec.noise_rms > 0:
        rng = np.random.Generator(np.random.PCG64(spec.seed if seed is None else seed))
        x += spec.noise_rms * rng.standard_normal(n)
    return TimeSeries(sample_rate=float(sample_rate), samples=x)


def _window(n, window):
    if window in (None, "none"):
        return np.ones(n), 1.0
    if window == "hann":
        return np.hanning(n + 1)[:-1], HANN_COHERENT_GAIN
    raise DomainError(f"unknown window {window!r}")


def spectrum(series, window="none"):
    """Peak-amplitude one-sided spectrum of a real series.

    Series whose length is not a power of two are zero-padded to the next
    power of two before transforming. With a Hann window the bins are divided
    by the window's coherent gain so bin-centred tone amplitudes read true.
    """
    x = np.asarray(series.samples, dtype=float)
    if x.size == 0:
        raise DomainError("empty series")
    n = next_power_of_two(x.size)
    w, gain = _window(x.size, window)
    xw = np.zeros(n)
    xw[: x.size] = x * w
    raw = np.fft.rfft(xw)
    scale = np.full(raw.shape, 2.0 / n)
    scale[0] = 1.0 / n
    if n % 2 == 0:
        scale[-1] = 1.0 / n
    bins = raw * scale / gain
    freqs = np.fft.rfftfreq(n, d=1.0 / series.sample_rate)
    return SpectrumFrame(bin_frequencies=freqs, bins=bins, n_samples=n, sample_rate=series.sample_rate)


def inverse_spectrum(frame):
    """Real series whose unwindowed :func:`spectrum` is ``frame``."""
    n = frame.n_samples
    scale = np.full(frame.bins.shape, 2.0 / n)
    scale[0] = 1.0 / n
    if n % 2 == 0:
        scale[-1] = 1.0 / n
    x = np.fft.irfft(frame.bins / scale, n=n)
    return TimeSeries(sample_rate=frame.sample_rate, samples=x)


def parseval_energy(frame):
    """Sum of squared samples implied by an unwindowed peak-scaled spectrum."""
    n = frame.n_samples
    p = np.abs(frame.bins) ** 2
    weights = np.full(p.shape, 0.5)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    return float(n * np.sum(weights * p))


def phasor_at(frame, frequency):
    """Phasor of the bin nearest ``frequency`` and the fractional bin offset.

    Exact midpoints resolve to the lower bin.
    """
    df = frame.resolution
    fmax = frame.bin_frequencies[-1]
    if not 0.0 <= frequency <= fmax:
        raise DomainError(f"{frequency} Hz outside spectrum range [0, {fmax}] Hz")
    pos = frequency / df
    idx = int(np.ceil(pos - 0.5))
    idx = min(max(idx, 0), len(frame) - 1)
    return complex(frame.bins[idx]), float(pos - idx)
