import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shuntdamp.exceptions import DomainError
from shuntdamp.signals import (
    ExcitationSpec,
    TimeSeries,
    inverse_spectrum,
    next_power_of_two,
    parseval_energy,
    phasor_at,
    spectrum,
    synthesize,
)

FS = 16000.0
DF = FS / 4096


def test_bin_centred_tone_reads_amplitude_and_cosine_phase():
    spec = ExcitationSpec(tones=((512 * DF, 0.7, 0.4),))
    frame = spectrum(synthesize(spec, FS, 4096 / FS))
    phasor, offset = phasor_at(frame, 2000.0)
    assert offset == 0.0
    assert abs(phasor) == pytest.approx(0.7, rel=1e-12)
    assert np.angle(phasor) == pytest.approx(0.4, abs=1e-12)


def test_hann_window_coherent_gain_corrected():
    spec = ExcitationSpec(tones=((300 * DF, 1.3, -1.0),))
    frame = spectrum(synthesize(spec, FS, 4096 / FS), window="hann")
    assert abs(phasor_at(frame, 300 * DF)[0]) == pytest.approx(1.3, rel=1e-12)


def test_non_power_of_two_length_is_zero_padded():
    ts = TimeSeries(FS, np.ones(3000))
    frame = spectrum(ts)
    assert frame.n_samples == 4096
    assert frame.bins[0] == pytest.approx(3000 / 4096)


def test_next_power_of_two():
    assert [next_power_of_two(n) for n in (1, 2, 3, 4096, 4097)] == [1, 2, 4, 4096, 8192]


def test_seeded_noise_is_reproducible_and_seed_sensitive():
    spec = ExcitationSpec(noise_rms=0.1, seed=5)
    a = synthesize(spec, FS, 0.1).samples
    b = synthesize(spec, FS, 0.1).samples
    c = synthesize(spec, FS, 0.1, seed=6).samples
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_noise_stream_is_pcg64_standard_normal():
    spec = ExcitationSpec(noise_rms=2.0, seed=42)
    x = synthesize(spec, FS, 8 / FS).samples
    ref = 2.0 * np.random.Generator(np.random.PCG64(42)).standard_normal(8)
    assert np.array_equal(x, ref)


def test_start_time_continues_the_tone():
    spec = ExcitationSpec(tones=((1234.5, 1.0, 0.2),))
    whole = synthesize(spec, FS, 200 / FS).samples
    tail = synthesize(spec, FS, 100 / FS, start_time=100 / FS).samples
    assert tail == pytest.approx(whole[100:], abs=1e-12)


def test_tone_at_nyquist_rejected():
    with pytest.raises(DomainError):
        synthesize(ExcitationSpec(tones=((8000.0, 1.0, 0.0),)), FS, 0.1)


def test_invalid_excitation():
    with pytest.raises(DomainError):
        ExcitationSpec(tones=((-1.0, 1.0, 0.0),))
    with pytest.raises(DomainError):
        ExcitationSpec(noise_rms=-1.0)


def test_phasor_midpoint_resolves_to_lower_bin():
    frame = spectrum(TimeSeries(FS, np.arange(16.0)))
    df = frame.resolution
    _, off = phasor_at(frame, 2.5 * df)
    assert off == pytest.approx(0.5)
    with pytest.raises(DomainError):
        phasor_at(frame, FS)


def test_empty_series_rejected():
    with pytest.raises(DomainError):
        spectrum(TimeSeries(FS, np.array([])))


@given(arrays(np.float64, st.sampled_from([8, 64, 256]),
              elements=st.floats(min_value=-1e3, max_value=1e3)))
def test_inverse_spectrum_roundtrip(x):
    back = inverse_spectrum(spectrum(TimeSeries(FS, x))).samples
    assert back == pytest.approx(x, abs=1e-9)


@given(arrays(np.float64, st.sampled_from([8, 64, 256]),
              elements=st.floats(min_value=-1e3, max_value=1e3)))
def test_parseval(x):
    assert parseval_energy(spectrum(TimeSeries(FS, x))) == pytest.approx(float(np.sum(x * x)), rel=1e-9, abs=1e-9)
