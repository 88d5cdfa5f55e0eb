import numpy as np
import pytest

from widefeat.stft import hann_window, rfft_bin_frequencies, stft


def full_spectrum_energy(mag_row, window_len):
    """Parseval oracle: total DFT energy from the one-sided magnitudes."""
    interior = mag_row[1:-1]
    return float(mag_row[0] ** 2 + mag_row[-1] ** 2 + 2.0 * np.sum(interior ** 2))


class TestStft:
    def test_sine_peaks_at_its_bin(self):
        rate, window = 1000.0, 128
        k = 16
        f = k * rate / window
        t = np.arange(512) / rate
        mags = stft(np.sin(2 * np.pi * f * t), window, 64)
        assert mags.shape == (1 + (512 - 128) // 64, 65)
        for row in mags:
            assert int(np.argmax(row)) == k

    def test_zero_signal(self):
        mags = stft(np.zeros(256), 64, 32)
        assert np.all(mags == 0.0)

    def test_parseval_per_frame(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(1000)
        window, hop = 256, 128
        mags = stft(x, window, hop)
        w = hann_window(window)
        for frame, row in enumerate(mags):
            seg = x[frame * hop: frame * hop + window] * w
            time_energy = float(seg @ seg)
            assert abs(full_spectrum_energy(row, window) / window - time_energy) \
                / time_energy < 1e-9

    def test_frame_count(self):
        assert stft(np.zeros(100), 64, 16).shape[0] == 1 + (100 - 64) // 16
        assert stft(np.zeros(64), 64, 64).shape[0] == 1

    def test_window_validation(self):
        with pytest.raises(ValueError, match="power of two"):
            stft(np.zeros(100), 48, 16)
        with pytest.raises(ValueError, match="exceeds signal length"):
            stft(np.zeros(32), 64, 16)
        with pytest.raises(ValueError, match="hop"):
            stft(np.zeros(128), 64, 0)
        with pytest.raises(ValueError, match="hop"):
            stft(np.zeros(128), 64, 65)

    def test_bin_frequencies(self):
        freqs = rfft_bin_frequencies(64, 100.0)
        assert freqs[0] == 0.0
        assert freqs[-1] == 50.0
        np.testing.assert_allclose(np.diff(freqs), 100.0 / 64)
