#!/usr/bin/env python3
"""Independent reference implementation of the short-time objective
intelligibility measure, used to cross-check the Rust implementation.

Usage: stoi_reference.py <dir with clean_XX.wav / proc_XX.wav pairs>
"""

import sys
import wave
import glob
import os

import numpy as np
from scipy.signal import resample_poly

FS = 10000
N_FRAME = 256
NFFT = 512
NUM_BANDS = 15
MIN_FREQ = 150.0
SEG_LEN = 30
BETA = -15.0
DYN_RANGE = 40.0
EPS = np.finfo(np.float64).eps


def read_wav(path):
    with wave.open(path, "rb") as w:
        assert w.getsampwidth() == 2 and w.getnchannels() == 1
        fs = w.getframerate()
        data = np.frombuffer(w.readframes(w.getnframes()), dtype="<i2")
        return fs, data.astype(np.float64) / 32768.0


def design_filter(p, q):
    pqmax = max(p, q)
    cutoff = 1.0 / (2.0 * pqmax)
    roll_off = cutoff / 10.0
    rejection_db = 60.0
    half = int(np.ceil(rejection_db / (22.9 * roll_off)))
    t = np.arange(-half, half + 1)
    ideal = 2 * p * cutoff * np.sinc(2 * cutoff * t)
    beta = 0.1102 * (rejection_db - 8.7)
    return np.kaiser(2 * half + 1, beta) * ideal


def resample(x, to_rate, from_rate):
    g = np.gcd(to_rate, from_rate)
    up, down = to_rate // g, from_rate // g
    if up == down:
        return x
    h = design_filter(up, down)
    return resample_poly(x, up, down, window=h / np.sum(h))


def trimmed_hann(n):
    return np.hanning(n + 2)[1:-1]


def remove_silent_frames(x, y, dyn_range, framelen, hop):
    w = trimmed_hann(framelen)
    starts = range(0, len(x) - framelen + 1, hop)
    x_frames = np.array([w * x[i : i + framelen] for i in starts])
    y_frames = np.array([w * y[i : i + framelen] for i in starts])
    energies = 20 * np.log10(np.linalg.norm(x_frames, axis=1) + EPS)
    mask = (np.max(energies) - dyn_range - energies) < 0
    x_frames, y_frames = x_frames[mask], y_frames[mask]
    n_kept = x_frames.shape[0]
    out_len = (n_kept - 1) * hop + framelen
    x_sil = np.zeros(out_len)
    y_sil = np.zeros(out_len)
    for i in range(n_kept):
        x_sil[i * hop : i * hop + framelen] += x_frames[i]
        y_sil[i * hop : i * hop + framelen] += y_frames[i]
    return x_sil, y_sil


def stft_mag_sq(x):
    hop = N_FRAME // 2
    w = trimmed_hann(N_FRAME)
    frames = [
        np.fft.rfft(w * x[i : i + N_FRAME], n=NFFT)
        for i in range(0, len(x) - N_FRAME + 1, hop)
    ]
    return np.abs(np.array(frames)) ** 2


def third_octave_matrix():
    f = np.linspace(0, FS, NFFT + 1)[: NFFT // 2 + 1]
    obm = np.zeros((NUM_BANDS, len(f)))
    for k in range(NUM_BANDS):
        f_low = MIN_FREQ * 2 ** ((2 * k - 1) / 6)
        f_high = MIN_FREQ * 2 ** ((2 * k + 1) / 6)
        lo = int(np.argmin((f - f_low) ** 2))
        hi = int(np.argmin((f - f_high) ** 2))
        obm[k, lo:hi] = 1
    return obm


def stoi(clean, processed, fs):
    x = resample(clean, FS, fs)
    y = resample(processed, FS, fs)
    x, y = remove_silent_frames(x, y, DYN_RANGE, N_FRAME, N_FRAME // 2)
    x_spec = stft_mag_sq(x)
    y_spec = stft_mag_sq(y)
    obm = third_octave_matrix()
    x_tob = np.sqrt(x_spec @ obm.T)  # (frames, bands)
    y_tob = np.sqrt(y_spec @ obm.T)

    n_frames = x_tob.shape[0]
    clip_factor = 1 + 10 ** (-BETA / 20)
    total = 0.0
    n_seg = n_frames - SEG_LEN + 1
    for m in range(n_seg):
        xs = x_tob[m : m + SEG_LEN].T  # (bands, SEG_LEN)
        ys = y_tob[m : m + SEG_LEN].T
        alpha = np.linalg.norm(xs, axis=1, keepdims=True) / (
            np.linalg.norm(ys, axis=1, keepdims=True) + EPS
        )
        yp = np.minimum(ys * alpha, xs * clip_factor)
        xc = xs - xs.mean(axis=1, keepdims=True)
        yc = yp - yp.mean(axis=1, keepdims=True)
        xc = xc / (np.linalg.norm(xc, axis=1, keepdims=True) + EPS)
        yc = yc / (np.linalg.norm(yc, axis=1, keepdims=True) + EPS)
        total += float(np.sum(xc * yc))
    return total / (n_seg * NUM_BANDS)


def main():
    fixture_dir = sys.argv[1]
    cleans = sorted(glob.glob(os.path.join(fixture_dir, "clean_*.wav")))
    for clean_path in cleans:
        proc_path = clean_path.replace("clean_", "proc_")
        fs, clean = read_wav(clean_path)
        fs2, proc = read_wav(proc_path)
        assert fs == fs2
        score = stoi(clean, proc, fs)
        idx = os.path.basename(clean_path)[6:8]
        print(f"fixture {idx}: stoi = {score:.6f}")


if __name__ == "__main__":
    main()
