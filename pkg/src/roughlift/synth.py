"""Deterministic synthetic test paths.

All generators return raw (unwindowed) paths over [0, 2 pi) sampled at grid
frequencies, so dyadic blocks line up exactly with the tone lattice.
"""

from __future__ import annotations

import math

import numpy as np

from .besov import PathError, SampledPath

LENGTH = 2.0 * np.pi


def weierstrass_path(m: int, d: int = 2, alpha: float = 0.3,
                     seed: int = 0, j_top: int | None = None) -> SampledPath:
    """Lacunary cosine series with amplitude 2^(-alpha j) at frequency 2^j.

    ``j_top`` defaults to log2(m) - 3, keeping the content two octaves under
    the Nyquist block; phases are drawn once per (seed, channel, scale).
    """
    if not 0.0 < alpha < 1.0:
        raise PathError("alpha must lie in (0, 1)")
    if j_top is None:
        j_top = max(1, int(math.log2(m)) - 3)
    rng = np.random.default_rng(seed)
    x = np.arange(m) * (LENGTH / m)
    chans = []
    for _ in range(d):
        phases = rng.uniform(0.0, 2.0 * np.pi, size=j_top + 1)
        chans.append(sum(2.0 ** (-alpha * j) * np.cos(2.0 ** j * x + phases[j])
                         for j in range(j_top + 1)))
    return SampledPath(channels=np.array(chans), length=LENGTH)


def bandnoise_path(m: int, d: int = 2, alpha: float = 0.3,
                   seed: int = 0, k_top: int | None = None) -> SampledPath:
    """Random-phase noise with flat 2^(-alpha k) block sups."""
    if not 0.0 < alpha < 1.0:
        raise PathError("alpha must lie in (0, 1)")
    if k_top is None:
        k_top = max(2, int(math.log2(m)) - 2)
    rng = np.random.default_rng(seed)
    chans = np.zeros((d, m))
    coeffs = np.zeros(m, dtype=complex)
    for ch in range(d):
        coeffs[:] = 0.0
        for k in range(1, k_top + 1):
            lo_m, hi_m = 2 ** (k - 1), min(2 ** k, m // 2)
            if lo_m >= hi_m:
                continue
            n_modes = hi_m - lo_m
            amp = 2.0 ** (-alpha * k) / math.sqrt(n_modes)
            phases = rng.uniform(0.0, 2.0 * np.pi, size=n_modes)
            coeffs[lo_m:hi_m] = 0.5 * amp * np.exp(1j * phases)
        # hermitian completion keeps samples real
        full = coeffs.copy()
        full[-1:0:-1] += np.conj(coeffs[1:])
        chans[ch] = (np.fft.ifft(full) * m).real
    return SampledPath(channels=chans, length=LENGTH)


def smoothpoly_path(m: int, d: int = 2, seed: int = 0) -> SampledPath:
    """Low-order polynomial channels with O(1) coefficients."""
    rng = np.random.default_rng(seed)
    u = np.arange(m) / m
    chans = []
    for _ in range(d):
        coeffs = rng.uniform(-1.0, 1.0, size=4)
        chans.append(sum(c * u ** (j + 1) for j, c in enumerate(coeffs)))
    return SampledPath(channels=np.array(chans), length=LENGTH)


def trig_poly_path(m: int, freqs: list[list[int]],
                   amps: list[list[float]] | None = None) -> SampledPath:
    """Exactly band-limited trigonometric channels at integer grid tones.

    These are periodic-smooth without windowing, so they are marked window
    ready: every identity the window would buy (zero-mean derivative,
    periodization safety) already holds exactly.
    """
    x = np.arange(m) * (LENGTH / m)
    chans = []
    for ch, fs in enumerate(freqs):
        total = np.zeros(m)
        for j, f in enumerate(fs):
            a = 1.0 if amps is None else amps[ch][j]
            total = total + a * (np.sin(f * x) if (ch + j) % 2 == 0 else np.cos(f * x))
        chans.append(total)
    return SampledPath(channels=np.array(chans), length=LENGTH, windowed=True)


GENERATORS = {
    "weierstrass": weierstrass_path,
    "bandnoise": bandnoise_path,
    "smoothpoly": smoothpoly_path,
}


def generate(kind: str, m: int, d: int, alpha: float, seed: int) -> SampledPath:
    if kind not in GENERATORS:
        raise PathError(f"unknown path kind {kind!r}; pick one of {sorted(GENERATORS)}")
    if kind == "smoothpoly":
        return smoothpoly_path(m, d=d, seed=seed)
    return GENERATORS[kind](m, d=d, alpha=alpha, seed=seed)
