"""Dyadic frequency machinery on uniformly sampled, windowed paths.

The continuous transform is approximated by the discrete transform of the
windowed path on a periodic extension; the frequency grid is
xi_m = 2 pi m / L.  Spectra are stored in synthesis normalisation,
f(x_j) = sum_m c_m exp(i xi_m x_j), so filtering and multiplier application
are exact grid operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class SampledPath:
    """d real channels on a uniform grid of M points over [0, L)."""

    channels: np.ndarray  # shape (d, M)
    length: float
    windowed: bool = False

    def __post_init__(self):
        arr = np.asarray(self.channels, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        object.__setattr__(self, "channels", arr)
        if arr.ndim != 2 or arr.shape[1] < 2:
            raise PathError("need a (d, M) sample array with M >= 2")
        if self.length <= 0:
            raise PathError("path length must be positive")

    @property
    def d(self) -> int:
        return self.channels.shape[0]

    @property
    def m(self) -> int:
        return self.channels.shape[1]

    @property
    def dt(self) -> float:
        return self.length / self.m

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.m) * self.dt

    def xi_grid(self) -> np.ndarray:
        """Angular frequencies 2 pi m / L in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.m, d=self.dt)

    def channel(self, i: int) -> np.ndarray:
        """1-based channel accessor."""
        if not 1 <= i <= self.d:
            raise PathError(f"channel {i} out of range 1..{self.d}")
        return self.channels[i - 1]


def read_path_csv(path) -> SampledPath:
    """Load a path from CSV with header t,x1,...,xd and uniform t spacing."""
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim != 2 or data.shape[1] < 2:
        raise PathError(f"{path}: need columns t,x1,...,xd")
    t = data[:, 0]
    dt = np.diff(t)
    if len(dt) == 0 or dt[0] <= 0:
        raise PathError(f"{path}: need at least two increasing times")
    mean_dt = float(np.mean(dt))
    if np.max(np.abs(dt - mean_dt)) > 1e-9 * abs(mean_dt):
        raise PathError(f"{path}: time grid is not uniform (tolerance 1e-9 relative)")
    length = float(t[-1] - t[0] + mean_dt)
    return SampledPath(channels=data[:, 1:].T.copy(), length=length)


def write_path_csv(path, sp: SampledPath) -> None:
    header = "t," + ",".join(f"x{i}" for i in range(1, sp.d + 1))
    rows = np.column_stack([sp.times, sp.channels.T])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


# -- window -------------------------------------------------------------------

def _mollifier_ramp(u: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    f = np.zeros_like(u)
    pos = u > 0
    f[pos] = np.exp(-1.0 / u[pos])
    g = np.zeros_like(u)
    neg = (1.0 - u) > 0
    g[neg] = np.exp(-1.0 / (1.0 - u[neg]))
    return f / (f + g)


def window_weights(m: int, margin: float) -> np.ndarray:
    """Smooth plateau window: exactly 0 on the outer margin/2 fringes, 1 on
    the central (1 - 2 margin) portion, mollifier ramps between."""
    if not 0.0 < margin < 0.4:
        raise PathError("window margin must lie in (0, 0.4)")
    x = np.arange(m) / m
    up = _mollifier_ramp((x - margin / 2.0) / (margin / 2.0))
    down = _mollifier_ramp(((1.0 - margin / 2.0) - x) / (margin / 2.0))
    return up * down


def window_path(raw: SampledPath, margin: float = 0.25) -> SampledPath:
    """Multiply by the smooth cutoff; the result is compactly supported inside
    the period and safe for periodic spectral treatment."""
    w = window_weights(raw.m, margin)
    return SampledPath(channels=raw.channels * w[None, :], length=raw.length,
                       windowed=True)


def plateau_slice(m: int, margin: float) -> tuple[int, int]:
    """Index range [lo, hi) on which the window equals 1."""
    lo = int(math.ceil(margin * m))
    hi = int(math.floor((1.0 - margin) * m))
    return lo, hi


# -- dyadic partitions -----------------------------------------------------------

def default_bump(xi: np.ndarray) -> np.ndarray:
    """Even smooth plateau: 1 on [-1, 1], 0 outside (-2, 2)."""
    a = np.abs(np.asarray(xi, dtype=float))
    return _mollifier_ramp(2.0 - a)


def _validate_bump(bump: Callable[[np.ndarray], np.ndarray]) -> None:
    probe_in = np.linspace(-1.0, 1.0, 41)
    if not np.allclose(bump(probe_in), 1.0, atol=1e-12):
        raise PathError("base bump must equal 1 on [-1, 1]")
    probe_out = np.array([-2.5, -2.0001, 2.0001, 2.5, 8.0])
    if np.max(np.abs(bump(probe_out))) > 1e-12:
        raise PathError("base bump must vanish outside [-2, 2]")
    probe = np.linspace(-2.2, 2.2, 101)
    if np.max(np.abs(bump(probe) - bump(-probe))) > 1e-12:
        raise PathError("base bump must be even")


@dataclass(frozen=True)
class DyadicPartition:
    """Tabulated dyadic partition of unity on the frequency line.

    Sharp blocks are half-open: block 0 is |xi| < 1 and block +-k is
    sign-matched 2^(k-1) <= |xi| < 2^k, so every grid frequency lies in
    exactly one block.  Smooth blocks follow the telescoping construction
    from the base bump; block k is supported in +-[2^(k-1), 5 2^(k-1)].
    """

    kind: str
    k_max: int
    bump: Callable[[np.ndarray], np.ndarray] = field(default=default_bump)

    def __post_init__(self):
        if self.kind not in ("sharp", "smooth"):
            raise PathError(f"unknown partition kind {self.kind!r}")
        if self.k_max < 0:
            raise PathError("k_max must be nonnegative")

    def blocks(self) -> range:
        return range(-self.k_max, self.k_max + 1)

    def weight(self, k: int, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.kind == "sharp":
            if k == 0:
                return (np.abs(xi) < 1.0).astype(float)
            sign_ok = xi >= 1.0 if k > 0 else xi <= -1.0
            a = np.abs(xi)
            kk = abs(k)
            return (sign_ok & (a >= 2.0 ** (kk - 1)) & (a < 2.0 ** kk)).astype(float)
        if k == 0:
            return self.bump(xi)
        kk = abs(k)
        tele = self.bump(2.0 ** (-kk) * xi) - self.bump(2.0 ** (1 - kk) * xi)
        side = xi > 0 if k > 0 else xi < 0
        return np.where(side, tele, 0.0)

    def block_index(self, xi: np.ndarray) -> np.ndarray:
        """Sharp block index per frequency (defined for the sharp partition)."""
        xi = np.asarray(xi, dtype=float)
        a = np.abs(xi)
        k = np.zeros(xi.shape, dtype=int)
        big = a >= 1.0
        k[big] = (np.floor(np.log2(a[big])).astype(int) + 1) * np.sign(xi[big]).astype(int)
        return k

    def coverage(self, xi: np.ndarray) -> np.ndarray:
        """Boolean mask of frequencies covered by blocks |k| <= k_max."""
        return np.abs(np.asarray(xi)) < 2.0 ** self.k_max


def make_partition(kind: str, k_max: int,
                   bump: Callable[[np.ndarray], np.ndarray] | None = None) -> DyadicPartition:
    if bump is None:
        bump = default_bump
    else:
        _validate_bump(bump)
    return DyadicPartition(kind=kind, k_max=k_max, bump=bump)


# -- band decomposition ------------------------------------------------------------

@dataclass(frozen=True)
class BandSignal:
    """One dyadic block of one channel: synthesis coefficients plus samples."""

    k: int
    coeffs: np.ndarray  # complex, FFT order, synthesis normalisation
    time: np.ndarray    # complex samples

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.time)))


def synthesize(coeffs: np.ndarray) -> np.ndarray:
    return np.fft.ifft(coeffs) * coeffs.shape[-1]


def analyze(samples: np.ndarray) -> np.ndarray:
    return np.fft.fft(samples) / samples.shape[-1]


class BandDecomposition:
    """Per channel, the dyadic bands of a windowed path up to |k| <= k_max.

    Bands whose mask captures no grid mode are dropped.  The energy of modes
    beyond the covered range is recorded, never silently lost.
    """

    def __init__(self, path: SampledPath, partition: DyadicPartition):
        if not path.windowed:
            raise PathError("decompose windowed paths (see window_path)")
        self.path = path
        self.partition = partition
        self.xi = path.xi_grid()
        self.bands: list[dict[int, BandSignal]] = []
        tail = 0.0
        covered = partition.coverage(self.xi)
        for ch in range(path.d):
            coeffs = analyze(path.channels[ch])
            per_block: dict[int, BandSignal] = {}
            for k in partition.blocks():
                w = partition.weight(k, self.xi)
                if not np.any(w != 0.0):
                    continue
                masked = coeffs * w
                if not np.any(masked != 0.0):
                    continue
                per_block[k] = BandSignal(k=k, coeffs=masked, time=synthesize(masked))
            self.bands.append(per_block)
            tail += float(np.sum(np.abs(coeffs[~covered]) ** 2))
        self.tail_energy = tail

    @property
    def d(self) -> int:
        return self.path.d

    def band(self, channel: int, k: int) -> BandSignal | None:
        """1-based channel, signed block index; None when the band is empty."""
        return self.bands[channel - 1].get(k)

    def occupied_blocks(self, channel: int) -> list[int]:
        return sorted(self.bands[channel - 1])

    def reconstruct(self, channel: int) -> np.ndarray:
        total = np.zeros(self.path.m, dtype=complex)
        for sig in self.bands[channel - 1].values():
            total = total + sig.time
        return total


def apply_multiplier(symbol: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """Apply a tabulated frequency symbol: inverse transform of symbol times
    the forward transform.  Exact on the grid; composition of two applications
    equals applying the pointwise product of symbols."""
    samples = np.asarray(samples)
    return synthesize(analyze(samples) * np.asarray(symbol))


def besov_norm(samples: np.ndarray, alpha: float, partition: DyadicPartition,
               length: float) -> float:
    """Hoelder-Besov norm estimate: max over blocks of 2^(alpha |k|) times the
    sup of the block signal."""
    if not 0.0 < alpha < 1.0:
        raise PathError("alpha must lie in (0, 1)")
    samples = np.asarray(samples, dtype=float)
    m = samples.shape[0]
    xi = 2.0 * np.pi * np.fft.fftfreq(m, d=length / m)
    coeffs = analyze(samples)
    best = 0.0
    for k in partition.blocks():
        w = partition.weight(k, xi)
        if not np.any(w != 0.0):
            continue
        band = synthesize(coeffs * w)
        best = max(best, 2.0 ** (alpha * abs(k)) * float(np.max(np.abs(band))))
    return best


def band_sups(samples: np.ndarray, partition: DyadicPartition, length: float) -> dict[int, float]:
    """Per-block sup of the band signals (the raw material of the norm)."""
    samples = np.asarray(samples, dtype=float)
    m = samples.shape[0]
    xi = 2.0 * np.pi * np.fft.fftfreq(m, d=length / m)
    coeffs = analyze(samples)
    out: dict[int, float] = {}
    for k in partition.blocks():
        w = partition.weight(k, xi)
        if not np.any(w != 0.0):
            continue
        out[k] = float(np.max(np.abs(synthesize(coeffs * w))))
    return out


def s0_seminorm(values: np.ndarray, xi: np.ndarray, l: int = 1) -> float:
    """Order-zero symbol seminorm, by finite differences on a tabulated symbol:
    max over derivative orders j <= l+5 of sup (1+|xi|)^j |m^(j)(xi)|.

    Diagnostic only: used to confirm a multiplier family is uniformly bounded;
    discontinuous symbols blow up as the tabulation refines.
    """
    values = np.asarray(values, dtype=float)
    xi = np.asarray(xi, dtype=float)
    h = xi[1] - xi[0]
    if not np.allclose(np.diff(xi), h, rtol=1e-12):
        raise PathError("s0_seminorm needs a uniform xi grid")
    best = float(np.max(np.abs(values)))
    deriv = values
    for j in range(1, l + 6):
        deriv = np.gradient(deriv, h)
        best = max(best, float(np.max((1.0 + np.abs(xi)) ** j * np.abs(deriv))))
    return best
