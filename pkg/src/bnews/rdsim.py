"""Simulation of one-dimensional random difference equations with bounded noise.

The generator is pinned: numpy's PCG64 behind ``default_rng``, so a given
(seed, inputs) pair replays bit-for-bit across runs and worker counts.
Parallel sweeps derive child seeds with :func:`split_seeds`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.signal import lfilter

from .errors import DivergenceError, InvalidArgumentError

#: Identity of the pseudorandom generator recorded in output metadata.
PRNG_ID = "numpy-pcg64"

DEFAULT_BURN_IN = 1000


@dataclass(frozen=True)
class NoiseModel:
    """I.i.d. noise supported on a compact interval.

    kind 'uniform' draws from [a, b]; kind 'scaled-uniform' draws from
    [0, scale] (the unit-interval noise of the general algorithm, scaled).
    """

    kind: str = "uniform"
    a: float = -1.0
    b: float = 1.0

    @classmethod
    def uniform(cls, a, b):
        if not a < b:
            raise InvalidArgumentError("noise bounds must satisfy a < b")
        return cls("uniform", float(a), float(b))

    @classmethod
    def scaled_uniform(cls, scale):
        if scale <= 0:
            raise InvalidArgumentError("noise scale must be positive")
        return cls("scaled-uniform", 0.0, float(scale))

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def mean(self):
        return 0.5 * (self.a + self.b)

    def sample(self, rng, n):
        return rng.uniform(self.a, self.b, size=n)


@dataclass(frozen=True)
class RandomMap:
    """One-step map h(x, xi) with its lower extremal decomposition.

    ``f_minus`` is the minimum of h over the noise support and ``eps_img``
    bounds the image-interval length; h(x, xi) - f_minus(x) must lie in
    [0, eps_img(x)].  ``affine`` marks h(x, xi) = a*x + b + xi, which
    simulate() exploits with an exact vectorised recurrence.
    """

    h: Callable[[float, float], float]
    f_minus: Optional[Callable] = None
    eps_img: Optional[Callable] = None
    name: str = "custom"
    affine: Optional[tuple[float, float]] = None


def additive_random_map(f, noise: "NoiseModel", name="additive",
                        affine=None) -> RandomMap:
    """Map h(x, xi) = f(x) + xi for noise on [a, b]; f_minus = f + a."""
    a, b = noise.support
    return RandomMap(
        h=lambda x, xi: f(x) + xi,
        f_minus=lambda x: f(x) + a,
        eps_img=lambda x: (b - a) * np.ones_like(np.asarray(x, dtype=float)),
        name=name,
        affine=affine,
    )


@dataclass(frozen=True)
class TimeSeries:
    samples: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or len(arr) < 1:
            raise InvalidArgumentError("a series needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("series contains non-finite samples")
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return len(self.samples)


def split_seeds(seed, n):
    """Deterministic child seeds for n parallel runs (SeedSequence spawn)."""
    return [int(ss.generate_state(1)[0]) for ss in np.random.SeedSequence(seed).spawn(n)]


def simulate(
    random_map: RandomMap,
    noise: NoiseModel,
    x0: float,
    n_steps: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    guard: Optional[tuple[float, float]] = None,
) -> TimeSeries:
    """Iterate x_{i+1} = h(x_i, xi_i) with a seeded PCG64 stream.

    Returns the n_steps samples after discarding burn_in leading ones.
    A trajectory leaving the guard interval raises DivergenceError with
    the escape index (counted from x0).
    """
    if n_steps < 1:
        raise InvalidArgumentError("n_steps must be at least 1")
    if burn_in < 0:
        raise InvalidArgumentError("burn_in must be nonnegative")
    total = burn_in + n_steps
    rng = np.random.default_rng(seed)
    xi = noise.sample(rng, total)
    if random_map.affine is not None:
        a, b = random_map.affine
        drive = b + xi
        drive[0] += a * x0
        xs = lfilter([1.0], [1.0, -a], drive)
    else:
        xs = np.empty(total)
        h = random_map.h
        x = float(x0)
        for i in range(total):
            x = h(x, xi[i])
            xs[i] = x
    if guard is not None:
        bad = np.flatnonzero((xs < guard[0]) | (xs > guard[1]))
        if len(bad):
            raise DivergenceError(
                f"trajectory escaped guard {guard} at step {bad[0] + 1}",
                escape_index=int(bad[0] + 1),
            )
    meta = {
        "seed": int(seed),
        "map": random_map.name,
        "prng": PRNG_ID,
        "noise_kind": noise.kind,
        "noise_a": noise.a,
        "noise_b": noise.b,
        "x0": float(x0),
        "burn_in": int(burn_in),
        "n_steps": int(n_steps),
        # positive stationary density in the interior of the support is
        # assumed, not checked; downstream estimates rely on it
        "assumes_positive_density": True,
    }
    return TimeSeries(xs[burn_in:], meta)


def empirical_support(series: TimeSeries) -> tuple[float, float]:
    """Sample min/max: an inner approximation of the invariant set visited."""
    return float(np.min(series.samples)), float(np.max(series.samples))


def occupancy(series: TimeSeries, interval) -> tuple[int, float]:
    """Count and fraction of samples inside [lo, hi]."""
    lo, hi = float(interval[0]), float(interval[1])
    if not np.isfinite(lo) or not np.isfinite(hi):
        raise InvalidArgumentError("interval bounds must be finite")
    if hi < lo:
        return 0, 0.0
    count = int(np.count_nonzero((series.samples >= lo) & (series.samples <= hi)))
    return count, count / len(series)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

BNTS_MAGIC = b"BNTS"
BNTS_VERSION = 1


def write_csv(path, series: TimeSeries):
    with open(path, "w") as fh:
        for key, val in series.meta.items():
            fh.write(f"# {key}={val}\n")
        fh.write("x\n")
        for x in series.samples:
            fh.write(f"{float(x)!r}\n")


def read_csv(path) -> TimeSeries:
    meta = {}
    samples = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
            elif line != "x":
                samples.append(float(line))
    return TimeSeries(np.array(samples), meta)


def write_bnts(path, data: np.ndarray, channels=1):
    """Compact binary dump: magic, version byte, channel byte, count, floats."""
    arr = np.ascontiguousarray(data, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(BNTS_MAGIC)
        fh.write(bytes([BNTS_VERSION, channels]))
        fh.write(np.array(arr.size // channels, dtype="<u8").tobytes())
        fh.write(arr.tobytes())


def read_bnts(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != BNTS_MAGIC:
            raise InvalidArgumentError(f"not a BNTS file: bad magic {magic!r}")
        version, channels = fh.read(1)[0], fh.read(1)[0]
        if version != BNTS_VERSION:
            raise InvalidArgumentError(f"unsupported BNTS version {version}")
        count = int(np.frombuffer(fh.read(8), dtype="<u8")[0])
        data = np.frombuffer(fh.read(count * channels * 8), dtype="<f8")
    if channels > 1:
        return data.reshape(count, channels)
    return data.copy()
