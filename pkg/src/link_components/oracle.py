"""Seeded Monte Carlo estimates of the transmission events.

Samples are drawn in fixed-size chunks, each from its own PCG64 stream
spawned off `SeedSequence(seed)`. Chunk boundaries and streams depend only on
(n_samples, seed, chunk_size), so an estimate is identical whatever the number
of workers.
"""

import logging
import math
import time
from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from src.link_components.linkmodel import PointingParams, TurbulenceParams
from src.metrics import emit_metric

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1_000_000

ChunkCounter = Callable[[np.random.Generator, int], int]


@dataclass(frozen=True)
class EstimateWithError:
    """An event probability with its binomial standard error.

    `batch_std_error` is the spread of the per-chunk estimates, reported when
    the run was split into two or more equal chunks.
    """

    estimate: float
    std_error: float
    n_samples: int
    seed: int
    batch_std_error: float | None = None


@dataclass(frozen=True)
class SampleMean:
    mean: float
    std_error: float
    n_samples: int
    seed: int


def _check_run(n_samples: int, chunk_size: int, workers: int) -> None:
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")


def _chunk_sizes(n_samples: int, chunk_size: int) -> list[int]:
    full, rest = divmod(n_samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _streams(seed: int, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]


def sample_pointing(
    pointing: PointingParams, n_samples: int, seed: int, chunk_size: int = CHUNK_SIZE
) -> Iterator[tuple[NDArray[np.float64], NDArray[np.float64]]]:
    """Yield (theta_V, theta_H) chunks totalling `n_samples` draws."""
    _check_run(n_samples, chunk_size, 1)
    sizes = _chunk_sizes(n_samples, chunk_size)
    for rng, size in zip(_streams(seed, len(sizes)), sizes):
        yield _draw(rng, pointing, size)


def _draw(rng: np.random.Generator, pointing: PointingParams, size: int) -> tuple[NDArray, NDArray]:
    p = pointing
    theta_v = rng.normal(p.mu_v, p.sigma_v, size)
    theta_h = rng.normal(p.mu_h, p.sigma_h, size)
    return theta_v, theta_h


def _count_event(
    event: str, counter: ChunkCounter, n_samples: int, seed: int, workers: int, chunk_size: int
) -> EstimateWithError:
    _check_run(n_samples, chunk_size, workers)
    sizes = _chunk_sizes(n_samples, chunk_size)
    streams = _streams(seed, len(sizes))

    start = time.perf_counter()
    if workers == 1 or len(sizes) == 1:
        counts = [counter(rng, size) for rng, size in zip(streams, sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(counter, streams, sizes))
    elapsed = time.perf_counter() - start

    p = sum(counts) / n_samples
    std_error = math.sqrt(p * (1.0 - p) / n_samples)
    batch_std_error = None
    if len(sizes) >= 2 and sizes[-1] == sizes[0]:
        batch = np.asarray(counts, dtype=np.float64) / sizes[0]
        batch_std_error = float(batch.std(ddof=1) / math.sqrt(len(batch)))

    emit_metric(
        namespace="oracle",
        metrics={
            "Samples": (n_samples, "Count"),
            "Duration": (elapsed, "Seconds"),
        },
        dimensions={"Event": event},
    )
    return EstimateWithError(p, std_error, n_samples, seed, batch_std_error)


def _certain(n_samples: int, seed: int) -> EstimateWithError:
    return EstimateWithError(1.0, 0.0, n_samples, seed)


def mc_tplr(
    pointing: PointingParams,
    theta_d: float,
    n_samples: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> EstimateWithError:
    """Empirical Pr{theta_V^2 + theta_H^2 <= Theta_D}."""

    def count(rng: np.random.Generator, size: int) -> int:
        v, h = _draw(rng, pointing, size)
        return int(np.count_nonzero(v * v + h * h <= theta_d))

    return _count_event("tplr", count, n_samples, seed, workers, chunk_size)


def mc_tpe(
    pointing: PointingParams,
    theta_e: float,
    alpha: float,
    n_samples: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> EstimateWithError:
    """Empirical Pr{theta^2 + alpha theta_V >= Theta_E}; exactly 1 below -alpha^2/4."""
    _check_run(n_samples, chunk_size, workers)
    if theta_e <= -0.25 * alpha * alpha:
        return _certain(n_samples, seed)

    def count(rng: np.random.Generator, size: int) -> int:
        v, h = _draw(rng, pointing, size)
        return int(np.count_nonzero(v * v + h * h + alpha * v >= theta_e))

    return _count_event("tpe", count, n_samples, seed, workers, chunk_size)


def mc_tpre(
    pointing: PointingParams,
    theta_d: float,
    theta_e: float,
    alpha: float,
    n_samples: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> EstimateWithError:
    """Empirical probability that both the legitimate and eavesdropper events hold."""
    eve_certain = theta_e <= -0.25 * alpha * alpha

    def count(rng: np.random.Generator, size: int) -> int:
        v, h = _draw(rng, pointing, size)
        r2 = v * v + h * h
        hit = r2 <= theta_d
        if not eve_certain:
            hit &= r2 + alpha * v >= theta_e
        return int(np.count_nonzero(hit))

    return _count_event("tpre", count, n_samples, seed, workers, chunk_size)


def mc_joint_xy_mass(
    sigma: float,
    alpha: float,
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    n_samples: int,
    seed: int,
    chunk_size: int = CHUNK_SIZE,
) -> EstimateWithError:
    """Empirical mass of X = theta^2, Y = 2 theta^2 + 2 alpha theta_V over a box (Rayleigh case)."""
    pointing = PointingParams(0.0, 0.0, sigma, sigma)
    (x_lo, x_hi), (y_lo, y_hi) = x_range, y_range

    def count(rng: np.random.Generator, size: int) -> int:
        v, h = _draw(rng, pointing, size)
        x = v * v + h * h
        y = 2.0 * x + 2.0 * alpha * v
        return int(np.count_nonzero((x >= x_lo) & (x <= x_hi) & (y >= y_lo) & (y <= y_hi)))

    return _count_event("joint_xy", count, n_samples, seed, 1, chunk_size)


def mc_log_irradiance(
    turb: TurbulenceParams, n_samples: int, seed: int, chunk_size: int = CHUNK_SIZE
) -> SampleMean:
    """Sample mean of ln I_D for unit-mean Gamma-Gamma irradiance I_D = X Y."""
    _check_run(n_samples, chunk_size, 1)
    total = 0.0
    total_sq = 0.0
    sizes = _chunk_sizes(n_samples, chunk_size)
    for rng, size in zip(_streams(seed, len(sizes)), sizes):
        x = rng.gamma(turb.alpha_d, 1.0 / turb.alpha_d, size)
        y = rng.gamma(turb.beta_d, 1.0 / turb.beta_d, size)
        log_i = np.log(x) + np.log(y)
        total += float(log_i.sum())
        total_sq += float(np.square(log_i).sum())
    mean = total / n_samples
    variance = max(total_sq / n_samples - mean * mean, 0.0)
    return SampleMean(mean, math.sqrt(variance / n_samples), n_samples, seed)
