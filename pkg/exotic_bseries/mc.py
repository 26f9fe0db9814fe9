"""Euler-Maruyama Monte Carlo estimates and closed-form moment references.

Paths are simulated in fixed-size blocks. Block b draws its Gaussian
increments from ``PCG64(SeedSequence(seed, spawn_key=(b,)))``, so the
estimate depends only on (seed, block size, paths, steps) and not on how
blocks are scheduled across worker threads. Block statistics are merged in
block order.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from . import paths
from .errors import McConfigError, ModeError
from .jets import SpecKind
from .models import McSettings
from .series import SdeProblem


logger = logging.getLogger(__name__)


GENERATOR = "PCG64"


@dataclass(frozen=True)
class McConfig:
    t_end: float
    step: float
    paths: int
    seed: int

    def validate(self, settings: McSettings | None = None) -> None:
        s = settings or McSettings()
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise McConfigError(message=f"t must be a positive number, got {self.t_end}")
        if not (math.isfinite(self.step) and self.step > 0):
            raise McConfigError(message=f"step must be a positive number, got {self.step}")
        if self.step > self.t_end:
            raise McConfigError(message=f"step {self.step} exceeds t {self.t_end}")
        if self.paths < s.min_paths:
            raise McConfigError(message=f"paths must be >= {s.min_paths}, got {self.paths}")
        if not 0 <= self.seed < 2**64:
            raise McConfigError(message=f"seed must fit in 64 unsigned bits, got {self.seed}")

    @property
    def steps(self) -> int:
        # Tolerate representation error in t/step (0.2/1e-3 is 200.00000000000003).
        return max(1, math.ceil(self.t_end / self.step - 1e-9))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    paths: int
    discarded: int = 0
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "discarded": self.discarded,
            "mean": self.mean,
            "metadata": dict(self.metadata),
            "paths": self.paths,
            "std_error": self.std_error,
        }


@dataclass(frozen=True)
class _BlockStats:
    count: int
    mean: float
    m2: float
    discarded: int


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(block,))))


def _simulate_block(p: SdeProblem, c: McConfig, block: int, size: int) -> _BlockStats:
    rng = _block_rng(c.seed, block)
    n = c.steps
    h = c.t_end / n
    sqrt_h = math.sqrt(h)
    u = np.full(size, float(p.u0))
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n):
            dw = rng.standard_normal(size) * sqrt_h
            u = u + p.alpha.evaluate(u) * h + p.beta.evaluate(u) * dw
        vals = p.f.evaluate(u)
    ok = np.isfinite(vals)
    kept = vals[ok]
    count = int(kept.size)
    if count == 0:
        return _BlockStats(count=0, mean=0.0, m2=0.0, discarded=size)
    mean = float(kept.mean())
    m2 = float(((kept - mean) ** 2).sum())
    return _BlockStats(count=count, mean=mean, m2=m2, discarded=size - count)


def _merge(a: _BlockStats, b: _BlockStats) -> _BlockStats:
    n = a.count + b.count
    if n == 0:
        return _BlockStats(0, 0.0, 0.0, a.discarded + b.discarded)
    delta = b.mean - a.mean
    mean = a.mean + delta * b.count / n
    m2 = a.m2 + b.m2 + delta * delta * a.count * b.count / n
    return _BlockStats(count=n, mean=mean, m2=m2, discarded=a.discarded + b.discarded)


def euler_maruyama_estimate(
    p: SdeProblem,
    c: McConfig,
    *,
    settings: McSettings | None = None,
    workers: int | None = None,
) -> McEstimate:
    """Mean of f(u_T) over Euler-Maruyama paths, with its standard error."""

    s = settings or McSettings()
    c.validate(s)
    if p.mode != "float":
        raise ModeError(message="Monte Carlo needs a floating-mode problem")
    for name, spec in (("alpha", p.alpha), ("beta", p.beta), ("f", p.f)):
        if spec.kind is SpecKind.DERIVS:
            raise McConfigError(message=f"{name}: a derivs spec cannot be evaluated along paths")

    sizes = [s.block_size] * (c.paths // s.block_size)
    if c.paths % s.block_size:
        sizes.append(c.paths % s.block_size)
    n_workers = max(1, min(workers or paths.worker_count(), len(sizes)))
    logger.debug(
        "mc: %d paths in %d blocks of <= %d, %d steps, %d workers",
        c.paths,
        len(sizes),
        s.block_size,
        c.steps,
        n_workers,
    )

    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        stats = list(pool.map(lambda b: _simulate_block(p, c, b, sizes[b]), range(len(sizes))))

    total = stats[0]
    for st in stats[1:]:
        total = _merge(total, st)

    if total.discarded:
        logger.warning("mc: discarded %d non-finite paths out of %d", total.discarded, c.paths)
    if total.count < 2:
        raise McConfigError(message=f"only {total.count} finite paths; cannot estimate a standard error")

    var = total.m2 / (total.count - 1)
    se = math.sqrt(max(var, 0.0) / total.count)
    meta = {
        "block_size": s.block_size,
        "blocks": len(sizes),
        "generator": GENERATOR,
        "seeding": "SeedSequence(entropy=seed, spawn_key=(block,))",
        "seed": c.seed,
        "step": c.t_end / c.steps,
        "steps": c.steps,
        "t": c.t_end,
    }
    return McEstimate(mean=total.mean, std_error=se, paths=total.count, discarded=total.discarded, metadata=meta)


def tolerance(est: McEstimate, step: float, bias_constant: float) -> float:
    """3 standard errors plus the weak order-one bias allowance."""

    return 3.0 * est.std_error + bias_constant * step


# -- closed forms -------------------------------------------------------------


CLOSED_FORMS = ("ou_mean", "ou_second_moment", "gbm_mean", "gbm_second_moment")


def closed_form_reference(name: str, *, u0: float, a: float, sigma: float) -> Callable[[float], float]:
    """Reference moments.

    OU is du = -a u dt + sigma dW, GBM is du = a u dt + sigma u dW.
    """

    if name == "ou_mean":
        return lambda t: u0 * math.exp(-a * t)
    if name == "ou_second_moment":

        def ou2(t: float) -> float:
            if a == 0:
                return u0 * u0 + sigma * sigma * t
            # (1 - e^{-2at}) / (2a) without cancellation for small a*t
            spread = -math.expm1(-2 * a * t) / (2 * a)
            return u0 * u0 * math.exp(-2 * a * t) + sigma * sigma * spread

        return ou2
    if name == "gbm_mean":
        return lambda t: u0 * math.exp(a * t)
    if name == "gbm_second_moment":
        return lambda t: u0 * u0 * math.exp((2 * a + sigma * sigma) * t)
    raise McConfigError(message=f"unknown closed form {name!r}; expected one of {', '.join(CLOSED_FORMS)}")
