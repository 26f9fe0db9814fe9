from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class McSettings:
    # Weak-order-1 bias allowance: tolerance is 3*SE + bias_constant*step.
    bias_constant: float = 5.0
    block_size: int = 4096
    min_paths: int = 100


@dataclass(frozen=True)
class VerifySettings:
    oracle_max_legs: int = 8
    multi_max_length: int = 5
    random_problems: int = 2
    seed: int = 20240601


@dataclass(frozen=True)
class SeriesSettings:
    default_method: str = "trees"  # trees|multi|operator


@dataclass(frozen=True)
class MultiSettings:
    # Guard on [gamma] for `multi info` tree lookups.
    max_length: int = 8


@dataclass(frozen=True)
class Settings:
    version: int = 1
    mc: McSettings = field(default_factory=McSettings)
    verify: VerifySettings = field(default_factory=VerifySettings)
    series: SeriesSettings = field(default_factory=SeriesSettings)
    multi: MultiSettings = field(default_factory=MultiSettings)
