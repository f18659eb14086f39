"""Deterministic parallel evaluation.

Work items are split into fixed-size chunks; chunks may run on a thread pool,
but results are reassembled in item order and reduced sequentially, so the
output is bit-identical for every worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

CHUNK = 64


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Map ``fn`` over ``items`` preserving order; ``threads`` only affects
    scheduling, never the result."""
    items = list(items)
    if threads <= 1 or len(items) <= CHUNK:
        return [fn(x) for x in items]
    chunks = [items[i:i + CHUNK] for i in range(0, len(items), CHUNK)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda chunk: [fn(x) for x in chunk], chunks))
    out: list[R] = []
    for part in parts:
        out.extend(part)
    return out


def fsum_complex(values: Iterable[complex]) -> complex:
    """Correctly rounded complex sum (order-independent by exactness)."""
    vals = list(values)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def fmean(values: Iterable[float], size: int) -> float:
    return math.fsum(values) / size


def fmean_complex(values: Iterable[complex], size: int) -> complex:
    total = fsum_complex(values)
    return complex(total.real / size, total.imag / size)
