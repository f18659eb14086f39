"""Folner-averaged mixing statistics.

Every statistic is a per-window curve: value_n = mean over g in the window of
some nonnegative integrand.  Averages use exact 1/|window| weights with
correctly rounded summation, so results are identical for any worker count.
A finite-horizon verdict (decaying / non-decaying / inconclusive) is attached
by a documented rule on the last quarter of the schedule, since the limits
themselves are not finitely decidable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from ._parallel import fmean, fmean_complex, ordered_map
from .folner import (
    FolnerWindow,
    GroupElement,
    Homomorphism,
    add,
    inverse_product,
    lower_density,
    zero,
)
from .systems import SystemHandle, commutator_norm, evaluate

VERDICT_DECAYING = "decaying"
VERDICT_NON_DECAYING = "non-decaying"
VERDICT_INCONCLUSIVE = "inconclusive"

DEFAULT_THRESHOLD_FRACTION = 0.05
THRESHOLD_FLOOR = 1e-12


def _tail(values: Sequence[float]) -> Sequence[float]:
    k = max(1, math.ceil(len(values) / 4))
    return values[-k:]


def classify_decay(values: Sequence[float], threshold: Optional[float] = None) -> tuple[str, float]:
    """Finite-horizon verdict on a nonnegative curve.

    The scale reference is the maximum over the first quarter of the curve
    (equal to the first value on monotone curves, but robust to leading
    windows that happen to miss an observable's support).  decaying: the last
    quarter stays below the threshold (default 0.05 times the reference,
    floored at 1e-12); non-decaying: the last quarter never drops under half
    the reference.
    """
    if not values:
        raise ValueError("empty statistic")
    head = max(values[: max(1, math.ceil(len(values) / 4))])
    if threshold is None:
        threshold = max(DEFAULT_THRESHOLD_FRACTION * head, THRESHOLD_FLOOR)
    tail = _tail(values)
    if max(tail) < threshold:
        return VERDICT_DECAYING, threshold
    if min(tail) >= 0.5 * head and head > THRESHOLD_FLOOR:
        return VERDICT_NON_DECAYING, threshold
    return VERDICT_INCONCLUSIVE, threshold


@dataclass(frozen=True)
class MixingStatistic:
    per_window: tuple[tuple[int, float], ...]
    verdict_threshold: float
    verdict: str

    @staticmethod
    def from_values(
        windows: Sequence[FolnerWindow],
        values: Sequence[float],
        threshold: Optional[float] = None,
    ) -> "MixingStatistic":
        if any((not math.isfinite(v)) or v < 0 for v in values):
            raise ValueError("statistic values must be finite and nonnegative")
        verdict, thr = classify_decay(values, threshold)
        return MixingStatistic(
            per_window=tuple((w.index, v) for w, v in zip(windows, values, strict=True)),
            verdict_threshold=thr,
            verdict=verdict,
        )

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.per_window)


def _window_mean(window, integrand, threads: int, complex_valued: bool = False):
    gs = list(window.iter_elements())
    vals = ordered_map(integrand, gs, threads=threads)
    if complex_valued:
        return fmean_complex(vals, window.size)
    return fmean(vals, window.size)


@dataclass(frozen=True)
class ErgodicAverage:
    """Per-window averages of omega(a tau_{phi(g)}(b)) next to the comparison
    value omega(a) omega(b)."""

    per_window: tuple[tuple[int, complex], ...]
    product_value: complex


def ergodic_average(
    sys: SystemHandle,
    a,
    b,
    hom: Homomorphism,
    windows: Sequence[FolnerWindow],
    threads: int = 1,
) -> ErgodicAverage:
    target = evaluate(sys, [(a, None, zero(hom.q))]) * evaluate(sys, [(b, None, zero(hom.q))])
    per = []
    for w in windows:
        mean = _window_mean(
            w,
            lambda g: evaluate(sys, [(a, None, g), (b, hom, g)]),
            threads,
            complex_valued=True,
        )
        per.append((w.index, mean))
    return ErgodicAverage(per_window=tuple(per), product_value=target)


def _correlation_defect_values(sys, a, b, hom, windows, threads, square):
    target = evaluate(sys, [(a, None, zero(hom.q))]) * evaluate(sys, [(b, None, zero(hom.q))])

    def integrand(g):
        diff = abs(evaluate(sys, [(a, None, g), (b, hom, g)]) - target)
        return diff * diff if square else diff

    return [_window_mean(w, integrand, threads) for w in windows]


def weak_mixing_defect(
    sys: SystemHandle,
    a,
    b,
    hom: Homomorphism,
    windows: Sequence[FolnerWindow],
    threads: int = 1,
    threshold: Optional[float] = None,
) -> MixingStatistic:
    """Mean over the window of |omega(a tau_{phi(g)}(b)) - omega(a) omega(b)|."""
    vals = _correlation_defect_values(sys, a, b, hom, windows, threads, square=False)
    return MixingStatistic.from_values(windows, vals, threshold)


def square_defect(
    sys: SystemHandle,
    a,
    b,
    hom: Homomorphism,
    windows: Sequence[FolnerWindow],
    threads: int = 1,
    threshold: Optional[float] = None,
) -> MixingStatistic:
    """Same integrand squared; its verdict must agree with the unsquared one."""
    vals = _correlation_defect_values(sys, a, b, hom, windows, threads, square=True)
    return MixingStatistic.from_values(windows, vals, threshold)


def asymptotic_abelianness(
    sys: SystemHandle,
    a,
    b,
    hom: Homomorphism,
    windows: Sequence[FolnerWindow],
    threads: int = 1,
    threshold: Optional[float] = None,
) -> MixingStatistic:
    """Mean over the window of the operator norm of [a, tau_{phi(g)}(b)]."""
    vals = [
        _window_mean(w, lambda g: commutator_norm(sys, a, b, hom, g), threads)
        for w in windows
    ]
    return MixingStatistic.from_values(windows, vals, threshold)


@dataclass(frozen=True)
class HigherOrderSpec:
    """Observables a_0..a_k with pairwise distinct homomorphisms phi_1..phi_k
    (the leading factor always rides the zero shift)."""

    observables: tuple
    homs: tuple[Homomorphism, ...]

    def __post_init__(self) -> None:
        if len(self.observables) != len(self.homs) + 1:
            raise ValueError("need one more observable than homomorphisms")
        if not self.homs:
            raise ValueError("need at least one homomorphism")
        for i in range(len(self.homs)):
            if self.homs[i].is_zero():
                raise ValueError("homomorphisms must be nonzero")
            for j in range(i + 1, len(self.homs)):
                if self.homs[i] == self.homs[j]:
                    raise ValueError("homomorphisms must be pairwise distinct")

    @property
    def q(self) -> int:
        return self.homs[0].q

    @property
    def k(self) -> int:
        return len(self.homs)

    def factors(self, g: GroupElement) -> list:
        out = [(self.observables[0], None, g)]
        out += [(a, h, g) for a, h in zip(self.observables[1:], self.homs)]
        return out

    def target(self, sys: SystemHandle) -> complex:
        prod = 1.0 + 0j
        for a in self.observables:
            prod *= evaluate(sys, [(a, None, zero(self.q))])
        return prod


def higher_order_defect(
    sys: SystemHandle,
    spec: HigherOrderSpec,
    windows: Sequence[FolnerWindow],
    threads: int = 1,
    threshold: Optional[float] = None,
) -> MixingStatistic:
    """Mean over the window of
    |omega(prod_j tau_{phi_j(g)}(a_j)) - prod_j omega(a_j)|."""
    target = spec.target(sys)
    vals = [
        _window_mean(w, lambda g: abs(evaluate(sys, spec.factors(g)) - target), threads)
        for w in windows
    ]
    return MixingStatistic.from_values(windows, vals, threshold)


def collision_bound(
    sys: SystemHandle, spec: HigherOrderSpec, scan: FolnerWindow
) -> float:
    """Sum over the scanned window of |integrand(g) - target| restricted to g
    where the integrand can deviate.

    On the quasi-local backend only g with overlapping shifted supports can
    deviate, so the returned constant c makes value_n <= c/|window| hold for
    every window inside the scan; with single-site factors the disjoint terms
    cancel bitwise and the bound is exact, while multi-site factors can leave
    last-bit rounding dust.  On the finite backend every g contributes.
    """
    target = spec.target(sys)
    total = []
    for g in scan.iter_elements():
        if hasattr(sys, "translate") and hasattr(spec.observables[0], "support"):
            supports = []
            supports.append(set(spec.observables[0].support))
            for a, h in zip(spec.observables[1:], spec.homs):
                shift = h.apply(g)
                supports.append({add(s, shift) for s in a.support})
            disjoint = True
            for i in range(len(supports)):
                for j in range(i + 1, len(supports)):
                    if supports[i] & supports[j]:
                        disjoint = False
            if disjoint:
                continue
        total.append(abs(evaluate(sys, spec.factors(g)) - target))
    return math.fsum(total)


@dataclass(frozen=True)
class GammaEntry:
    h: GroupElement
    empirical: complex
    closed_form: complex

    @property
    def difference(self) -> float:
        return abs(self.empirical - self.closed_form)


@dataclass(frozen=True)
class GammaReport:
    entries: tuple[GammaEntry, ...]
    window_index: int
    kappa: complex


def gamma_sequence(
    sys: SystemHandle,
    spec: HigherOrderSpec,
    windows: Sequence[FolnerWindow],
    h_range: Optional[Sequence[GroupElement]] = None,
    threads: int = 1,
) -> GammaReport:
    """Autocorrelations of the centered product vector u_g.

    For each lag h the report carries (i) the empirical window average of
    <u_g, u_{g+h}> at the largest supplied window and (ii) the closed form
    prod_j omega(a_j* tau_{phi_j(h)}(a_j)) - |kappa|^2 with
    kappa = prod_j omega(a_j).  The two must agree up to boundary terms.
    """
    if not windows:
        raise ValueError("need at least one window")
    largest = max(windows, key=lambda w: w.size)
    if h_range is None:
        h_range = list(inverse_product(largest).iter_elements())
    tail = spec.observables[1:]
    kappa = 1.0 + 0j
    for a in tail:
        kappa *= evaluate(sys, [(a, None, zero(spec.q))])

    adjoints = [sys.obs_adjoint(a) for a in tail]

    def x_factors(base: GroupElement) -> list:
        return [(a, h, base) for a, h in zip(tail, spec.homs)]

    def x_adj_factors(base: GroupElement) -> list:
        return [(aa, h, base) for aa, h in zip(reversed(adjoints), reversed(spec.homs))]

    def mean_x(base_points):
        vals = ordered_map(
            lambda g: evaluate(sys, x_factors(g)), base_points, threads=threads)
        return vals

    gs = list(largest.iter_elements())
    x_vals = mean_x(gs)

    entries = []
    for h in h_range:
        def inner(g_idx):
            g = gs[g_idx]
            gh = add(g, h)
            cross = evaluate(sys, x_adj_factors(g) + x_factors(gh))
            x_g = x_vals[g_idx]
            x_gh = evaluate(sys, x_factors(gh))
            return (cross
                    - kappa * x_g.conjugate()
                    - kappa.conjugate() * x_gh
                    + abs(kappa) ** 2)

        vals = ordered_map(inner, range(len(gs)), threads=threads)
        empirical = fmean_complex(vals, largest.size)

        closed = 1.0 + 0j
        for a, aa, hom in zip(tail, adjoints, spec.homs):
            closed *= evaluate(sys, [(aa, None, zero(spec.q)), (a, hom, h)])
        closed -= abs(kappa) ** 2
        entries.append(GammaEntry(h=h, empirical=empirical, closed_form=closed))
    return GammaReport(entries=tuple(entries), window_index=largest.index, kappa=kappa)


@dataclass(frozen=True)
class DensityLimitReport:
    """Window averages of f next to lower-density curves of the superlevel
    sets {f >= eps}; the two finite-horizon verdicts must agree."""

    averages: tuple[tuple[int, float], ...]
    level_densities: tuple[tuple[float, tuple[tuple[int, float], ...]], ...]
    average_verdict: str
    density_verdict: str
    agree: bool


def density_limit_check(
    f,
    windows: Sequence[FolnerWindow],
    eps_grid: Sequence[float],
    threshold: float = 0.05,
) -> DensityLimitReport:
    """Finite-horizon comparison of mean decay versus superlevel-set density
    decay for a bounded nonnegative f on the lattice."""
    if not windows:
        raise ValueError("need at least one window")
    if not eps_grid or any(e <= 0 for e in eps_grid):
        raise ValueError("eps grid must be positive")
    averages = []
    for w in windows:
        vals = [f(g) for g in w.iter_elements()]
        if any(v < 0 for v in vals):
            raise ValueError("f must be nonnegative")
        averages.append((w.index, fmean(vals, w.size)))

    level_curves = []
    density_zero = True
    for eps in eps_grid:
        rep = lower_density(lambda g: f(g) >= eps, windows)
        level_curves.append((eps, rep.per_n_ratios))
        tail = _tail([r for _, r in rep.per_n_ratios])
        if max(tail) >= threshold:
            density_zero = False

    avg_tail = _tail([v for _, v in averages])
    avg_zero = max(avg_tail) < threshold
    avg_verdict = "zero" if avg_zero else "nonzero"
    den_verdict = "zero" if density_zero else "nonzero"
    return DensityLimitReport(
        averages=tuple(averages),
        level_densities=tuple(level_curves),
        average_verdict=avg_verdict,
        density_verdict=den_verdict,
        agree=(avg_verdict == den_verdict),
    )
