"""Exact discrete progression searches and the thin-box bridge to the continuous count."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from gapslab.counting import EstimateWithError, progression_hits
from gapslab.rng import DEFAULT_CHUNK, map_ordered, mc_mean
from gapslab.sets import make_thin_boxes, thin_box_index

EXHAUSTIVE_LIMIT = 40
BRANCH_BOUND_LIMIT = 80


@dataclass(frozen=True)
class DiscreteSet:
    elements: tuple
    N: int

    def __post_init__(self) -> None:
        elems = tuple(int(k) for k in self.elements)
        if len(set(elems)) != len(elems):
            raise ValueError("duplicate elements")
        if self.N < 0 or any(not 0 <= k < self.N for k in elems):
            raise ValueError(f"elements must lie in 0..{self.N - 1}")
        object.__setattr__(self, "elements", tuple(sorted(elems)))

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, k: int) -> bool:
        return k in set(self.elements)


def progressions_in(S: DiscreteSet, n: int) -> list[tuple[int, int]]:
    """All (k, l) with l >= 1 and k, k+l, ..., k+(n-1)l in S."""
    members = set(S.elements)
    found = []
    for k in S.elements:
        for l in range(1, (S.N - 1 - k) // max(n - 1, 1) + 1):
            if all(k + i * l in members for i in range(1, n)):
                found.append((k, l))
    return found


def contains_ap(S: DiscreteSet, n: int) -> bool:
    if n < 3:
        raise ValueError("n must be >= 3")
    members = set(S.elements)
    for k in S.elements:
        for l in range(1, (S.N - 1 - k) // (n - 1) + 1):
            if all(k + i * l in members for i in range(1, n)):
                return True
    return False


@dataclass(frozen=True)
class FreeSetResult:
    N: int
    n: int
    size: int
    witness: DiscreteSet
    mode: str
    nodes: int


class _Search:
    """Depth-first search over subsets of 0..N-1 in increasing order.

    Adding a new largest element x forbids x + l whenever x - l, ..., x - (n-2) l
    are already chosen, so every chosen prefix stays free of n-term progressions.
    """

    def __init__(self, N: int, n: int, table: Optional[list[int]]):
        self.N, self.n, self.table = N, n, table
        self.best = -1
        self.best_set: tuple = ()
        self.nodes = 0

    def bound(self, size: int, i: int, forbidden: int) -> int:
        avail = self.N - i - bin(forbidden >> i).count("1")
        if self.table is not None:
            avail = min(avail, self.table[self.N - i])
        return size + avail

    def run(self, chosen: list[int], i: int, forbidden: int) -> None:
        self.nodes += 1
        size = len(chosen)
        if size > self.best:
            self.best, self.best_set = size, tuple(chosen)
        if i >= self.N or self.bound(size, i, forbidden) <= self.best:
            return
        for x in range(i, self.N):
            if forbidden >> x & 1:
                continue
            if self.bound(size, x, forbidden) <= self.best:
                return
            new_forbidden = forbidden
            members = set(chosen)
            for l in range(1, x + 1):
                if x - (self.n - 2) * l < 0:
                    break
                if all(x - j * l in members for j in range(1, self.n - 1)) and x + l < self.N:
                    new_forbidden |= 1 << (x + l)
            chosen.append(x)
            self.run(chosen, x + 1, new_forbidden)
            chosen.pop()


def _branch(N: int, n: int, table: Optional[list[int]], first: int, floor: int) -> tuple[int, tuple, int]:
    search = _Search(N, n, table)
    search.best = floor
    search.run([first], first + 1, 0)
    return search.best, search.best_set, search.nodes


def max_ap_free_size(N: int, n: int = 3, mode: str = "branch", *, workers: int = 1,
                     _table: Optional[list[int]] = None) -> FreeSetResult:
    """Largest subset of 0..N-1 with no n-term progression, plus a witness.

    ``mode="exhaustive"`` prunes only by the number of still-allowed elements;
    ``mode="branch"`` also caps the remaining gain by the exact answer for the
    shorter remaining interval, computed recursively.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    if mode not in ("exhaustive", "branch"):
        raise ValueError(f"unknown mode {mode!r}")
    limit = EXHAUSTIVE_LIMIT if mode == "exhaustive" else BRANCH_BOUND_LIMIT
    if N > limit:
        raise MemoryError(f"N={N} exceeds the {mode} search limit {limit}")
    if N <= 0:
        return FreeSetResult(N, n, 0, DiscreteSet((), max(N, 0)), mode, 1)
    table = None
    if mode == "branch":
        table = _table if _table is not None else free_size_table(N - 1, n)
        table = list(table[:N]) + [N]  # table[m] for m < N; the full length is never used as a cap
    # a free set may be translated to start at 0, so the smallest element can be fixed to 0
    best, best_set, nodes = _branch(N, n, table, 0, 0)
    del workers  # a single top-level branch remains after the translation reduction
    return FreeSetResult(N, n, best, DiscreteSet(best_set, N), mode, nodes)


def free_size_table(N_max: int, n: int = 3) -> list[int]:
    """[r(0), r(1), ..., r(N_max)] by branch and bound, each entry reusing the earlier ones."""
    table = [0]
    for N in range(1, N_max + 1):
        table.append(max_ap_free_size(N, n, "branch", _table=table).size)
    return table


@dataclass(frozen=True)
class SzemerediResult:
    n: int
    delta: float
    N_cap: int
    value: Optional[int]

    @property
    def exceeds_cap(self) -> bool:
        return self.value is None

    def verdict(self) -> str:
        return f"exceeds cap {self.N_cap}" if self.value is None else str(self.value)


def szemeredi_number(n: int, delta: float, N_cap: int) -> SzemerediResult:
    """Smallest N <= N_cap with r_n(N) < delta N, or the cap verdict."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    table = [0]
    for N in range(1, N_cap + 1):
        table.append(max_ap_free_size(N, n, "branch", _table=table).size)
        if table[N] < delta * N:
            return SzemerediResult(n, delta, N_cap, N)
    return SzemerediResult(n, delta, N_cap, None)


@dataclass(frozen=True)
class BridgeResult:
    estimate: EstimateWithError
    bound: float
    floor: float
    exact: float
    has_ap: bool
    index_violations: int

    @property
    def passed(self) -> bool:
        est, err = self.estimate.value, self.estimate.stderr
        if self.index_violations:
            return False
        if self.has_ap:
            return est > 5 * err and est + 4 * err >= self.floor
        return est <= self.bound + 4 * err


def bridge_exact(S: DiscreteSet, n: int, d: int) -> float:
    """Exact value of int int prod_i 1_A(x + i y) dx dy over ([0,1]^d)^2 for the thin-box set.

    A nontrivial progression (k, l) of S contributes a parallelogram of area
    1/((n-1) 25 N^2) in the first coordinate; each element contributes the
    degenerate l = 0 triangle of area 1/(2(n-1) 25 N^2).  Every other coordinate
    contributes the area 1/(2(n-1)) of {x + (n-1) y <= 1}.
    """
    if not S.elements:
        return 0.0
    first = (len(progressions_in(S, n)) / (n - 1) + len(S) / (2 * (n - 1))) / (25 * S.N ** 2)
    return first * (1 / (2 * (n - 1))) ** (d - 1)


def bridge_floor(S: DiscreteSet, n: int, d: int) -> float:
    """Lower bound from the nontrivial progressions alone."""
    return len(progressions_in(S, n)) / (n - 1) / (25 * S.N ** 2) * (1 / (2 * (n - 1))) ** (d - 1)


def bridge_check(S: DiscreteSet, n: int, d: int, samples: int, seed: int, *,
                 chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> BridgeResult:
    """Monte Carlo estimate of the progression count of the thin-box set built from S.

    Also checks on every sampled witness that the slab indices it visits form a progression.
    """
    has_ap = contains_ap(S, n)
    if not S.elements:
        est = EstimateWithError(0.0, 0.0, samples, seed)
        return BridgeResult(est, 1.0 / max(S.N, 1), 0.0, 0.0, False, 0)
    A = make_thin_boxes(S.elements, S.N, d)

    def kernel(rng: np.random.Generator, m: int) -> np.ndarray:
        x = rng.random((m, d))
        y = rng.random((m, d))
        hit = progression_hits(A, x, y, n)
        idx = np.stack([thin_box_index(x[hit, 0] + i * y[hit, 0], S.N) for i in range(n)], axis=1)
        steps = np.diff(idx, axis=1)
        bad = np.zeros(m)
        bad[np.flatnonzero(hit)] = np.any(steps != steps[:, :1], axis=1) if n > 2 else 0
        return np.column_stack([hit.astype(float), bad])

    res = mc_mean(kernel, samples, seed, chunk_size=chunk_size, workers=workers)
    est = EstimateWithError(float(res.mean[0]), float(res.stderr[0]), samples, seed)
    violations = int(round(float(res.mean[1]) * samples))
    return BridgeResult(est, 1.0 / S.N, bridge_floor(S, n, d), bridge_exact(S, n, d), has_ap, violations)


def as_discrete(elements: Iterable[int], N: int) -> DiscreteSet:
    return DiscreteSet(tuple(elements), N)
