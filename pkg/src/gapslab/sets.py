"""Measurable subsets of the unit cube given by exact membership predicates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class SetOracle:
    """A subset of [0,1]^dimension.

    ``predicate`` maps an ``(m, dimension)`` array to a boolean array of
    length m; points outside the unit cube are never members.  ``boxes`` is
    set for axis-aligned families (a list of pairwise interior-disjoint
    closed boxes whose union is the set) and enables exact separable
    integration.
    """

    dimension: int
    predicate: Callable[[np.ndarray], np.ndarray]
    label: str
    known_measure: float | None = None
    family: str = "custom"
    params: tuple = ()
    boxes: tuple | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.known_measure is not None and not 0 <= self.known_measure <= 1:
            raise ValueError("known_measure must lie in [0, 1]")

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[-1] != self.dimension:
            raise ValueError(f"expected points of dimension {self.dimension}, got {pts.shape[-1]}")
        flat = pts.reshape(-1, self.dimension)
        inside = np.all((flat >= 0.0) & (flat <= 1.0), axis=1)
        out = np.zeros(flat.shape[0], dtype=bool)
        if inside.any():
            out[inside] = np.asarray(self.predicate(flat[inside]), dtype=bool)
        return out.reshape(pts.shape[:-1])

    def member(self, x) -> bool:
        return bool(self.contains(np.asarray(x, dtype=float).reshape(1, -1))[0])

    def param(self, key: str):
        return dict(self.params)[key]


def make_full(d: int) -> SetOracle:
    return SetOracle(
        d, lambda x: np.ones(x.shape[0], dtype=bool), f"[0,1]^{d}", 1.0, "cube", (("d", d),),
        boxes=((tuple([0.0] * d), tuple([1.0] * d)),),
    )


def make_empty(d: int) -> SetOracle:
    return SetOracle(d, lambda x: np.zeros(x.shape[0], dtype=bool), "empty", 0.0, "empty", (("d", d),), boxes=())


def _check_box(lo: Sequence[float], hi: Sequence[float]) -> tuple[tuple[float, ...], tuple[float, ...]]:
    lo_t = tuple(float(v) for v in lo)
    hi_t = tuple(float(v) for v in hi)
    if len(lo_t) != len(hi_t) or not lo_t:
        raise ValueError("box corners must have the same positive dimension")
    if any(not 0 <= a <= b <= 1 for a, b in zip(lo_t, hi_t)):
        raise ValueError(f"box [{lo_t}, {hi_t}] must satisfy 0 <= lo <= hi <= 1")
    return lo_t, hi_t


def make_box(lo: Sequence[float], hi: Sequence[float]) -> SetOracle:
    return make_box_union([(lo, hi)])


def make_box_union(boxes: Iterable[tuple[Sequence[float], Sequence[float]]]) -> SetOracle:
    """Finite union of closed axis-aligned boxes with pairwise disjoint interiors."""
    checked = tuple(_check_box(lo, hi) for lo, hi in boxes)
    if not checked:
        raise ValueError("need at least one box; use make_empty for the empty set")
    d = len(checked[0][0])
    if any(len(lo) != d for lo, _ in checked):
        raise ValueError("all boxes must share a dimension")
    for (lo1, hi1), (lo2, hi2) in itertools.combinations(checked, 2):
        if all(max(a1, a2) < min(b1, b2) for a1, b1, a2, b2 in zip(lo1, hi1, lo2, hi2)):
            raise ValueError("boxes must have disjoint interiors")
    lows = np.array([lo for lo, _ in checked])
    highs = np.array([hi for _, hi in checked])

    def predicate(x: np.ndarray) -> np.ndarray:
        return np.any(np.all((x[:, None, :] >= lows) & (x[:, None, :] <= highs), axis=2), axis=1)

    measure = float(np.sum(np.prod(highs - lows, axis=1)))
    label = " u ".join(f"box{list(lo)}-{list(hi)}" for lo, hi in checked)
    return SetOracle(d, predicate, label, min(measure, 1.0), "box", (("boxes", checked),), boxes=checked)


def make_halfspace(normal: Sequence[float], offset: float) -> SetOracle:
    """{x in [0,1]^d : normal . x <= offset}."""
    a = np.asarray(normal, dtype=float)
    if a.ndim != 1 or not np.all(np.isfinite(a)):
        raise ValueError("normal must be a finite vector")
    return SetOracle(
        a.size, lambda x: x @ a <= offset, f"halfspace {list(a)}.x <= {offset}", None, "halfspace",
        (("normal", tuple(a.tolist())), ("offset", float(offset))),
    )


def _near_integer(values: np.ndarray, tol: float) -> np.ndarray:
    return np.abs(values - np.rint(values)) < tol


def make_bourgain_annuli(d: int, eps: float) -> SetOracle:
    """Points whose squared norm ||x/eps||^2 lies strictly within 1/10 of an integer."""
    if d < 1 or not 0 < eps <= 1:
        raise ValueError("need d >= 1 and 0 < eps <= 1")

    def predicate(x: np.ndarray) -> np.ndarray:
        return _near_integer(np.sum((x / eps) ** 2, axis=1), 0.1)

    return SetOracle(d, predicate, f"annuli(d={d}, eps={eps})", None, "annuli", (("d", d), ("eps", float(eps))))


def make_lp_shells(n: int, p: int, d: int, eps: float) -> SetOracle:
    """Points whose ||x/eps||_p^p lies strictly within 2^(-p-2) of an integer, p in 1..n-1."""
    if int(p) != p or not 1 <= p <= n - 1:
        raise ValueError(f"shell construction needs an integer p in 1..{n - 1}, got {p!r}")
    if d < 1 or not 0 < eps <= 1:
        raise ValueError("need d >= 1 and 0 < eps <= 1")
    p = int(p)
    tol = 2.0 ** (-p - 2)

    def predicate(x: np.ndarray) -> np.ndarray:
        return _near_integer(np.sum(np.abs(x / eps) ** p, axis=1), tol)

    return SetOracle(
        d, predicate, f"lp-shells(n={n}, p={p}, d={d}, eps={eps})", None, "shells",
        (("n", n), ("p", p), ("d", d), ("eps", float(eps))),
    )


def thin_box_interval(k: int, N: int) -> tuple[float, float]:
    return (5 * k + 2) / (5 * N), (5 * k + 3) / (5 * N)


def make_thin_boxes(S: Iterable[int], N: int, d: int) -> SetOracle:
    """Union of slabs [(5k+2)/5N, (5k+3)/5N] x [0,1]^(d-1) over k in S."""
    elems = tuple(sorted(set(int(k) for k in S)))
    if N < 1 or d < 1:
        raise ValueError("need N >= 1 and d >= 1")
    bad = [k for k in elems if not 0 <= k < N]
    if bad:
        raise ValueError(f"elements {bad} lie outside 0..{N - 1}")
    boxes = tuple(
        ((lo,) + (0.0,) * (d - 1), (hi,) + (1.0,) * (d - 1))
        for lo, hi in (thin_box_interval(k, N) for k in elems)
    )
    index = np.array(elems, dtype=np.int64)

    def predicate(x: np.ndarray) -> np.ndarray:
        # nearest slab centre, then an exact comparison with that slab's float endpoints
        k = np.rint((5 * N * x[:, 0] - 2.5) / 5)
        lo = (5 * k + 2) / (5 * N)
        hi = (5 * k + 3) / (5 * N)
        return (x[:, 0] >= lo) & (x[:, 0] <= hi) & np.isin(k.astype(np.int64), index)

    return SetOracle(
        d, predicate, f"thin-boxes(S={list(elems)}, N={N}, d={d})", len(elems) / (5 * N), "thinboxes",
        (("S", elems), ("N", N), ("d", d)), boxes=boxes,
    )


def thin_box_index(x_first: np.ndarray, N: int) -> np.ndarray:
    """Index k of the slab containing each first coordinate (meaningful for members)."""
    return np.rint((5 * N * np.asarray(x_first, dtype=float) - 2.5) / 5).astype(np.int64)
