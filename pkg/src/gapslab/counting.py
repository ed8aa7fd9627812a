"""Monte Carlo estimates of progression and cube counts, gap spectra and scans.

All estimators run through :func:`gapslab.rng.mc_mean`, so results depend on
the seed and chunk size only.  Quantities use the probability-normalised
sphere measure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from gapslab.geometry import ExperimentParams
from gapslab.mollifiers import sample_bump
from gapslab.rng import DEFAULT_CHUNK, SeedStream, map_ordered, mc_mean
from gapslab.sets import SetOracle, make_box
from gapslab.sphere import circle_draws, sigma_draws


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    stderr: float
    samples: int
    seed: int
    params: ExperimentParams | None = None

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.stderr


def _estimate(kernel, samples: int, seed: int, params, chunk_size: int, workers: int) -> EstimateWithError:
    est = mc_mean(kernel, samples, seed, chunk_size=chunk_size, workers=workers)
    return EstimateWithError(float(est.mean[0]), float(est.stderr[0]), samples, seed, params)


def progression_hits(A: SetOracle, x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    """Indicator that all of x, x+y, ..., x+(n-1)y lie in A (row-wise)."""
    hit = np.ones(x.shape[0], dtype=bool)
    for i in range(n):
        hit &= A.contains(x + i * y)
    return hit


def _check_dimension(A: SetOracle, d: int) -> None:
    if A.dimension != d:
        raise ValueError(f"set has dimension {A.dimension} but the experiment uses d={d}")


def count_ap_sharp(A: SetOracle, params: ExperimentParams, samples: int, *,
                   chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> EstimateWithError:
    """E[prod_i 1_A(x + i y)] with x uniform on [0,1]^d and y = lambda z, z ~ sigma."""
    _check_dimension(A, params.d)
    n, p, d, lam = params.n, params.p, params.d, params.lam

    def kernel(rng: np.random.Generator, m: int) -> np.ndarray:
        x = rng.random((m, d))
        y = lam * sigma_draws(rng, p, d, m)
        return progression_hits(A, x, y, n)

    return _estimate(kernel, samples, params.seed, params, chunk_size, workers)


def count_ap_smoothed(A: SetOracle, params: ExperimentParams, samples: int, *,
                      chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> EstimateWithError:
    """As count_ap_sharp, with y = lambda z + eps lambda w and w ~ phi."""
    _check_dimension(A, params.d)
    n, p, d, lam, eps = params.n, params.p, params.d, params.lam, params.eps

    def kernel(rng: np.random.Generator, m: int) -> np.ndarray:
        x = rng.random((m, d))
        z = sigma_draws(rng, p, d, m)
        w = sample_bump(rng, (m, d))
        return progression_hits(A, x, lam * z + eps * lam * w, n)

    return _estimate(kernel, samples, params.seed, params, chunk_size, workers)


def planar_gaussian_draws(rng: np.random.Generator, shape) -> np.ndarray:
    """Draws with density exp(-pi |w|^2) on R^2 (coordinate variance 1 / (2 pi))."""
    return rng.standard_normal(shape) / math.sqrt(2.0 * math.pi)


def cube_hits(A: SetOracle, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indicator that all 2^n vertices (x_i + r_i y_i) lie in A; x, y of shape (m, n, 2)."""
    m, n, _ = x.shape
    hit = np.ones(m, dtype=bool)
    for r in itertools.product((0.0, 1.0), repeat=n):
        vertex = x + np.asarray(r)[None, :, None] * y
        hit &= A.contains(vertex.reshape(m, 2 * n))
    return hit


def count_cube(A: SetOracle, n: int, lam: float, eps: float, samples: int, seed: int, *,
               chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> EstimateWithError:
    """E[prod_r 1_A(x_1 + r_1 y_1, ..., x_n + r_n y_n)] with y_i = lam z_i + eps lam w_i.

    z_i is uniform on the unit circle and w_i has the planar Gaussian density
    exp(-pi |w|^2); eps = 0 gives the sharp count.
    """
    if A.dimension != 2 * n:
        raise ValueError(f"cube counting with n={n} needs a set of dimension {2 * n}, got {A.dimension}")
    if not 0 < lam <= 1 or eps < 0:
        raise ValueError("need 0 < lambda <= 1 and eps >= 0")

    def kernel(rng: np.random.Generator, m: int) -> np.ndarray:
        x = rng.random((m, n, 2))
        z = circle_draws(rng, m * n).reshape(m, n, 2)
        y = lam * z
        if eps > 0:
            y = y + eps * lam * planar_gaussian_draws(rng, (m, n, 2))
        return cube_hits(A, x, y)

    return _estimate(kernel, samples, seed, None, chunk_size, workers)


def varnavides_lhs(A: SetOracle, n: int, lam: float, samples: int, seed: int, *,
                   chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> EstimateWithError:
    """Average of prod_i 1_A(x + i y) over x in [0,1]^d and y in [0, lam]^d."""
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    d = A.dimension

    def kernel(rng: np.random.Generator, m: int) -> np.ndarray:
        x = rng.random((m, d))
        y = lam * rng.random((m, d))
        return progression_hits(A, x, y, n)

    return _estimate(kernel, samples, seed, None, chunk_size, workers)


@dataclass
class SpectrumHistogram:
    lambda_edges: np.ndarray
    hit_counts: np.ndarray
    trial_counts: np.ndarray
    witnesses: list = field(default_factory=list)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.lambda_edges[:-1] + self.lambda_edges[1:])

    @property
    def bucket_width(self) -> float:
        return float(np.max(np.diff(self.lambda_edges)))

    @property
    def hit_mask(self) -> np.ndarray:
        return self.hit_counts > 0

    def longest_hit_run(self) -> int:
        best = run = 0
        for hit in self.hit_mask:
            run = run + 1 if hit else 0
            best = max(best, run)
        return best

    def all_witnesses(self) -> tuple[np.ndarray, np.ndarray]:
        xs = [w[0] for w in self.witnesses if w is not None and len(w[0])]
        ys = [w[1] for w in self.witnesses if w is not None and len(w[1])]
        if not xs:
            return np.empty((0, 0)), np.empty((0, 0))
        return np.concatenate(xs), np.concatenate(ys)


def gap_spectrum(A: SetOracle, n: int, p: float, lambda_min: float, lambda_max: float, buckets: int,
                 trials_per_bucket: int, seed: int, *, keep_all: bool = False, workers: int = 1,
                 chunk_size: int = DEFAULT_CHUNK) -> SpectrumHistogram:
    """Which gap sizes lambda admit a witnessed n-term progression in A.

    Bucket b runs its trials at the bucket midpoint on stream (seed, b); one
    witness (x, y) per hit bucket is kept unless ``keep_all`` is set.
    """
    if not 0 < lambda_min < lambda_max or buckets < 1 or trials_per_bucket < 1:
        raise ValueError("need 0 < lambda_min < lambda_max, buckets >= 1 and trials >= 1")
    d = A.dimension
    edges = np.linspace(lambda_min, lambda_max, buckets + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])

    def work(b: int):
        rng = SeedStream(seed, b).generator()
        hits = 0
        found_x, found_y = [], []
        remaining = trials_per_bucket
        while remaining:
            m = min(remaining, chunk_size)
            remaining -= m
            x = rng.random((m, d))
            y = mids[b] * sigma_draws(rng, p, d, m)
            ok = progression_hits(A, x, y, n)
            hits += int(ok.sum())
            if ok.any() and (keep_all or not found_x):
                take = ok if keep_all else (np.flatnonzero(ok)[:1])
                found_x.append(x[take])
                found_y.append(y[take])
        if not found_x:
            return hits, None
        return hits, (np.concatenate(found_x), np.concatenate(found_y))

    results = map_ordered(work, list(range(buckets)), workers)
    return SpectrumHistogram(
        edges,
        np.array([r[0] for r in results], dtype=np.int64),
        np.full(buckets, trials_per_bucket, dtype=np.int64),
        [r[1] for r in results],
    )


def verify_annuli_rigidity(A: SetOracle, xs, ys) -> np.ndarray:
    """Per witness, whether dist(2 ||y/eps||^2, Z) < 2/5.

    Every witness must be a 3-term progression x, x+y, x+2y inside A.
    """
    if A.family != "annuli":
        raise ValueError("rigidity check applies to the annuli family")
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if xs.size == 0:
        return np.zeros(0, dtype=bool)
    if not progression_hits(A, xs, ys, 3).all():
        raise ValueError("witness is not a 3-term progression inside the set")
    eps = A.param("eps")
    v = 2.0 * np.sum((ys / eps) ** 2, axis=1)
    return np.abs(v - np.rint(v)) < 0.4


def loglog_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


@dataclass(frozen=True)
class ScanRow:
    label: str
    scale: float
    value: float
    stderr: float


@dataclass(frozen=True)
class ScanResult:
    rows: tuple
    slope: float
    samples: int
    seed: int
    reference: tuple = ()
    tail_slope: float = math.nan


def uniform_error_scan(A: SetOracle, n: int, p: float, d: int, lam: float, eps_list, samples: int, seed: int, *,
                       chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> ScanResult:
    """|N^eps' - N^eps| across eps_list, eps' the smallest entry, with a log-log slope in eps.

    All smoothing levels share the same (x, z, w) draws, so each difference is
    estimated with a coupled, low-variance estimator.
    """
    eps_arr = np.asarray(eps_list, dtype=float)
    if eps_arr.size < 3 or np.any(np.diff(eps_arr) > 0) or np.any(eps_arr <= 0):
        raise ValueError("eps_list must be non-increasing, positive, with at least 3 entries")
    _check_dimension(A, d)
    k = eps_arr.size

    def kernel(rng: np.random.Generator, m: int) -> np.ndarray:
        x = rng.random((m, d))
        z = lam * sigma_draws(rng, p, d, m)
        w = lam * sample_bump(rng, (m, d))
        hits = np.column_stack([progression_hits(A, x, z + e * w, n) for e in eps_arr]).astype(float)
        return np.column_stack([hits, hits - hits[:, -1:]])

    est = mc_mean(kernel, samples, seed, chunk_size=chunk_size, workers=workers)
    rows = []
    for i, e in enumerate(eps_arr):
        rows.append(ScanRow("value", float(e), float(est.mean[i]), float(est.stderr[i])))
        rows.append(ScanRow("difference", float(e), float(abs(est.mean[k + i])), float(est.stderr[k + i])))
    diffs = [r for r in rows if r.label == "difference" and r.scale > eps_arr[-1]]
    slope = loglog_slope([r.scale for r in diffs], [r.value for r in diffs])
    return ScanResult(tuple(rows), slope, samples, seed)


def dyadic_scales(J: int) -> np.ndarray:
    return 1.5 * 2.0 ** (-np.arange(1, J + 1))


def multiscale_error_scan(A: SetOracle, n: int, p: float, d: int, eps: float, J: int, samples: int, seed: int, *,
                          lambdas=None, chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> ScanResult:
    """N^eps_{lambda_j} - N^1_{lambda_j} for lambda_j = 1.5 * 2^-j, j = 1..J, and their cumulative sum.

    The slope is the log-log fit of the cumulative absolute sum against J and
    the tail slope the same fit restricted to J/2..J; the reference curve
    J^(1 - 2^(2-n)) is returned alongside.
    """
    if not 1 <= J <= 20:
        raise ValueError("J must lie in 1..20")
    _check_dimension(A, d)
    lams = dyadic_scales(J) if lambdas is None else np.asarray(lambdas, dtype=float)
    if lams.size != J or np.any(lams <= 0) or np.any(lams > 1.5):
        raise ValueError("need J scales in (0, 1.5]")

    def kernel(rng: np.random.Generator, m: int) -> np.ndarray:
        x = rng.random((m, d))
        z = sigma_draws(rng, p, d, m)
        w = sample_bump(rng, (m, d))
        cols = []
        for lam in lams:
            fine = progression_hits(A, x, lam * z + eps * lam * w, n)
            coarse = progression_hits(A, x, lam * z + lam * w, n)
            cols.append(fine.astype(float) - coarse)
        return np.column_stack(cols)

    est = mc_mean(kernel, samples, seed, chunk_size=chunk_size, workers=workers)
    cumulative = np.cumsum(np.abs(est.mean))
    rows = []
    for j in range(J):
        rows.append(ScanRow("difference", float(lams[j]), float(est.mean[j]), float(est.stderr[j])))
        rows.append(ScanRow("cumulative", float(j + 1), float(cumulative[j]), float(np.sqrt(np.sum(est.stderr[: j + 1] ** 2)))))
    js = np.arange(1, J + 1)
    reference = tuple(float(v) for v in js ** (1.0 - 2.0 ** (2 - n)))
    slope = loglog_slope(js, cumulative) if J >= 2 else math.nan
    tail = js >= max(1, J // 2)
    tail_slope = loglog_slope(js[tail], cumulative[tail]) if tail.sum() >= 2 else math.nan
    return ScanResult(tuple(rows), slope, samples, seed, reference, tail_slope)


@dataclass(frozen=True)
class BoxNormResult:
    lhs: float
    rhs: float
    holds: bool
    lhs_count: int
    total_sum: int


def _box_count(B: np.ndarray) -> int:
    """Sum over all (x_i^0, x_i^1) tuples of prod_r B(x^r), as an exact integer."""
    if B.ndim == 1:
        s = int(B.sum())
        return s * s
    total = 0
    for i in range(B.shape[0]):
        for j in range(B.shape[0]):
            prod = B[i] * B[j]
            if prod.any():
                total += _box_count(prod)
    return total


def box_norm_check(B, n: int | None = None) -> BoxNormResult:
    """lhs = box average of B over its 2^n vertices, rhs = (mean of B)^(2^n); lhs >= rhs is exact."""
    arr = np.asarray(B)
    if n is None:
        n = arr.ndim
    if arr.ndim != n or any(s < 1 for s in arr.shape):
        raise ValueError("B must be an n-dimensional array with every axis of length >= 1")
    if arr.size > 10 ** 6:
        raise ValueError("grid too large for the exact check (more than 10^6 cells)")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("B must be 0/1 valued")
    arr = arr.astype(np.int64)
    count = _box_count(arr)
    cells = arr.size
    total = int(arr.sum())
    # compare count / cells^2 >= (total / cells)^(2^n) in integers
    holds = count * cells ** (2 ** n) >= total ** (2 ** n) * cells ** 2
    return BoxNormResult(count / cells ** 2, (total / cells) ** (2 ** n), bool(holds), count, total)


def box_norm_bruteforce(B) -> float:
    """Literal average over all vertex tuples; for small grids only."""
    arr = np.asarray(B)
    n = arr.ndim
    pairs = [list(itertools.product(range(s), repeat=2)) for s in arr.shape]
    total = 0
    count = 0
    for choice in itertools.product(*pairs):
        prod = 1
        for r in itertools.product((0, 1), repeat=n):
            prod *= int(arr[tuple(choice[i][r[i]] for i in range(n))])
        total += prod
        count += 1
    return total / count


def slab_family(n: int, delta: float) -> SetOracle:
    """A_delta = [0, delta] x [0,1] x ([0,1]^2)^(n-1)."""
    return make_box([0.0] * (2 * n), [delta] + [1.0] * (2 * n - 1))


@dataclass(frozen=True)
class StructuredResult:
    value: EstimateWithError
    deltas: tuple
    family_values: tuple
    slope: float
    passed: bool


def structured_lower_check(A: SetOracle, n: int, lam: float, samples: int, seed: int, *,
                           deltas=(0.1, 0.2, 0.3, 0.4, 0.5), workers: int = 1,
                           chunk_size: int = DEFAULT_CHUNK) -> StructuredResult:
    """N^1_lambda(A) > 0, and the slab family's log-log slope of N^1 against delta is <= 2^n + 1/2."""
    if A.known_measure == 0:
        raise ValueError("structured lower bound needs a set of positive measure")
    value = count_cube(A, n, lam, 1.0, samples, seed, workers=workers, chunk_size=chunk_size)
    family = [count_cube(slab_family(n, dl), n, lam, 1.0, samples, seed, workers=workers, chunk_size=chunk_size)
              for dl in deltas]
    vals = tuple(e.value for e in family)
    slope = loglog_slope(deltas, vals)
    passed = value.value > 0 and all(v > 0 for v in vals) and slope <= 2 ** n + 0.5
    return StructuredResult(value, tuple(deltas), vals, slope, bool(passed))
