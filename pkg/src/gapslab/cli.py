"""Command-line experiment runner.

Every run is determined by a RunConfig and its seed.  Configs are flat INI
files; command-line flags override config values.  Results are written as CSV
with a commented provenance header, optionally with an SVG plot.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields, replace
from typing import Callable

import numpy as np

from gapslab import __version__
from gapslab.geometry import ExperimentParams
from gapslab.sphere import NORMALIZATION_NOTE

SUBCOMMANDS = ("count", "cube", "gaps", "counterexample", "gowers", "identities", "discrete", "scan", "report")
SET_FAMILIES = ("full", "cube", "empty", "box", "halfspace", "annuli", "shells", "thinboxes")
CSV_COLUMNS = ("experiment", "label", "n", "p", "d", "lambda", "eps", "scale", "value", "stderr", "samples", "seed")

EXIT_OK, EXIT_MATH, EXIT_CONFIG = 0, 1, 2

# subcommand-specific options: name -> (type, default, help)
OPTION_SPECS: dict[str, dict[str, tuple]] = {
    "count": {"smoothed": (bool, False, "use the mollified gap lambda z + eps lambda w")},
    "cube": {"sharp": (bool, False, "count sharp cubes instead of the eps-smoothed count")},
    "gaps": {
        "lambda_min": (float, 0.005, "smallest gap"),
        "lambda_max": (float, 0.5, "largest gap"),
        "buckets": (int, 99, "number of lambda buckets"),
    },
    "counterexample": {
        "lambda_min": (float, 0.005, "smallest gap"),
        "lambda_max": (float, 0.5, "largest gap"),
        "buckets": (int, 99, "number of lambda buckets"),
    },
    "gowers": {
        "target": (str, "indicator", "indicator, gaussian or oscillatory"),
        "grid_step": (float, 0.002, "grid spacing for the Riemann sum"),
        "frequencies": (str, "1,10,100", "comma-separated u values (oscillatory)"),
        "eta": (float, 0.3, "inner cutoff (oscillatory)"),
        "nodes": (int, 64, "Gauss-Legendre nodes per half-axis (oscillatory)"),
    },
    "identities": {"suite": (str, "all", "gaussian, telescoping or all")},
    "discrete": {
        "N": (int, 9, "ambient interval length"),
        "mode": (str, "branch", "branch or exhaustive"),
    },
    "scan": {
        "kind": (str, "uniform", "uniform or multiscale"),
        "eps_list": (str, "0.4,0.2,0.1,0.05,0.025", "smoothing levels for the uniform scan"),
        "J": (int, 10, "number of dyadic scales for the multiscale scan"),
    },
    "report": {"input": (str, "", "CSV produced by an earlier run")},
}

SET_OPTION_SPECS: dict[str, tuple] = {
    "lo": (str, "", "box lower corner, comma-separated"),
    "hi": (str, "", "box upper corner, comma-separated"),
    "normal": (str, "", "half-space normal, comma-separated"),
    "offset": (float, 0.5, "half-space offset"),
    "eps": (float, 0.1, "scale of the annuli or shells"),
    "S": (str, "0,1,3,7,8", "thin-box index set, comma-separated"),
    "N": (int, 9, "thin-box ambient size"),
}

PARAM_KEYS = (("n", "n", int), ("p", "p", float), ("d", "d", int), ("lambda", "lam", float),
              ("eps", "eps", float), ("delta", "delta", float), ("seed", "seed", int))


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class MathFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    params: ExperimentParams = field(default_factory=ExperimentParams)
    set_family: str = "full"
    set_options: tuple = ()
    samples: int = 100000
    output_path: str = "-"
    emit_svg: str = ""
    options: tuple = ()

    def option(self, name: str):
        kind, default, _ = OPTION_SPECS.get(self.subcommand, {}).get(name, (str, None, ""))
        return _convert(dict(self.options).get(name, default), kind, f"options.{name}")

    def set_option(self, name: str):
        kind, default, _ = SET_OPTION_SPECS[name]
        return _convert(dict(self.set_options).get(name, default), kind, f"set.{name}")


def _convert(value, kind, key: str):
    if value is None or not isinstance(value, str):
        return value
    try:
        if kind is bool:
            low = value.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(value)
            return low in ("1", "true", "yes")
        return kind(value)
    except ValueError:
        raise ConfigError(key, f"cannot parse {value!r} as {kind.__name__}") from None


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def validate(config: RunConfig) -> RunConfig:
    if config.subcommand not in SUBCOMMANDS:
        raise ConfigError("run.subcommand", f"unknown subcommand {config.subcommand!r}")
    if config.set_family not in SET_FAMILIES:
        raise ConfigError("set.family", f"unknown set family {config.set_family!r}")
    if config.samples < 1:
        raise ConfigError("run.samples", "must be positive")
    known = OPTION_SPECS.get(config.subcommand, {})
    for key, _ in config.options:
        if key not in known:
            raise ConfigError(f"options.{key}", f"not an option of {config.subcommand}")
        config.option(key)
    for key, _ in config.set_options:
        if key not in SET_OPTION_SPECS:
            raise ConfigError(f"set.{key}", "unknown set option")
        config.set_option(key)
    return config


def make_params(values: dict) -> ExperimentParams:
    kwargs = {}
    for key, attr, kind in PARAM_KEYS:
        if key in values:
            kwargs[attr] = _convert(values[key], kind, f"params.{key}")
    try:
        return ExperimentParams(**kwargs)
    except ValueError as exc:
        name = str(exc).split()[0]
        key = {"lam": "lambda"}.get(name, name)
        raise ConfigError(f"params.{key}", str(exc)) from None


def config_to_ini(config: RunConfig) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser["run"] = {"subcommand": config.subcommand, "samples": str(config.samples),
                     "output": config.output_path, "svg": config.emit_svg}
    parser["params"] = {key: _fmt(getattr(config.params, attr)) for key, attr, _ in PARAM_KEYS}
    parser["set"] = {"family": config.set_family, **{k: v for k, v in config.set_options}}
    parser["options"] = {k: v for k, v in config.options}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def save_config(config: RunConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config_to_ini(config))


def parse_ini(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError("config", f"parse error: {exc}") from None
    if not parser.has_option("run", "subcommand"):
        raise ConfigError("run.subcommand", "missing required key")
    run = parser["run"]
    params = make_params(dict(parser["params"])) if parser.has_section("params") else ExperimentParams()
    set_sec = dict(parser["set"]) if parser.has_section("set") else {}
    family = set_sec.pop("family", "full")
    options = dict(parser["options"]) if parser.has_section("options") else {}
    config = RunConfig(
        subcommand=run["subcommand"],
        params=params,
        set_family=family,
        set_options=tuple(sorted(set_sec.items())),
        samples=_convert(run.get("samples", "100000"), int, "run.samples"),
        output_path=run.get("output", "-"),
        emit_svg=run.get("svg", ""),
        options=tuple(sorted(options.items())),
    )
    return validate(config)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    return parse_ini(text, path)


def describe() -> dict:
    """Machine-readable config schema."""
    def spec(kind, default, text):
        return {"type": kind.__name__, "default": default, "help": text}

    return {
        "run": {
            "subcommand": {"type": "str", "choices": list(SUBCOMMANDS), "required": True},
            "samples": {"type": "int", "default": 100000},
            "output": {"type": "str", "default": "-"},
            "svg": {"type": "str", "default": ""},
        },
        "params": {key: {"type": kind.__name__, "default": getattr(ExperimentParams(), attr)}
                   for key, attr, kind in PARAM_KEYS},
        "set": {"family": {"type": "str", "choices": list(SET_FAMILIES), "default": "full"},
                **{k: spec(*v) for k, v in SET_OPTION_SPECS.items()}},
        "options": {sub: {k: spec(*v) for k, v in opts.items()} for sub, opts in OPTION_SPECS.items()},
        "env": {"GAPSLAB_SEED": "default seed when neither --seed nor the config sets one"},
    }


# ---------------------------------------------------------------- sets

def _floats(text: str, key: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(key, f"expected comma-separated numbers, got {text!r}") from None


def build_set(config: RunConfig, dimension: int):
    from gapslab import sets

    fam = config.set_family
    try:
        if fam in ("full", "cube"):
            return sets.make_full(dimension)
        if fam == "empty":
            return sets.make_empty(dimension)
        if fam == "box":
            lo = _floats(config.set_option("lo"), "set.lo") or [0.0] * dimension
            hi = _floats(config.set_option("hi"), "set.hi") or [1.0] * dimension
            if len(lo) != dimension or len(hi) != dimension:
                raise ConfigError("set.lo", f"box corners need {dimension} coordinates")
            return sets.make_box(lo, hi)
        if fam == "halfspace":
            normal = _floats(config.set_option("normal"), "set.normal") or [1.0] + [0.0] * (dimension - 1)
            if len(normal) != dimension:
                raise ConfigError("set.normal", f"normal needs {dimension} coordinates")
            return sets.make_halfspace(normal, config.set_option("offset"))
        if fam == "annuli":
            return sets.make_bourgain_annuli(dimension, config.set_option("eps"))
        if fam == "shells":
            p = config.params.p
            if p != int(p):
                raise ConfigError("params.p", "shells need an integer exponent")
            return sets.make_lp_shells(config.params.n, int(p), dimension, config.set_option("eps"))
        if fam == "thinboxes":
            S = [int(v) for v in _floats(config.set_option("S"), "set.S")]
            return sets.make_thin_boxes(S, config.set_option("N"), dimension)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("set.family", f"{fam}: {exc}") from None
    raise ConfigError("set.family", f"unknown set family {fam!r}")


# ---------------------------------------------------------------- output

@dataclass
class Report:
    rows: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    failed: bool = False
    svg: str = ""
    svg_path: str = ""

    def add(self, config: RunConfig, experiment: str, label: str, value, stderr=0.0, scale=math.nan,
            samples=None) -> None:
        p = config.params
        self.rows.append({
            "experiment": experiment, "label": label, "n": p.n, "p": p.p, "d": p.d, "lambda": p.lam,
            "eps": p.eps, "scale": float(scale), "value": float(value), "stderr": float(stderr),
            "samples": config.samples if samples is None else int(samples), "seed": p.seed,
        })

    def verdict(self, name: str, ok: bool, detail: str = "") -> None:
        self.verdicts.append(f"{name}: {'PASS' if ok else 'FAIL'}{' (' + detail + ')' if detail else ''}")
        self.failed |= not ok


def render_csv(config: RunConfig, report: Report) -> str:
    buf = io.StringIO()
    buf.write(f"# gapslab {__version__}\n")
    buf.write(f"# seed = {config.params.seed}\n")
    buf.write(f"# normalization: {NORMALIZATION_NOTE}\n")
    for line in config_to_ini(config).splitlines():
        if line.strip():
            buf.write(f"# config: {line}\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in report.rows:
        writer.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()


def csv_body(text: str) -> str:
    """The CSV without its commented header lines."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def read_csv_rows(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


# ---------------------------------------------------------------- experiments

def run_count(config: RunConfig, workers: int, report: Report) -> None:
    from gapslab.counting import count_ap_sharp, count_ap_smoothed

    A = build_set(config, config.params.d)
    smoothed = config.option("smoothed")
    fn = count_ap_smoothed if smoothed else count_ap_sharp
    est = fn(A, config.params, config.samples, workers=workers)
    report.add(config, "count", "smoothed" if smoothed else "sharp", est.value, est.stderr)


def run_cube(config: RunConfig, workers: int, report: Report) -> None:
    from gapslab.counting import count_cube

    p = config.params
    A = build_set(config, 2 * p.n)
    sharp = config.option("sharp")
    est = count_cube(A, p.n, p.lam, 0.0 if sharp else p.eps, config.samples, p.seed, workers=workers)
    report.add(config, "cube", "sharp" if sharp else "smoothed", est.value, est.stderr)


def _spectrum(config: RunConfig, A, workers: int, keep_all: bool):
    from gapslab.counting import gap_spectrum

    lo, hi = config.option("lambda_min"), config.option("lambda_max")
    buckets = config.option("buckets")
    if not 0 < lo < hi:
        raise ConfigError("options.lambda_min", "need 0 < lambda_min < lambda_max")
    if buckets < 1:
        raise ConfigError("options.buckets", "must be positive")
    return gap_spectrum(A, config.params.n, config.params.p, lo, hi, buckets, config.samples,
                        config.params.seed, keep_all=keep_all, workers=workers)


def _spectrum_rows(config: RunConfig, hist, experiment: str, report: Report) -> None:
    from gapslab.plots import bar_svg

    for mid, hits, trials in zip(hist.midpoints, hist.hit_counts, hist.trial_counts):
        f = hits / trials
        report.add(config, experiment, "bucket", f, math.sqrt(f * (1 - f) / trials), scale=mid, samples=trials)
    report.svg = bar_svg(hist.midpoints, hist.hit_counts / hist.trial_counts,
                         f"{experiment}: {config.set_family}", "gap lambda", "hit fraction")


def run_gaps(config: RunConfig, workers: int, report: Report) -> None:
    A = build_set(config, config.params.d)
    _spectrum_rows(config, _spectrum(config, A, workers, False), "gaps", report)


def run_counterexample(config: RunConfig, workers: int, report: Report) -> None:
    from gapslab.counting import verify_annuli_rigidity

    if config.set_family not in ("annuli", "shells"):
        raise ConfigError("set.family", "counterexample needs the annuli or shells family")
    A = build_set(config, config.params.d)
    hist = _spectrum(config, A, workers, True)
    _spectrum_rows(config, hist, "counterexample", report)
    eps = config.set_option("eps")
    run_limit = int(round(eps / hist.bucket_width)) + 2
    run = hist.longest_hit_run()
    report.add(config, "counterexample", "longest_run", run, scale=run_limit)
    report.verdict("spectrum runs", run <= run_limit, f"longest {run}, allowed {run_limit}")
    if config.set_family == "annuli" and config.params.n == 3:
        xs, ys = hist.all_witnesses()
        ok = verify_annuli_rigidity(A, xs, ys)
        frac = float(ok.mean()) if ok.size else 1.0
        report.add(config, "counterexample", "rigidity", frac, samples=ok.size)
        report.verdict("rigidity", bool(ok.all()), f"{int(ok.sum())}/{ok.size} witnesses")


def run_gowers(config: RunConfig, workers: int, report: Report) -> None:
    from gapslab import gowers, oscillatory

    target = config.option("target")
    p = config.params
    if target in ("indicator", "gaussian"):
        f = gowers.indicator([0.0], [1.0]) if target == "indicator" else gowers.gaussian_function(1)
        exact = (2 / 3) ** 0.25 if target == "indicator" else 2 ** -0.25
        grid = gowers.un_norm_grid(f, 2, config.option("grid_step"))
        mc = gowers.un_norm_mc(f, 2, config.samples, p.seed, workers=workers)
        half = gowers.un_norm_mc(gowers.dilate(f, 0.5), 2, config.samples, p.seed + 1, workers=workers)
        ratio = half.value / mc.value
        ratio_err = ratio * math.hypot(half.stderr / half.value, mc.stderr / mc.value)
        report.add(config, "gowers", f"{target}_exact", exact)
        report.add(config, "gowers", f"{target}_grid", grid, scale=config.option("grid_step"))
        report.add(config, "gowers", f"{target}_mc", mc.value, mc.stderr)
        report.add(config, "gowers", "dilation_ratio", ratio, ratio_err, scale=0.5)
        report.verdict("grid", abs(grid - exact) <= 0.01 * exact, f"{grid!r} vs {exact!r}")
        report.verdict("scaling", abs(ratio - 2 ** 0.25) <= 4 * ratio_err, f"{ratio!r}")
        return
    if target != "oscillatory":
        raise ConfigError("options.target", f"unknown target {target!r}")
    us = _floats(config.option("frequencies"), "options.frequencies")
    eta, nodes = config.option("eta"), config.option("nodes")
    if p.n not in (2, 3):
        raise ConfigError("params.n", "oscillatory norms need n in {2, 3}")
    values = []
    for u in us:
        val = oscillatory.un_1d_oscillatory(u, p.n, p.p, eta, nodes=nodes, workers=workers)
        values.append(val)
        report.add(config, "gowers", "oscillatory_norm", val, scale=u, samples=0)
    from gapslab.plots import loglog_svg

    report.svg = loglog_svg({"norm": list(zip(us, values))}, f"U^{p.n} norm, p={p.p}", "u", "norm")


def run_identities(config: RunConfig, workers: int, report: Report) -> None:
    from gapslab import gaussian, telescoping
    from gapslab.sets import make_full

    suite = config.option("suite")
    if suite not in ("gaussian", "telescoping", "all"):
        raise ConfigError("options.suite", f"unknown suite {suite!r}")
    checks: list[tuple[str, Callable[[], float], float]] = []
    if suite in ("gaussian", "all"):
        for d in (1, 2):
            checks.append((f"ft_pairs_d{d}", lambda d=d: gaussian.verify_ft_pairs(d), 1e-6))
            checks.append((f"convolution_3_4_d{d}", lambda d=d: gaussian.verify_convolution_identities(3.0, 4.0, d), 1e-6))
            checks.append((f"heat_d{d}", lambda d=d: gaussian.heat_equation_residual(
                np.linspace(0.5, 2.0, 7), np.linspace(-2.0, 2.0, 9), d), 1e-6))
    if suite in ("telescoping", "all"):
        rng = np.random.Generator(np.random.Philox(key=config.params.seed))
        pts2 = tuple((rng.normal(size=1), rng.normal(size=1)) for _ in range(10))
        pts3 = tuple((rng.normal(size=1), rng.normal(size=1), rng.normal(size=1)) for _ in range(10))
        checks.append(("tilde_n2", lambda: telescoping.verify_identity_tilde(
            telescoping.TelescopeInstance(1, 1, 2, (1.0,), 0.5, 2.0, pts2)), 1e-5))
        checks.append(("tilde_n3", lambda: telescoping.verify_identity_tilde(
            telescoping.TelescopeInstance(1, 1, 3, (1.0, 0.7), 0.5, 2.0, pts3)), 1e-5))
        checks.append(("full_n3_k2", lambda: telescoping.verify_identity_full(
            telescoping.TelescopeInstance(2, 1, 3, (1.0, 0.7), 0.5, 2.0, pts2)), 1e-5))

        def theta_xi() -> float:
            res = telescoping.verify_theta_xi_identity(make_full(2), 1, (1.0,), 0.25, 4.0)
            return res.residual if res.bounds_ok else math.inf

        checks.append(("theta_xi_square", theta_xi, 1e-5))
    for name, fn, tol in checks:
        residual = float(fn())
        report.add(config, "identities", name, residual, scale=tol, samples=0)
        report.verdict(name, residual <= tol, f"residual {residual:.3g}")


def run_discrete(config: RunConfig, workers: int, report: Report) -> None:
    from gapslab import discrete

    N, mode, n = config.option("N"), config.option("mode"), config.params.n
    if mode not in ("branch", "exhaustive"):
        raise ConfigError("options.mode", f"unknown mode {mode!r}")
    if n < 3:
        raise ConfigError("params.n", "progressions need n >= 3")
    limit = discrete.EXHAUSTIVE_LIMIT if mode == "exhaustive" else discrete.BRANCH_BOUND_LIMIT
    if not 1 <= N <= limit:
        raise ConfigError("options.N", f"must lie in 1..{limit} for mode {mode}")
    table = discrete.free_size_table(N, n)
    for m in range(1, N + 1):
        report.add(config, "discrete", "max_free", table[m], scale=m, samples=0)
    result = discrete.max_ap_free_size(N, n, mode)
    if result.size != table[N]:
        report.verdict("search modes agree", False, f"{result.size} vs {table[N]}")
    bridge = discrete.bridge_check(result.witness, n, config.params.d, config.samples, config.params.seed,
                                   workers=workers)
    report.add(config, "discrete", "bridge", bridge.estimate.value, bridge.estimate.stderr, scale=bridge.bound)
    report.add(config, "discrete", "bridge_exact", bridge.exact, scale=bridge.bound, samples=0)
    report.verdict("bridge", bridge.passed, f"witness {list(result.witness.elements)}")


def run_scan(config: RunConfig, workers: int, report: Report) -> None:
    from gapslab.counting import multiscale_error_scan, uniform_error_scan
    from gapslab.plots import loglog_svg

    p = config.params
    A = build_set(config, p.d)
    kind = config.option("kind")
    if kind == "uniform":
        eps_list = _floats(config.option("eps_list"), "options.eps_list")
        try:
            res = uniform_error_scan(A, p.n, p.p, p.d, p.lam, eps_list, config.samples, p.seed, workers=workers)
        except ValueError as exc:
            raise ConfigError("options.eps_list", str(exc)) from None
    elif kind == "multiscale":
        J = config.option("J")
        if not 1 <= J <= 20:
            raise ConfigError("options.J", "must lie in 1..20")
        res = multiscale_error_scan(A, p.n, p.p, p.d, p.eps, J, config.samples, p.seed, workers=workers)
    else:
        raise ConfigError("options.kind", f"unknown scan kind {kind!r}")
    series: dict[str, list] = {}
    for row in res.rows:
        report.add(config, f"scan_{kind}", row.label, row.value, row.stderr, scale=row.scale)
        series.setdefault(row.label, []).append((row.scale, abs(row.value)))
    report.add(config, f"scan_{kind}", "slope", res.slope)
    if kind == "multiscale":
        report.add(config, f"scan_{kind}", "tail_slope", res.tail_slope)
        series = {"cumulative": series["cumulative"],
                  "reference": list(zip(range(1, len(res.reference) + 1), res.reference))}
    report.svg = loglog_svg(series, f"{kind} scan", "eps" if kind == "uniform" else "J", "value")


def run_report(config: RunConfig, workers: int, report: Report) -> None:
    from gapslab.plots import bar_svg, loglog_svg

    path = config.option("input")
    if not path:
        raise ConfigError("options.input", "report needs an input CSV")
    try:
        rows = read_csv_rows(path)
    except OSError as exc:
        raise ConfigError("options.input", f"cannot read {path}: {exc.strerror}") from None
    missing = [c for c in CSV_COLUMNS if rows and c not in rows[0]]
    if missing:
        raise ConfigError("options.input", f"missing columns {missing}")
    for row in rows:
        report.rows.append({c: _parse_cell(row[c]) for c in CSV_COLUMNS})
    buckets = [r for r in report.rows if r["label"] == "bucket"]
    if buckets:
        report.svg = bar_svg([r["scale"] for r in buckets], [r["value"] for r in buckets],
                             "gap spectrum", "gap lambda", "hit fraction")
    else:
        series: dict[str, list] = {}
        for r in report.rows:
            if isinstance(r["scale"], float) and not math.isnan(r["scale"]):
                series.setdefault(str(r["label"]), []).append((r["scale"], abs(r["value"])))
        report.svg = loglog_svg(series, os.path.basename(path), "scale", "value")
    if not config.emit_svg:
        report.svg_path = os.path.splitext(path)[0] + "_report.svg"


def _parse_cell(text: str):
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


RUNNERS = {
    "count": run_count, "cube": run_cube, "gaps": run_gaps, "counterexample": run_counterexample,
    "gowers": run_gowers, "identities": run_identities, "discrete": run_discrete, "scan": run_scan,
    "report": run_report,
}


def run(config: RunConfig, workers: int = 1, stdout=None, stderr=None) -> int:
    """Execute a validated config; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    report = Report()
    RUNNERS[config.subcommand](config, workers, report)
    text = render_csv(config, report)
    if config.output_path in ("", "-"):
        stdout.write(text)
    else:
        with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    svg_path = config.emit_svg or report.svg_path
    if svg_path and report.svg:
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(report.svg)
    for line in report.verdicts:
        print(line, file=stderr)
    return EXIT_MATH if report.failed else EXIT_OK


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gapslab", description="Progression-gap numerical laboratory.")
    parser.add_argument("--version", action="version", version=f"gapslab {__version__}")
    parser.add_argument("--describe", action="store_true", help="print the config schema as JSON and exit")
    sub = parser.add_subparsers(dest="subcommand")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="INI config file; flags override its values")
        sp.add_argument("--save-config", help="write the effective config to this path")
        sp.add_argument("--seed", type=int, help="random seed (fallback: GAPSLAB_SEED, then 0)")
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker threads")
        sp.add_argument("--samples", type=int, help="Monte Carlo samples (trials per bucket for spectra)")
        sp.add_argument("--output", help="CSV path, '-' for stdout")
        sp.add_argument("--svg", help="also write an SVG plot to this path")
        sp.add_argument("--n", type=int, help="progression length")
        sp.add_argument("--p", type=float, help="lp exponent")
        sp.add_argument("--d", type=int, help="dimension")
        sp.add_argument("--lambda", dest="lam", type=float, help="gap size")
        sp.add_argument("--eps", type=float,
                        help="smoothing scale; for counterexample the set scale")
        sp.add_argument("--delta", type=float, help="density parameter")
        sp.add_argument("--set", "--family", dest="set_family", help=f"set family: {', '.join(SET_FAMILIES)}")
        sp.add_argument("--set-opt", action="append", default=[], metavar="KEY=VALUE",
                        help="set option (lo, hi, normal, offset, eps, S, N)")
        for opt, (kind, default, text) in OPTION_SPECS.get(name, {}).items():
            flag = "--" + opt.replace("_", "-")
            if kind is bool:
                sp.add_argument(flag, dest=f"opt_{opt}", action="store_const", const="true",
                                help=f"{text}")
            else:
                sp.add_argument(flag, dest=f"opt_{opt}", help=f"{text} (default {default})")
    return parser


def config_from_args(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    config = load_config(args.config) if args.config else RunConfig(args.subcommand)
    if args.config and config.subcommand != args.subcommand:
        config = replace(config, subcommand=args.subcommand, options=())
    param_values = {key: getattr(config.params, attr) for key, attr, _ in PARAM_KEYS}
    if not args.config and args.seed is None and "GAPSLAB_SEED" in environ:
        param_values["seed"] = _convert(environ["GAPSLAB_SEED"], int, "GAPSLAB_SEED")
    counterexample = args.subcommand == "counterexample"
    for key, attr, _ in PARAM_KEYS:
        value = getattr(args, "lam" if key == "lambda" else key)
        if value is not None:
            param_values[key] = value
    set_options = dict(config.set_options)
    options = dict(config.options)
    for item in args.set_opt:
        if "=" not in item:
            raise ConfigError("set", f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        set_options[k.strip()] = v.strip()
    for opt in OPTION_SPECS.get(args.subcommand, {}):
        value = getattr(args, f"opt_{opt}")
        if value is not None:
            options[opt] = value
    family = args.set_family or config.set_family
    if counterexample:
        if args.set_family is None and not args.config:
            family = "annuli"
        if args.eps is not None:
            set_options["eps"] = _fmt(float(args.eps))
    config = replace(
        config,
        params=make_params({k: str(v) for k, v in param_values.items()}),
        set_family=family,
        set_options=tuple(sorted(set_options.items())),
        options=tuple(sorted(options.items())),
        samples=args.samples if args.samples is not None else config.samples,
        output_path=args.output if args.output is not None else config.output_path,
        emit_svg=args.svg if args.svg is not None else config.emit_svg,
    )
    return validate(config)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.describe:
        print(json.dumps(describe(), indent=2, sort_keys=True))
        return EXIT_OK
    if not args.subcommand:
        parser.print_help()
        return EXIT_CONFIG
    try:
        config = config_from_args(args)
        if args.workers < 1:
            raise ConfigError("workers", "must be positive")
        if args.save_config:
            save_config(config, args.save_config)
        return run(config, args.workers)
    except ConfigError as exc:
        print(f"gapslab: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
