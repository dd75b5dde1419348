"""Declarative experiment runner.

``lifshitz-lab KIND --config PATH [--out DIR] [--seed N] [--threads N] [--assert]``

The config is YAML or JSON with blocks ``model``, ``numerics`` and
``thresholds`` plus a mandatory ``seed``. Every default that the runner
uses is written back into the echoed config of the result, so a result file
alone is enough to repeat the run. Outputs are ``result.json`` and one or
more CSV files in the output directory.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 acceptance
threshold breached (only with ``--assert``), 5 I/O failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .eig import EigensolverError
from .ids import (
    AlloyModel,
    coupling_curve,
    displacement_sweep,
    tail_bound_margin,
    estimate_ids,
    finite_volume_concavity,
    fit_exponent,
    khat,
    nonconstancy_outside_support,
    property_P_verify,
    tune_endpoint,
    van_hove_envelope,
)
from .potential import (
    BackgroundPotential,
    DisplacementModel,
    SingleSitePotential,
    SiteDistribution,
    displacement_bump,
    preset_sample,
)
from .spectral import (
    Catalogue,
    build_site,
    dtn_map,
    equivalence_matrix,
    normalize_zero,
    strip_scan,
)

log = logging.getLogger(__name__)

KINDS = ("equiv", "strip-scan", "dtn", "ids", "fit", "coupling", "concavity", "property-p", "displacement")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_THRESHOLD, EXIT_IO = 0, 2, 3, 4, 5


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration

_NUMERICS = {
    "equiv": {"n": 8, "axis": -1, "tol_equiv": 1e-6, "tol_eig": 1e-10},
    "strip-scan": {"n": 8, "lengths": [4, 8, 16, 32], "sequences": 20, "buffer_depth": 1,
                   "buffer_potential": 25.0, "marked_end": False, "tol_eig": 1e-10},
    "dtn": {"n": 64, "W0": 1.0, "depth": 1, "lambdas": [0.0, 0.2, 0.4, 0.6, 0.8]},
    "ids": {"n": 8, "L": 64, "energies": {"min": 0.05, "max": 5.0, "count": 25}, "trials": 1000,
            "window": None, "fit_kind": "van-hove", "max_failure_rate": 0.01},
    "fit": {"n": 8, "L": 64, "energies": {"min": 0.05, "max": 5.0, "count": 25}, "trials": 1000,
            "window": [0.3, 3.0], "fit_kind": "van-hove", "max_failure_rate": 0.01},
    "coupling": {"n": 8, "points": 21, "box_L": 2},
    "concavity": {"n": 8, "L": 4, "samples": 100, "step": 1e-3},
    "property-p": {"n": 8, "lengths": [4, 8, 16], "trials": 200, "endpoint_mass": 0.8},
    "displacement": {"n": 16, "delta_nodes": 4, "depth": 20.0, "tol": 1e-9},
}

_THRESHOLDS = {
    "equiv": {"max_transitivity_violations": 0},
    "strip-scan": {"slope_min": -2.3, "slope_max": -1.7, "max_spread": 10.0},
    "dtn": {"max_symmetry_residual": 1e-10},
    "ids": {"tail_margin": 0.0},
    "fit": {"slope_min": 0.43, "slope_max": 0.57},
    "coupling": {"tol_num": 1e-9},
    "concavity": {"tol_num": 1e-9, "hessian_tol": 1e-6},
    "property-p": {"max_spread": 10.0},
    "displacement": {},
}

_MODEL = {"dimension": 1, "background": {"value": 0.0}, "normalize": False, "sites": [{"preset": "zero"}],
          "probabilities": None}


def _merge(base: dict, over: Optional[dict]) -> dict:
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    model: dict
    numerics: dict
    thresholds: dict
    threads: int = 1
    output: str = "results"

    @classmethod
    def from_dict(cls, raw: dict, kind: Optional[str] = None) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        k = kind or raw.get("kind")
        if raw.get("kind") and kind and raw["kind"] != kind:
            raise ConfigError(f"config kind {raw['kind']!r} does not match subcommand {kind!r}")
        if k not in KINDS:
            raise ConfigError(f"unknown experiment kind {k!r}; known: {', '.join(KINDS)}")
        if "seed" not in raw or raw["seed"] is None:
            raise ConfigError("seed is mandatory")
        try:
            seed = int(raw["seed"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"seed must be an integer, got {raw['seed']!r}") from exc
        cfg = cls(
            kind=k,
            seed=seed,
            model=_merge(_MODEL, raw.get("model")),
            numerics=_merge(_NUMERICS[k], raw.get("numerics")),
            thresholds=_merge(_THRESHOLDS[k], raw.get("thresholds")),
            threads=int(raw.get("threads") or os.cpu_count() or 1),
            output=str(raw.get("output", "results")),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        num = self.numerics
        if int(num.get("n", 2)) < 2:
            raise ConfigError("n must be >= 2")
        for key, val in num.items():
            if key.startswith("tol") and not (isinstance(val, (int, float)) and val > 0):
                raise ConfigError(f"tolerance {key} must be positive")
        if "trials" in num and int(num["trials"]) < 1:
            raise ConfigError("trials must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        sites = self.model.get("sites") or []
        if self.kind in ("equiv", "strip-scan", "ids", "fit") and not sites:
            raise ConfigError("model.sites must list at least one site")
        probs = self.model.get("probabilities")
        if self.kind in ("strip-scan", "ids", "fit"):
            if probs is None or len(probs) != len(sites):
                raise ConfigError("model.probabilities must give one probability per site")
            try:
                SiteDistribution(tuple(probs))
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if self.kind in ("coupling", "concavity", "property-p") and "coupling" not in self.model:
            raise ConfigError("model.coupling block is required")
        if self.kind == "fit" and not num.get("window"):
            raise ConfigError("numerics.window is required for a fit")

    def echo(self) -> dict:
        return asdict(self)


def load_config(path, kind: Optional[str] = None, seed: Optional[int] = None,
                threads: Optional[int] = None, out: Optional[str] = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML/JSON: {exc}") from exc
    raw = dict(raw or {})
    if seed is not None:
        raw["seed"] = seed
    if threads is not None:
        raw["threads"] = threads
    if out is not None:
        raw["output"] = out
    return ExperimentConfig.from_dict(raw, kind)


# --------------------------------------------------------------------------
# model construction

def _background(model: dict, d: int, n: int) -> BackgroundPotential:
    bg = model.get("background") or {"value": 0.0}
    if "preset" in bg:
        values = preset_sample(bg["preset"], d, n, **(bg.get("params") or {}))
        return BackgroundPotential(values)
    return BackgroundPotential.constant(float(bg.get("value", 0.0)), d, n)


def _site(spec: dict, d: int, n: int, background=None) -> SingleSitePotential:
    try:
        return build_site(spec["preset"], d, n, spec.get("params"), spec.get("tune"), background)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad site spec {spec}: {exc}") from exc


def build_catalogue(cfg: ExperimentConfig) -> Catalogue:
    model, n = cfg.model, int(cfg.numerics["n"])
    d = int(model["dimension"])
    bg = _background(model, d, n)
    sites = [_site(s, d, n, bg) for s in model["sites"]]
    if model.get("normalize"):
        bg, _ = normalize_zero(bg, sites)
    return Catalogue(sites, bg)


def _coupling_site(cfg: ExperimentConfig) -> tuple:
    block = cfg.model["coupling"]
    d, n = int(cfg.model["dimension"]), int(cfg.numerics["n"])
    site = block.get("site") or {}
    try:
        V = SingleSitePotential.from_preset(site["preset"], d, n, **(site.get("params") or {}))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad coupling site {site}: {exc}") from exc
    a = float(block.get("a", 0.0))
    if block.get("b") is not None:
        b = float(block["b"])
    else:
        tune = block.get("tune_b") or {}
        b = tune_endpoint(V, a, float(tune.get("lo", 1.0)), float(tune.get("hi", 200.0)))
        block["b_tuned"] = b
    if b <= a:
        raise ConfigError("coupling endpoints need a < b")
    return V, a, b


# --------------------------------------------------------------------------
# runners: each returns the payload with its csv tables and checks

def _energies(spec) -> np.ndarray:
    if isinstance(spec, dict):
        return np.geomspace(float(spec["min"]), float(spec["max"]), int(spec["count"]))
    return np.asarray(spec, dtype=float)


def _check(value, passed: bool, threshold) -> dict:
    return {"value": value, "threshold": threshold, "passed": bool(passed)}


def _run_equiv(cfg):
    num = cfg.numerics
    cat = build_catalogue(cfg)
    cat.tol = float(num["tol_eig"])
    rep = equivalence_matrix(cat, int(num["axis"]), float(num["tol_equiv"]), cfg.threads)
    j = rep.axis
    rows = [
        {"k": k, "l": l, "j": j, "pair_energy": float(rep.energies[a, b]), "related": bool(rep.related[a, b])}
        for a, k in enumerate(rep.types) for b, l in enumerate(rep.types)
    ]
    payload = {
        "axis": j,
        "types": list(rep.types),
        "cell_energies": rep.cell_energies.tolist(),
        "pair_energies": rep.energies.tolist(),
        "related": rep.related.tolist(),
        "classes": [list(c) for c in rep.classes],
        "violations": [list(v) for v in rep.violations],
        "gap": None if not np.isfinite(rep.gap) else rep.gap,
        "site_params": [s.params for s in cat.sites],
    }
    checks = {"transitivity": _check(len(rep.violations),
                                     len(rep.violations) <= cfg.thresholds["max_transitivity_violations"],
                                     cfg.thresholds["max_transitivity_violations"])}
    return payload, {"equiv": rows}, checks


def _sequences(dist: SiteDistribution, L: int, count: int, seed: int) -> list:
    rng = np.random.default_rng(np.random.SeedSequence([seed, L]))
    return [tuple(int(k) for k in rng.choice(len(dist), size=L, p=dist.p)) for _ in range(count)]


def _run_strip(cfg):
    num = cfg.numerics
    cat = build_catalogue(cfg)
    dist = SiteDistribution(tuple(cfg.model["probabilities"]))
    seqs = {int(L): _sequences(dist, int(L), int(num["sequences"]), cfg.seed) for L in num["lengths"]}
    scan = strip_scan(cat, seqs, int(num["buffer_depth"]), float(num["buffer_potential"]),
                      bool(num["marked_end"]), float(num["tol_eig"]))
    payload = {
        "rows": scan.rows(),
        "per_sequence": [a.tolist() for a in scan.lam_all],
        "slope": None if scan.fit is None else scan.fit.slope,
        "slope_se": None if scan.fit is None else scan.fit.stderr,
        "c_hat": scan.c_hat,
        "spread": scan.spread,
        "partial": scan.partial,
    }
    th = cfg.thresholds
    slope = payload["slope"]
    checks = {
        "slope": _check(slope, slope is not None and th["slope_min"] <= slope <= th["slope_max"],
                        [th["slope_min"], th["slope_max"]]),
        "spread": _check(scan.spread, scan.spread < th["max_spread"], th["max_spread"]),
        "c_hat_positive": _check(scan.c_hat, scan.c_hat > 0, 0.0),
    }
    if scan.partial:
        raise EigensolverError(f"strip scan aborted: {scan.failures}", payload)
    return payload, {"strip-scan": scan.rows()}, checks


def _run_dtn(cfg):
    num = cfg.numerics
    d = int(cfg.model["dimension"])
    rows = []
    for lam in num["lambdas"]:
        t = dtn_map(float(num["W0"]), int(num["depth"]), float(lam), int(num["n"]), d)
        rows.append({"lambda": float(lam), "eps_hat": t.eps_hat, "alpha_hat": t.alpha_hat,
                     "symmetry_residual": t.symmetry_residual})
    eps = np.array([r["eps_hat"] for r in rows])
    lam = np.array([r["lambda"] for r in rows])
    order = np.argsort(lam)
    mono = bool(np.all(np.diff(eps[order]) <= 1e-12))
    worst = max(r["symmetry_residual"] for r in rows)
    checks = {
        "symmetry": _check(worst, worst < cfg.thresholds["max_symmetry_residual"],
                           cfg.thresholds["max_symmetry_residual"]),
        "monotone": _check(mono, mono, True),
    }
    return {"rows": rows}, {"dtn": rows}, checks


def _run_ids(cfg, force_fit: bool = False):
    num = cfg.numerics
    cat = build_catalogue(cfg)
    model = AlloyModel(cat, SiteDistribution(tuple(cfg.model["probabilities"])))
    E = _energies(num["energies"])
    est = estimate_ids(model, int(num["L"]), E, int(num["trials"]), cfg.seed, cfg.threads,
                       max_failure_rate=float(num["max_failure_rate"]))
    margin = tail_bound_margin(est)
    payload = {
        "model": est.model, "L": est.L, "energies": est.energies.tolist(), "mean": est.mean.tolist(),
        "se": est.se.tolist(), "trials": est.trials, "failures": est.failures,
        "max_count": est.max_count.tolist(), "p_low": est.p_low.tolist(),
        "tail_margin": margin.tolist(),
    }
    tables = {"ids": est.rows()}
    checks = {"tail_bound": _check(float(margin.min()), margin.min() >= cfg.thresholds.get("tail_margin", 0.0),
                            cfg.thresholds.get("tail_margin", 0.0))}
    if num.get("window"):
        fit = fit_exponent(est, num["fit_kind"], num["window"])
        payload["fit"] = {
            "kind": fit.kind, "window": list(fit.window), "slope": fit.slope, "stderr": fit.stderr,
            "points": len(fit.energies), "censored": fit.censored.tolist(),
            "stronger_min": None if fit.stronger is None else float(fit.stronger.min()),
        }
        tables["fit"] = fit.rows()
        if "slope_min" in cfg.thresholds:
            th = cfg.thresholds
            checks["slope"] = _check(fit.slope, th["slope_min"] <= fit.slope <= th["slope_max"],
                                     [th["slope_min"], th["slope_max"]])
        if fit.stronger is not None:
            smin = float(fit.stronger.min()) if fit.stronger.size else float("nan")
            checks["stronger"] = _check(smin, smin > 0, 0.0)
        zero = cat.zero_sites()
        if fit.kind == "van-hove" and len(zero) == len(cat):
            K, _ = khat(cat, list(range(len(cat))))
            env = van_hove_envelope(est, K, num["window"])
            payload["envelope"] = {"K": K, "ratios": env.ratios.tolist(), "holds": env.holds}
            checks["envelope"] = _check(env.holds, env.holds, [env.lower, env.upper])
    elif force_fit:
        raise ConfigError("numerics.window is required for a fit")
    return payload, tables, checks


def _run_coupling(cfg):
    num = cfg.numerics
    V, a, b = _coupling_site(cfg)
    curve = coupling_curve(V, np.linspace(a, b, int(num["points"])), int(num["box_L"]))
    tol = cfg.thresholds["tol_num"]
    payload = {
        "a": a, "b": b, "grid": curve.grid.tolist(), "E_minus": curve.energies.tolist(),
        "deficits": curve.deficits.tolist(), "E_a": curve.e_a, "E_b": curve.e_b,
        "box_a": curve.box_a, "box_b": curve.box_b, "curve_min": curve.curve_min,
    }
    prop1 = abs(min(curve.box_a, curve.box_b) - curve.e_minus)
    checks = {
        "concave": _check(float(curve.deficits.min()), curve.deficits.min() >= -tol, -tol),
        "prop1": _check(prop1, prop1 <= 1e-8, 1e-8),
        "minimum_at_ends": _check(curve.curve_min, curve.curve_min >= curve.e_minus - tol, curve.e_minus),
    }
    return payload, {"curve": curve.rows()}, checks


def _run_concavity(cfg):
    num = cfg.numerics
    V, a, b = _coupling_site(cfg)
    rep = finite_volume_concavity(V, int(num["L"]), a, b, int(num["samples"]), cfg.seed, float(num["step"]))
    th = cfg.thresholds
    payload = {
        "a": a, "b": b, "deficits": rep.deficits.tolist(), "worst": rep.worst, "point": rep.point.tolist(),
        "hessian_fd_eigs": rep.fd_eigs.tolist(), "hessian_pt_eigs": rep.pt_eigs.tolist(),
        "hessian_gap": float(np.abs(rep.hessian_fd - rep.hessian_pt).max()),
    }
    rows = [{"sample": i, "deficit": float(x)} for i, x in enumerate(rep.deficits)]
    checks = {
        "deficits": _check(rep.worst, rep.worst >= -th["tol_num"], -th["tol_num"]),
        "hessian": _check(float(rep.fd_eigs.max()), rep.fd_eigs.max() <= th["hessian_tol"], th["hessian_tol"]),
    }
    return payload, {"concavity": rows}, checks


def _run_property_p(cfg):
    num = cfg.numerics
    V, a, b = _coupling_site(cfg)
    eps = float(cfg.model["coupling"].get("eps", 0.1 * (b - a)))
    cfg.model["coupling"]["eps"] = eps
    rows = []
    for L in num["lengths"]:
        r = property_P_verify(V, a, b, eps, int(L), int(num["trials"]), cfg.seed, float(num["endpoint_mass"]))
        rows.append({"L": int(L), "c_hat": r.c_hat, "violations": r.violations, "samples": int(num["trials"]),
                     "rejected": r.rejected})
    c = np.array([r["c_hat"] for r in rows])
    spread = float(c.max() / c.min()) if c.min() > 0 else float("inf")
    payload = {"a": a, "b": b, "eps": eps, "rows": rows, "spread": spread}
    checks = {
        "c_hat_positive": _check(float(c.min()), c.min() > 0, 0.0),
        "spread": _check(spread, spread < cfg.thresholds["max_spread"], cfg.thresholds["max_spread"]),
    }
    return payload, {"property-p": rows}, checks


def _run_displacement(cfg):
    num = cfg.numerics
    d, n, k = int(cfg.model["dimension"]), int(num["n"]), int(num["delta_nodes"])
    model = DisplacementModel(displacement_bump(d, n, k, float(num["depth"])), n, k)
    sw = displacement_sweep(model, float(num["tol"]))
    argmin = {tuple(a) for a in sw.argmin}
    rows = [dict({f"beta_{i}": int(b[i]) for i in range(d)}, energy=float(e), argmin=tuple(b) in argmin)
            for b, e in zip(sw.betas.tolist(), sw.energies)]
    payload = {
        "delta": model.delta, "argmin": [list(a) for a in sw.argmin], "corners": [list(c) for c in sw.corners],
        "matches_corners": sw.matches_corners, "energies": sw.energies.tolist(),
        "c3_nonconstancy": nonconstancy_outside_support(model.q, n),
    }
    checks = {"corners": _check(sw.matches_corners, sw.matches_corners, True)}
    return payload, {"displacement": rows}, checks


_RUNNERS = {
    "equiv": _run_equiv,
    "strip-scan": _run_strip,
    "dtn": _run_dtn,
    "ids": _run_ids,
    "fit": lambda cfg: _run_ids(cfg, force_fit=True),
    "coupling": _run_coupling,
    "concavity": _run_concavity,
    "property-p": _run_property_p,
    "displacement": _run_displacement,
}


# --------------------------------------------------------------------------
# records

def _jsonable(obj):
    return json.loads(json.dumps(obj, default=_default, allow_nan=True))


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


@dataclass
class ResultRecord:
    config: dict
    version: str
    wall_clock: float
    solver: dict
    payload: dict
    tables: dict
    checks: dict
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls(**json.loads(text))


def run(cfg: ExperimentConfig) -> ResultRecord:
    """Execute the pipeline for ``cfg.kind`` and return the record."""
    t0 = time.perf_counter()
    payload, tables, checks = _RUNNERS[cfg.kind](cfg)
    wall = time.perf_counter() - t0
    return ResultRecord(
        config=_jsonable(cfg.echo()),
        version=__version__,
        wall_clock=wall,
        solver={"threads": cfg.threads},
        payload=_jsonable(payload),
        tables=_jsonable(tables),
        checks=_jsonable(checks),
    )


def _write_csv(path: Path, rows: list) -> None:
    if not rows:
        path.write_text("")
        return
    cols = list(rows[0].keys())
    for r in rows[1:]:
        for c in r:
            if c not in cols:
                cols.append(c)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: r.get(c, "") for c in cols})


def export(record: ResultRecord, out_dir, fmt: str = "all") -> list:
    """Write ``result.json`` and/or one CSV per table; returns the paths."""
    if fmt not in ("all", "json", "csv"):
        raise ValueError(f"unsupported format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt in ("all", "json"):
        p = out / "result.json"
        p.write_text(record.to_json())
        paths.append(p)
    if fmt in ("all", "csv"):
        for name, rows in record.tables.items():
            p = out / f"{name}.csv"
            _write_csv(p, rows)
            paths.append(p)
    return paths


def import_record(path) -> ResultRecord:
    return ResultRecord.from_json(Path(path).read_text())


# --------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lifshitz-lab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="YAML or JSON experiment config")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="seed (overrides config)")
        p.add_argument("--threads", type=int, help="worker threads (default: all cores)")
        p.add_argument("--assert", dest="assert_", action="store_true",
                       help="exit with status 4 when a threshold check fails")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.kind, args.seed, args.threads, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        record = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EigensolverError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = export(record, cfg.output)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    for name, c in record.checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}: {c['value']} (threshold {c['threshold']})")
    print(f"wrote {', '.join(str(p) for p in paths)}")
    if args.assert_ and not record.passed:
        return EXIT_THRESHOLD
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
