"""
Command-line driver: build, diagonalize and characterize disorder ensembles.

Layout of an output directory::

    <out>/realizations/r00000/meta.json       config hash, seed, eigen-residual
    <out>/realizations/r00000/spectrum.csv    one row per eigenvalue, scars flagged
    <out>/realizations/r00000/scars.json      detection report and analytic checks
    <out>/realizations/r00000/size.csv        size and split-size moments
    <out>/realizations/r00000/entanglement-<partition>.csv
    <out>/stats/...                           ensemble histograms and fits
    <out>/summary.json, <out>/manifest.json

Realization directories are reused when their ``meta.json`` carries the same
physics hash, so ensembles can be grown or re-analyzed without recomputation.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from . import __version__
from .algebra import Geometry
from .entanglement import Partition, page_value, schmidt_entropies
from .liouville import Liouvillian, Scheme, majorana_jumps, spin_jumps, vectorize_majorana, vectorize_spin
from .models import (
    SykParams,
    XxzParams,
    build_complex_syk,
    build_majorana_syk,
    build_xxz,
    sample_couplings,
)
from .observables import build_size, moment_table
from .scars import (
    analytic_majorana_scars,
    analytic_spin_scars,
    analytic_u1_scars,
    detect_numerical_scars,
    match_subspaces,
    resolve_clusters,
)
from .spectral import EigenSolverError, eig, eig_chiral, split_residuals
from .stats import (
    BinSpec,
    FitError,
    fit_smooth,
    fraction_vanishing,
    histogram_powerlaw,
    imaginary_fraction,
    normalize_split_size,
    window_mask,
)

log = logging.getLogger("lindblad_scars")

MODELS = ("majorana-syk", "complex-syk", "xxz")
STAGES = ("spectrum", "scars", "size", "entanglement")
MAX_DIM = 4096
TOLERANCES = {
    "eig": 1e-8,  # eigen-residual relative to |L|
    "cluster": None,  # absolute cluster radius, default 1e-7 |L|
    "sv": None,  # zero singular value threshold, default 1e-8 max(s_max, |H_I|)
    "vanish": 1e-8,  # |split| below this counts as zero
    "imag": 1e-8,  # |Re| below this counts as purely imaginary
}
PHYSICS_FIELDS = ("model", "N", "q", "J", "delta", "h", "mu", "scheme", "seed", "solver", "tolerances")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"field '{field_name}': {message}")
        self.field = field_name


@dataclass(frozen=True)
class RunConfig:
    model: str = "majorana-syk"
    N: int = 12
    q: int = 4
    J: float = 1.0
    delta: float = 1.1
    h: float = 0.5
    mu: float = 0.1
    scheme: str = "pseudo"
    realizations: int = 1
    start: int = 0
    seed: int = 0
    outputs: tuple[str, ...] = STAGES
    tolerances: dict[str, float | None] = field(default_factory=lambda: dict(TOLERANCES))
    output_dir: str = "runs"
    workers: int = 1
    solver: str = "auto"
    partition: str = "both"
    min_count: int = 1000

    def validate(self) -> "RunConfig":
        if self.model not in MODELS:
            raise ConfigError("model", f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.realizations < 1:
            raise ConfigError("realizations", "must be at least 1")
        if self.start < 0:
            raise ConfigError("start", "must be non-negative")
        if self.mu < 0:
            raise ConfigError("mu", "dissipation strength must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers", "must be at least 1")
        if self.model == "xxz":
            if self.N < 2:
                raise ConfigError("N", "XXZ chain needs at least two sites")
            if self.h < 0:
                raise ConfigError("h", "field half-width must be non-negative")
            if self.scheme not in ("spin", "pseudo"):
                raise ConfigError("scheme", "the XXZ chain only has the spin vectorization")
            dim = 4**self.N
        else:
            if self.N % 2 or self.N < 2:
                raise ConfigError("N", "Majorana count must be even and positive")
            if self.q % 2 or not 2 <= self.q <= self.N:
                raise ConfigError("q", "interaction order must be even with 2 <= q <= N")
            if self.scheme not in ("pseudo", "standard"):
                raise ConfigError("scheme", "fermionic models use 'pseudo' or 'standard'")
            dim = 2**self.N
        if dim > MAX_DIM:
            raise ConfigError("N", f"Liouvillian dimension {dim} exceeds the dense limit {MAX_DIM}")
        for stage in self.outputs:
            if stage not in STAGES:
                raise ConfigError("outputs", f"unknown stage {stage!r}")
        for name in self.tolerances:
            if name not in TOLERANCES:
                raise ConfigError(f"tolerances.{name}", "unknown tolerance")
        if self.solver not in ("auto", "plain", "chiral"):
            raise ConfigError("solver", "choose auto, plain or chiral")
        if self.solver == "chiral" and self.model != "xxz":
            raise ConfigError("solver", "the chiral solver applies to the XXZ chain only")
        if self.partition not in ("both", "intersite", "intrasite"):
            raise ConfigError("partition", "choose both, intersite or intrasite")
        return self

    @property
    def effective_scheme(self) -> str:
        return "spin" if self.model == "xxz" else self.scheme

    def tol(self, name: str):
        return self.tolerances.get(name, TOLERANCES[name])

    def physics_hash(self) -> str:
        d = dataclasses.asdict(self)
        d["scheme"] = self.effective_scheme
        d["tolerances"] = {k: self.tol(k) for k in sorted(TOLERANCES)}
        payload = {k: d[k] for k in PHYSICS_FIELDS}
        if self.model != "xxz":
            for k in ("J", "delta", "h"):
                payload.pop(k)
        else:
            payload.pop("q")
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_json(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["outputs"] = list(self.outputs)
        return d


def load_config(path: str | Path | None, overrides: dict[str, Any]) -> RunConfig:
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
    known = {f.name: f for f in dataclasses.fields(RunConfig)}
    for k in data:
        if k not in known:
            raise ConfigError(k, "unknown field")
    tol = dict(TOLERANCES)
    tol.update(data.pop("tolerances", {}) or {})
    tol.update(overrides.pop("tolerances", {}))
    data.update({k: v for k, v in overrides.items() if v is not None})
    data["tolerances"] = tol
    if "outputs" in data:
        data["outputs"] = tuple(data["outputs"])
    casts = {"N": int, "q": int, "realizations": int, "start": int, "seed": int, "workers": int, "min_count": int,
             "J": float, "delta": float, "h": float, "mu": float}
    for k, cast in casts.items():
        if k in data:
            try:
                data[k] = cast(data[k])
            except (TypeError, ValueError) as exc:
                raise ConfigError(k, f"expected {cast.__name__}, got {data[k]!r}") from exc
    return RunConfig(**data).validate()


# ---------------------------------------------------------------------------
# one realization
# ---------------------------------------------------------------------------


@dataclass
class Realization:
    L: Liouvillian
    H: np.ndarray
    analytic: list


def build_realization(cfg: RunConfig, r: int) -> Realization:
    if cfg.model == "xxz":
        geom = Geometry.spin(cfg.N)
        H = build_xxz(XxzParams(cfg.N, cfg.J, cfg.delta, cfg.h, cfg.seed, r), geom)
        L = vectorize_spin(H, spin_jumps(geom, cfg.mu), geom)
        return Realization(L, H, analytic_spin_scars(L))
    geom = Geometry.majorana(cfg.N)
    K = sample_couplings(SykParams(cfg.N, cfg.q, cfg.seed, r))
    H = build_majorana_syk(K, geom)
    if cfg.model == "complex-syk":
        H = build_complex_syk(H, geom)
    L = vectorize_majorana(H, majorana_jumps(geom, cfg.mu), cfg.scheme, geom, model=cfg.model, q=cfg.q)
    analytic = analytic_majorana_scars(L, H)
    if cfg.model == "complex-syk":
        analytic = analytic_u1_scars(L) + analytic[2:]
    return Realization(L, H, analytic)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def write_csv(path: Path, columns: dict[str, Iterable], header_comment: str | None = None) -> None:
    names = list(columns)
    cols = [list(columns[n]) for n in names]
    lines = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append(",".join(names))
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        first = fh.readline()
        skip = 1
        if first.startswith("#"):
            first = fh.readline()
            skip = 2
    names = first.strip().split(",")
    string_cols = [i for i, n in enumerate(names) if n in ("scar_label",)]
    usecols = [i for i in range(len(names)) if i not in string_cols]
    data = np.loadtxt(path, delimiter=",", skiprows=skip, usecols=usecols, ndmin=2)
    out = {names[i]: data[:, j] for j, i in enumerate(usecols)}
    if "is_scar" in out:
        out["is_scar"] = out["is_scar"].astype(bool)
    return out


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def realization_dir(out: Path, r: int) -> Path:
    return out / "realizations" / f"r{r:05d}"


def stage_files(cfg: RunConfig, stage: str) -> list[str]:
    if stage == "entanglement":
        parts = ("intersite", "intrasite") if cfg.partition == "both" else (cfg.partition,)
        return [f"entanglement-{p}.csv" for p in parts]
    return [{"spectrum": "spectrum.csv", "scars": "scars.json", "size": "size.csv"}[stage]]


def cached(cfg: RunConfig, out: Path, r: int, stages: Iterable[str]) -> bool:
    d = realization_dir(out, r)
    meta = d / "meta.json"
    if not meta.exists():
        return False
    try:
        m = json.loads(meta.read_text())
    except json.JSONDecodeError:
        return False
    if m.get("config_hash") != cfg.physics_hash():
        return False
    return all((d / f).exists() for s in stages for f in stage_files(cfg, s))


def compute_realization(cfg: RunConfig, r: int, out: Path, stages: Iterable[str]) -> dict[str, Any]:
    stages = tuple(stages)
    d = realization_dir(out, r)
    d.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    real = build_realization(cfg, r)
    L = real.L
    use_chiral = cfg.model == "xxz" and cfg.solver in ("auto", "chiral")
    es = eig_chiral(L, cfg.tol("eig")) if use_chiral else eig(L, cfg.tol("eig"))
    report = detect_numerical_scars(es, L, cfg.tol("cluster"), cfg.tol("sv"))
    es, is_scar, labels = resolve_clusters(es, report, real.analytic)
    meta = {
        "config_hash": cfg.physics_hash(),
        "realization": r,
        "seed": cfg.seed,
        "model": cfg.model,
        "eig_residual": es.residual,
        "norm": L.norm(),
        "version": __version__,
    }

    if "spectrum" in stages:
        write_csv(
            d / "spectrum.csv",
            {
                "index": range(len(es)),
                "re_lambda": es.values.real,
                "im_lambda": es.values.imag,
                "is_scar": is_scar,
                "scar_label": labels,
            },
        )
    if "scars" in stages:
        hi_res, h0_res = split_residuals(es, L)
        scar_json = {
            "targets": [
                {
                    "target": rec.target,
                    "cluster_size": rec.cluster_size,
                    "multiplicity": rec.multiplicity,
                    "threshold": rec.threshold,
                    "smallest_singular_values": np.sort(rec.singular_values)[: rec.multiplicity + 3].tolist(),
                    "gram_condition": rec.gram_condition,
                    "ill_conditioned": rec.ill_conditioned,
                    "labels": sorted(labels[j] for j in rec.members if labels[j]),
                }
                for rec in report.records
            ],
            "total": report.total,
            "assignments": _assignments(labels, is_scar),
            "analytic": [
                {
                    "label": s.label,
                    "eigenvalue": s.eigenvalue.real,
                    "residual_h0": s.residual_h0,
                    "residual_hi": s.residual_hi,
                }
                for s in real.analytic
            ],
            "match_residual": match_subspaces(real.analytic, report),
            "split_residual_hi": hi_res,
            "split_residual_h0": h0_res,
            "tol_cluster": report.tol_cluster,
        }
        _dump_json(d / "scars.json", scar_json)
    if "size" in stages:
        t = moment_table(es, build_size(L), is_scar)
        write_csv(d / "size.csv", t)
    if "entanglement" in stages:
        V = es.vectors if L.basis is None else np.asarray(L.basis @ es.vectors)
        D = L.geom.dim
        for fname in stage_files(cfg, "entanglement"):
            part = Partition(fname[len("entanglement-") : -4])
            ent = schmidt_entropies(V, part, L.geom)
            write_csv(
                d / fname,
                {"re_lambda": es.values.real, "im_lambda": es.values.imag, "entropy": ent, "is_scar": is_scar},
                header_comment=f"page_value={page_value(D):.17g} partition={part.value}",
            )
    meta["stages"] = sorted(set(stages) | set(_existing_stages(cfg, d)))
    _dump_json(d / "meta.json", meta)
    log.info("realization %d: %.1f s", r, time.perf_counter() - t0)
    return meta


def _assignments(labels: list[str], is_scar: np.ndarray) -> dict[str, int]:
    """Scar count per analytic family (``other`` for numerically found scars)."""
    out: dict[str, int] = {}
    for lab, flag in zip(labels, is_scar):
        if flag:
            family = lab.split("[")[0]
            out[family] = out.get(family, 0) + 1
    return dict(sorted(out.items()))


def _existing_stages(cfg: RunConfig, d: Path) -> list[str]:
    return [s for s in STAGES if all((d / f).exists() for f in stage_files(cfg, s))]


def _job(cfg_json: dict, r: int, out: str, stages: tuple[str, ...]) -> tuple[int, str | None]:
    cfg = load_config(None, dict(cfg_json))
    try:
        compute_realization(cfg, r, Path(out), stages)
        return r, None
    except (EigenSolverError, np.linalg.LinAlgError, ValueError) as exc:
        return r, f"{type(exc).__name__}: {exc}"


def ensure_realizations(cfg: RunConfig, stages: Iterable[str], compute: bool = True) -> dict[int, str]:
    """Compute (or reuse) every realization; returns per-realization error messages."""
    out = Path(cfg.output_dir)
    stages = tuple(stages)
    todo = [r for r in range(cfg.start, cfg.start + cfg.realizations) if not cached(cfg, out, r, stages)]
    if todo and not compute:
        raise FileNotFoundError(
            f"{len(todo)} realizations lack {', '.join(stages)} artifacts in {out} (first: r{todo[0]:05d})"
        )
    errors: dict[int, str] = {}
    cfg_json = cfg.to_json()
    if cfg.workers == 1 or len(todo) <= 1:
        for r in todo:
            _, err = _job(cfg_json, r, str(out), stages)
            if err:
                errors[r] = err
            log.info("realization %d done%s", r, f" ({err})" if err else "")
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futs = [pool.submit(_job, cfg_json, r, str(out), stages) for r in todo]
            for f in futs:
                r, err = f.result()
                if err:
                    errors[r] = err
                log.info("realization %d done%s", r, f" ({err})" if err else "")
    return errors


# ---------------------------------------------------------------------------
# ensemble statistics
# ---------------------------------------------------------------------------

MAIN_WINDOW = (0.0, 0.0075)
SIDE_WINDOW = (0.057, 0.075)


def split_center(cfg: RunConfig) -> float:
    """Spectral center of the split-size study: ``-mu N`` (spin) or ``-N mu / 2`` (fermions)."""
    return -cfg.mu * cfg.N if cfg.model == "xxz" else -cfg.mu * cfg.N / 2


def load_ensemble(cfg: RunConfig) -> dict[str, np.ndarray]:
    out = Path(cfg.output_dir)
    cols: dict[str, list] = {}
    for r in range(cfg.start, cfg.start + cfg.realizations):
        path = realization_dir(out, r) / "size.csv"
        if not path.exists():
            continue
        t = read_csv(path)
        t["realization"] = np.full(len(t["re_lambda"]), r)
        for k, v in t.items():
            cols.setdefault(k, []).append(v)
    if not cols:
        raise FileNotFoundError(f"no size tables under {out}")
    return {k: np.concatenate(v) for k, v in cols.items()}


def centered_split(cfg: RunConfig, table: dict[str, np.ndarray]) -> np.ndarray:
    """The split quantity that vanishes at the spectral center (odd for the spin chain)."""
    if cfg.model == "xxz":
        return cfg.N / 2 - table["split_mean"]
    return table["split_mean"]


def ensemble_stats(cfg: RunConfig, table: dict[str, np.ndarray]) -> dict[str, Any]:
    y = centered_split(cfg, table)
    re = table["re_lambda"]
    scar = table["is_scar"]
    center = split_center(cfg)
    vanish = cfg.tol("vanish")
    summary: dict[str, Any] = {
        "n_states": int(len(y)),
        "n_realizations": int(len(np.unique(table["realization"]))),
        "center": center,
        "fraction_vanishing": fraction_vanishing(y, vanish),
    }
    if cfg.model == "xxz":
        lam = table["re_lambda"] + 1j * table["im_lambda"]
        summary["imaginary_fraction"] = imaginary_fraction(lam, cfg.mu * cfg.N, cfg.tol("imag"))
    keep = (~scar) & (np.abs(y) >= vanish)
    spec = BinSpec(100, None, cfg.min_count)
    try:
        fit = fit_smooth(re[keep], y[keep], center=center, window=0.2, breaks=(0.02,), spec=spec,
                         odd_mean=cfg.model == "xxz")
    except FitError as exc:
        summary["fit_error"] = str(exc)
        return summary
    summary["fit"] = {
        "window": list(fit.window),
        "pieces": [
            {"lo": p.lo, "hi": p.hi, "mean_coeffs": p.mean_coeffs.tolist(), "sigma_coeffs": p.sigma_coeffs.tolist()}
            for p in fit.pieces
        ],
    }
    windows = {}
    for name, (lo, hi) in (("main", MAIN_WINDOW), ("side", SIDE_WINDOW)):
        sel = keep & window_mask(re, center, lo, hi)
        z = normalize_split_size(re[sel], y[sel], fit)
        entry: dict[str, Any] = {"window": [lo, hi], "n": int(z.size)}
        if z.size:
            entry["mean"] = float(z.mean())
            entry["variance"] = float(z.var())
        try:
            pl, hist = histogram_powerlaw(z)
            entry.update(a=pl.a, b=pl.b, fit_range=list(pl.fit_range), goodness=pl.goodness,
                         tail_points=pl.n_points, kurtosis=pl.kurtosis)
            entry["histogram"] = {"centers": hist.centers, "counts": hist.counts, "density": hist.density}
        except FitError as exc:
            entry["error"] = str(exc)
        windows[name] = entry
    summary["windows"] = windows
    return summary


def write_stats(cfg: RunConfig, summary: dict[str, Any]) -> list[Path]:
    sdir = Path(cfg.output_dir) / "stats"
    sdir.mkdir(parents=True, exist_ok=True)
    written = []
    slim = json.loads(json.dumps(summary, default=_json_default))
    for name, w in slim.get("windows", {}).items():
        hist = w.pop("histogram", None)
        if hist is None:
            continue
        path = sdir / f"histogram-{name}.csv"
        write_csv(path, {"bin_center": hist["centers"], "count": hist["counts"], "density": hist["density"]})
        written.append(path)
    path = sdir / "fit.json"
    _dump_json(path, slim)
    written.append(path)
    return written


# ---------------------------------------------------------------------------
# manifest and entry points
# ---------------------------------------------------------------------------


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    files = []
    for p in sorted(out.rglob("*")):
        if p.is_file() and p != out / "manifest.json":
            files.append({"path": str(p.relative_to(out)), "sha256": sha256(p)})
    manifest = {
        "config_hash": cfg.physics_hash(),
        "seed": cfg.seed,
        "version": __version__,
        "config": cfg.to_json() | {"output_dir": None, "workers": None},
        "files": files,
    }
    path = out / "manifest.json"
    _dump_json(path, manifest)
    return path


def summarize_spectra(cfg: RunConfig) -> dict[str, Any]:
    out = Path(cfg.output_dir)
    per = []
    for r in range(cfg.start, cfg.start + cfg.realizations):
        d = realization_dir(out, r)
        entry: dict[str, Any] = {"realization": r}
        if (d / "spectrum.csv").exists():
            t = read_csv(d / "spectrum.csv")
            lam = t["re_lambda"] + 1j * t["im_lambda"]
            entry["n_eigenvalues"] = int(lam.size)
            entry["max_re"] = float(lam.real.max())
            entry["n_scars"] = int(t["is_scar"].sum())
            if cfg.model == "xxz":
                entry["imaginary_fraction"] = imaginary_fraction(lam, cfg.mu * cfg.N, cfg.tol("imag"))
        if (d / "scars.json").exists():
            s = json.loads((d / "scars.json").read_text())
            entry["scar_multiplicities"] = {f"{t['target'] + 0.0:.6g}": t["multiplicity"] for t in s["targets"]}
            entry["match_residual"] = s["match_residual"]
        per.append(entry)
    return {"realizations": per}


def run(cfg: RunConfig, stages: Iterable[str], *, compute: bool = True, with_stats: bool = False) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stages = tuple(stages)
    errors = ensure_realizations(cfg, stages, compute=compute)
    summary = {"config_hash": cfg.physics_hash(), "model": cfg.model, "errors": {str(k): v for k, v in errors.items()}}
    summary.update(summarize_spectra(cfg))
    if with_stats:
        table = load_ensemble(cfg)
        stats = ensemble_stats(cfg, table)
        write_stats(cfg, stats)
        summary["stats"] = {k: v for k, v in stats.items() if k not in ("windows", "fit")}
    _dump_json(out / "summary.json", summary)
    write_manifest(cfg)
    return 1 if errors and len(errors) == cfg.realizations else 0


PRESETS: dict[str, dict[str, Any]] = {
    "fig1-left": {"model": "majorana-syk", "outputs": ["spectrum", "scars"]},
    "fig1-middle": {"model": "complex-syk", "outputs": ["spectrum", "scars"]},
    "fig1-right": {"model": "xxz", "N": 6, "outputs": ["spectrum", "scars"]},
    "majorana-size": {"model": "majorana-syk", "outputs": ["size"]},
    "complex-size": {"model": "complex-syk", "outputs": ["size"]},
    "majorana-entanglement": {"model": "majorana-syk", "outputs": ["entanglement"]},
    "complex-entanglement": {"model": "complex-syk", "outputs": ["entanglement"]},
    "xxz-size": {"model": "xxz", "N": 6, "outputs": ["size"]},
    "xxz-entanglement": {"model": "xxz", "N": 6, "outputs": ["entanglement"]},
    "complex-split-histogram": {"model": "complex-syk", "realizations": 200, "outputs": ["size"], "stats": True},
    "xxz-split-histogram": {"model": "xxz", "N": 6, "realizations": 1000, "outputs": ["size"], "stats": True},
}
PRESET_DEFAULTS = {"N": 12, "q": 4, "mu": 0.1, "J": 1.0, "delta": 1.1, "h": 0.5, "realizations": 1}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--N", type=int, help="Majorana count (SYK) or number of sites (XXZ)")
    common.add_argument("--q", type=int)
    common.add_argument("--mu", type=float)
    common.add_argument("--J", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--h", type=float, help="half-width of the uniform random fields")
    common.add_argument("--scheme", choices=("pseudo", "standard", "spin"))
    common.add_argument("--realizations", type=int)
    common.add_argument("--start", type=int, help="first realization index")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", dest="output_dir")
    common.add_argument("--workers", type=int)
    common.add_argument("--solver", choices=("auto", "plain", "chiral"))
    common.add_argument("--no-compute", action="store_true", help="fail instead of computing missing realizations")
    common.add_argument("-v", "--verbose", action="store_true")
    for name in TOLERANCES:
        common.add_argument(f"--tol.{name}", dest=f"tol_{name}", type=float)

    p = argparse.ArgumentParser(prog="lindblad-scars", description=__doc__.strip().splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="eigenvalues with scars flagged")
    sub.add_parser("scars", parents=[common], help="scar detection report")
    sz = sub.add_parser("size", parents=[common], help="size and split-size moments")
    sz.add_argument("--split", choices=("even-odd", "x+z"), help="split combination (fixed by the model)")
    en = sub.add_parser("entanglement", parents=[common], help="eigenstate entanglement entropies")
    en.add_argument("--partition", choices=("both", "intersite", "intrasite"))
    st = sub.add_parser("stats", parents=[common], help="ensemble split-size statistics")
    st.add_argument("--min-count", dest="min_count", type=int)
    rp = sub.add_parser("reproduce", parents=[common], help="run a named preset")
    rp.add_argument("figure", choices=sorted(PRESETS))
    return p


def _overrides(ns: argparse.Namespace) -> dict[str, Any]:
    keys = ("model", "N", "q", "mu", "J", "delta", "h", "scheme", "realizations", "start", "seed",
            "output_dir", "workers", "solver", "partition", "min_count")
    ov = {k: getattr(ns, k, None) for k in keys}
    ov["tolerances"] = {
        name: getattr(ns, f"tol_{name}") for name in TOLERANCES if getattr(ns, f"tol_{name}", None) is not None
    }
    return ov


def main(argv: list[str] | None = None) -> int:
    ns = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    ov = _overrides(ns)
    stats = False
    if ns.command == "reproduce":
        preset = dict(PRESET_DEFAULTS) | dict(PRESETS[ns.figure])
        stats = preset.pop("stats", False)
        for k, v in preset.items():
            if ov.get(k) is None:
                ov[k] = v
        if ov.get("output_dir") is None:
            ov["output_dir"] = str(Path("runs") / ns.figure)
        stages = tuple(ov.pop("outputs"))
    elif ns.command == "stats":
        stages = ("size",)
        stats = True
    else:
        stages = (ns.command,)
    ov.pop("outputs", None)
    try:
        cfg = load_config(ns.config, ov)
        if ns.command == "size" and ns.split is not None:
            expected = "x+z" if cfg.model == "xxz" else "even-odd"
            if ns.split != expected:
                raise ConfigError("split", f"model {cfg.model} uses the {expected} split")
        if stats and cfg.realizations < 2:
            raise ConfigError("realizations", "ensemble statistics need at least 2 realizations")
        cfg = dataclasses.replace(cfg, outputs=stages)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        status = run(cfg, stages, compute=not ns.no_compute, with_stats=stats)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if "scars" in stages:
        print_scar_report(cfg)
    return status


def print_scar_report(cfg: RunConfig, stream=None) -> None:
    stream = stream or sys.stdout
    out = Path(cfg.output_dir)
    for r in range(cfg.start, cfg.start + cfg.realizations):
        path = realization_dir(out, r) / "scars.json"
        if not path.exists():
            continue
        s = json.loads(path.read_text())
        counts = " ".join(f"{t['target'] + 0.0:g}:{t['multiplicity']}" for t in s["targets"] if t["multiplicity"])
        fams = " + ".join(f"{v} {k}" for k, v in s.get("assignments", {}).items())
        print(f"r{r:05d} total={s['total']} [{counts}] {fams}", file=stream)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
