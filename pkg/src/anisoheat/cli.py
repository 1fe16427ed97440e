"""
Command-line front end.

    anisoheat run --config configs/fig2.ini [--set quadrature.rel_tol=1e-6] [--out DIR] [--jobs N]
    anisoheat validate --config configs/transfer.ini

``run`` writes one CSV per table (named ``<task>_<material>_<regime>.csv``)
and ``manifest.json``. The manifest holds the resolved configuration, so
``anisoheat run --config DIR/manifest.json`` repeats the run. The config
file format is described in :mod:`anisoheat.config`.

Exit codes: 0 success (validity warnings included), 2 configuration error,
3 quadrature did not converge.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .analysis import (
    TOL_FLAG,
    SweepResult,
    SweepRow,
    beta_sweep,
    detuned_switch,
    macroscopic_emission_ratio,
    metallic_scaling_probe,
    micro_emission_ratio,
    parallel_pair,
    prolate_oblate_switch,
    quality_sweep,
    sphere_normalized_transfer,
)
from .config import ConfigError, RunConfig, aspect_grid, load_config
from .constants import thermal_wavelength
from .geometry import Spheroid
from .spectral import ConvergenceError
from .transfer import CHANNELS, Pair, particle_checks, transfer_general, emission, validity_checks

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 2, 3
MAX_PRINTED_WARNINGS = 5


class Outcome:
    def __init__(self):
        self.tables: Dict[str, SweepResult] = {}
        self.results: Dict[str, object] = {}
        self.diagnostics: Dict[str, object] = {}
        self.lines: List[str] = []


def _tag(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "-" for c in name)


def _pair(cfg: RunConfig) -> Pair:
    d = cfg.scene["d"]
    if d is None:
        raise ConfigError(f"[scene] d is required for task {cfg.task!r}")
    o1, o2 = cfg.objects.get("object1", {}), cfg.objects.get("object2", {})
    return Pair(cfg.spheroid("object1"), cfg.spheroid("object2"), d,
                theta1=o1["theta"], theta2=o2["theta"], beta=o2["phi"] - o1["phi"],
                T1=cfg.scene["T1"], T2=cfg.scene["T2"])


def _sweep_error(t: SweepResult) -> float:
    return max((r.error for r in t.rows), default=0.0)


def _task_transfer(cfg, jobs, out):
    p = _pair(cfg)
    res = transfer_general(p, cfg.quadrature)
    out.results["transfer"] = {"H": res.value, "error": res.error, "n_evals": res.n_evals,
                               "channels": {str(k): v for k, v in res.channels.items()}}
    out.lines.append(f"H = {res.value!r} W  error {res.error!r} W")
    out.diagnostics["n_evals"] = res.n_evals


def _task_channels(cfg, jobs, out):
    p = _pair(cfg)
    res = transfer_general(p, cfg.quadrature)
    share = sum(abs(v) for v in res.channels.values()) or 1.0
    rows = [SweepRow(float(k), {"H": res.channels[k], "fraction": abs(res.channels[k]) / share},
                     res.error * abs(res.channels[k]) / share) for k in CHANNELS]
    name = f"channels_{_tag(p.s1.material.name)}_exact"
    out.tables[name] = SweepResult("power", "d^-k", ("H", "fraction"), rows, {"d": p.d})
    out.lines.append(f"H = {res.value!r} W  error {res.error!r} W  "
                     + "  ".join(f"d^-{k}: {res.channels[k]!r}" for k in CHANNELS))
    out.diagnostics["n_evals"] = res.n_evals


def _task_emission(cfg, jobs, out):
    s = cfg.spheroid("object1")
    res = emission(s, cfg.scene["T1"], cfg.quadrature)
    out.results["emission"] = {"P": res.value, "error": res.error, "n_evals": res.n_evals}
    out.lines.append(f"P = {res.value!r} W  error {res.error!r} W")
    out.diagnostics["n_evals"] = res.n_evals


def _volume(tp) -> float:
    return 4.0 / 3.0 * math.pi * tp["volume_radius"] ** 3


def _task_fig1(cfg, jobs, out):
    tp = cfg.task_params
    mat = cfg.material(tp["material"])
    aspects = aspect_grid(tp["aspect_min"], tp["aspect_max"], tp["aspect_points"])
    kw = dict(volume=_volume(tp), material=mat, T1=cfg.scene["T1"], T2=cfg.scene["T2"],
              spec=cfg.quadrature, jobs=jobs)
    for regime in ("near", "far"):
        t = sphere_normalized_transfer(aspects, regime=regime, **kw)
        out.tables[f"fig1_{_tag(mat.name)}_{regime}"] = t
        out.diagnostics[f"max_ratio_{regime}"] = float(np.max(t.column("ratio")))
    micro = micro_emission_ratio(aspects, _volume(tp), mat, cfg.scene["T1"], cfg.quadrature, jobs)
    macro = macroscopic_emission_ratio(aspects, _volume(tp))
    rows = [SweepRow(a.value, {"micro": a.quantities["micro"], "macro": b.quantities["macro"]}, a.error)
            for a, b in zip(micro.rows, macro.rows)]
    out.tables[f"fig1_{_tag(mat.name)}_inset"] = SweepResult("aspect", "R_perp/R_par", ("micro", "macro"), rows,
                                                           {"material": mat.name, "T": cfg.scene["T1"]})


def _task_fig2(cfg, jobs, out):
    tp = cfg.task_params
    mat = cfg.material(tp["material"])
    aspects = aspect_grid(tp["aspect_min"], tp["aspect_max"], tp["aspect_points"])
    T1, T2 = cfg.scene["T1"], cfg.scene["T2"]
    t = quality_sweep(aspects, _volume(tp), mat, ("near", "far"), T1, T2, cfg.quadrature, jobs=jobs)
    out.tables[f"fig2_{_tag(mat.name)}_quality"] = t
    s = Spheroid.from_aspect(tp["profile_aspect"], _volume(tp), mat)
    for regime in ("near", "far"):
        prof = beta_sweep(parallel_pair(s, s, thermal_wavelength(max(T1, T2)), T1, T2), regime,
                          cfg.quadrature, tp["beta_points"])
        out.tables[f"fig2_{_tag(mat.name)}_{regime}_profile"] = prof
        out.diagnostics[f"Q_{regime}_at_{tp['profile_aspect']}"] = prof.metadata["Q"]


def _beta_task(name, t, out, mat):
    regime = t.metadata["regime"]
    out.tables[f"{name}_{_tag(mat.name)}_{regime}"] = t
    out.diagnostics.update({k: t.metadata[k] for k in ("Q", "beta_max", "beta_min")})
    out.lines.append(f"Q_{regime} = {t.metadata['Q']!r}  beta_max = {t.metadata['beta_max']!r}")


def _task_fig3(cfg, jobs, out):
    tp = cfg.task_params
    mat = cfg.material(tp["material"])
    t = detuned_switch((tp["aspect1"], tp["aspect2"]), (tp["detuning1"], tp["detuning2"]), mat, tp["regime"],
                       _volume(tp), cfg.scene["T1"], cfg.scene["T2"], cfg.scene["d"], cfg.quadrature,
                       tp["beta_points"])
    _beta_task("fig3", t, out, mat)
    out.diagnostics["par_resonances"] = t.metadata["par_resonances"]
    out.diagnostics["perp_resonances"] = t.metadata["perp_resonances"]


def _task_fig4(cfg, jobs, out):
    tp = cfg.task_params
    mat = cfg.material(tp["material"])
    t = prolate_oblate_switch(tp["prolate_aspect"], tp["oblate_ratio"], mat, tp["regime"], _volume(tp),
                              cfg.scene["T1"], cfg.scene["T2"], cfg.scene["d"], cfg.quadrature, tp["beta_points"])
    _beta_task("fig4", t, out, mat)


def _task_scaling(cfg, jobs, out):
    tp = cfg.task_params
    mat = cfg.material(tp["material"])
    s_vals = np.geomspace(tp["s_min"], tp["s_max"], tp["s_points"])
    rep = metallic_scaling_probe(mat, s_vals, tp["regime"], _volume(tp), cfg.scene["T1"], cfg.quadrature, jobs)
    out.tables[f"scaling_{_tag(mat.name)}_{tp['regime']}"] = rep.sweep
    out.diagnostics.update({
        "exponent": rep.exponent, "r_squared": rep.r_squared, "window": rep.window,
        "window_points": rep.window_points, "saturated": rep.saturated,
        "saturation_slenderness": rep.saturation_slenderness, "alpha_exponent": rep.alpha_exponent,
        "message": rep.message,
    })
    if rep.ok:
        out.lines.append(f"exponent = {rep.exponent:.4f} (R^2 {rep.r_squared:.6f}) window {rep.window}"
                         f" saturated={rep.saturated}")
    else:
        out.lines.append(rep.message)


TASK_RUNNERS = {
    "transfer": _task_transfer,
    "channels": _task_channels,
    "emission": _task_emission,
    "fig1": _task_fig1,
    "fig2": _task_fig2,
    "fig3": _task_fig3,
    "fig4": _task_fig4,
    "scaling": _task_scaling,
}


def execute(cfg: RunConfig, jobs: int = 1) -> Outcome:
    """Run the configured task without touching the filesystem."""
    out = Outcome()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        TASK_RUNNERS[cfg.task](cfg, jobs, out)
    msgs = {str(w.message) for w in caught}
    for t in out.tables.values():
        for r in t.rows:
            msgs.update(f for f in r.flags if f not in ("window", TOL_FLAG))
    out.diagnostics["warnings"] = sorted(msgs)
    for name, t in out.tables.items():
        out.diagnostics[f"{name}.max_error"] = _sweep_error(t)
    return out


def _quad_dict(cfg: RunConfig) -> dict:
    q = cfg.quadrature
    return {"rel_tol": q.rel_tol, "abs_floor": q.abs_floor, "omega_max_factor": q.omega_max_factor,
            "panel_budget": q.panel_budget, "initial_panels": q.initial_panels,
            "seeded": q.seed_points is None}


def write_outputs(cfg: RunConfig, out: Outcome, out_dir: Path, jobs: int) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for name, t in out.tables.items():
        path = out_dir / f"{name}.csv"
        t.to_csv(path)
        files.append(path.name)
    for name, payload in out.results.items():
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        files.append(path.name)
    manifest = {
        "version": __version__,
        "task": cfg.task,
        "source": cfg.source,
        "overrides": cfg.overrides,
        "config": cfg.raw,
        "quadrature": _quad_dict(cfg),
        "jobs": jobs,
        "outputs": files,
        "warnings": out.diagnostics.get("warnings", []),
        "diagnostics": {k: v for k, v in out.diagnostics.items() if k != "warnings"},
        "metadata": {name: t.to_dict()["metadata"] for name, t in out.tables.items()},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _validation_checks(cfg: RunConfig):
    T = max(cfg.scene["T1"], cfg.scene["T2"])
    if cfg.task in ("transfer", "channels"):
        return validity_checks(_pair(cfg))
    if cfg.task == "emission":
        return particle_checks(cfg.spheroid("object1"), T, "object1")
    tp = cfg.task_params
    mat = cfg.material(tp["material"])
    vol = _volume(tp)
    if cfg.task == "scaling":
        shapes = [1.0 / tp["s_max"]]
    elif cfg.task == "fig3":
        shapes = [tp["aspect1"], tp["aspect2"]]
    elif cfg.task == "fig4":
        shapes = [tp["prolate_aspect"], 1.0 / tp["oblate_ratio"]]
    else:
        shapes = [tp["aspect_min"]]
    checks = []
    for i, a in enumerate(shapes, 1):
        checks += particle_checks(Spheroid.from_aspect(a, vol, mat), T, f"shape{i}(aspect={a:g})")
    return checks


def cmd_validate(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    for c in _validation_checks(cfg):
        status = "ok  " if c.ok else "WARN"
        print(f"{status} {c.name} = {c.value:.4g} (limit {c.threshold:g})" + ("" if c.ok else f"  {c.message}"),
              file=stream)
    return EXIT_OK


def run(config_path, overrides: Sequence[str] = (), out_dir=None, jobs: int = 1, stream=None) -> int:
    """Load, execute and write a run. Returns the process exit code."""
    stream = stream or sys.stdout
    try:
        cfg = load_config(config_path, overrides)
        out = execute(cfg, jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    target = Path(out_dir) if out_dir is not None else Path("out") / cfg.task
    write_outputs(cfg, out, target, jobs)
    for line in out.lines:
        print(line, file=stream)
    msgs = out.diagnostics.get("warnings", [])
    for w in msgs[:MAX_PRINTED_WARNINGS]:
        print(f"warning: {w}", file=sys.stderr)
    if len(msgs) > MAX_PRINTED_WARNINGS:
        print(f"warning: {len(msgs) - MAX_PRINTED_WARNINGS} more validity warnings in {target / 'manifest.json'}",
              file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anisoheat", description="Radiative heat transfer between spheroidal nanoparticles.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "execute a configured task"), ("validate", "print dipole-validity diagnostics")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, metavar="PATH", help="INI config or a run manifest.json")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides",
                       help="override, e.g. quadrature.rel_tol=1e-6 (repeatable)")
        p.add_argument("--rel-tol", type=float, metavar="X", help="shorthand for --set quadrature.rel_tol=X")
        if name == "run":
            p.add_argument("--out", metavar="DIR", help="output directory (default out/<task>)")
            p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes for sweeps")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.rel_tol is not None:
        overrides.append(f"quadrature.rel_tol={args.rel_tol!r}")
    if args.command == "validate":
        try:
            return cmd_validate(load_config(args.config, overrides))
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.config, overrides, args.out, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
