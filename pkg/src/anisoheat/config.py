"""
Run configuration: INI-style sectioned key/value files.

Sections
--------
``[task]``            ``name`` plus task-specific keys (see ``TASK_KEYS``)
``[material.NAME]``   ``variant`` (lorentz | drude | constant | tabulated) and its
                      parameters; energies in eV
``[object1]``, ``[object2]``
                      ``material``, ``r_par``, ``r_perp`` (nm), ``theta``, ``phi`` (deg)
``[scene]``           ``d`` (nm), ``T1``, ``T2`` (K)
``[quadrature]``      ``rel_tol``, ``abs_floor``, ``omega_max_factor``, ``panel_budget``,
                      ``initial_panels``, ``seeded``

Quantities may carry an explicit unit (``d = 1 um``, ``T1 = 300 K``,
``omega_lo = 120 meV``, ``theta = 1.5708 rad``); bare numbers use the default
unit of the key. Overrides are ``section.key=value`` strings applied after the
file is parsed.
"""

from __future__ import annotations

import configparser
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import Spheroid
from .materials import (
    VARIANT_PARAMS,
    PermittivityModel,
    get_material,
    material_from_params,
    registered_materials,
)
from .spectral import QuadratureSpec

UNITS = {
    "length": ({"nm": 1e-9, "um": 1e-6, "µm": 1e-6, "m": 1.0}, "nm"),
    "energy": ({"ev": 1.0, "mev": 1e-3}, "ev"),
    "temperature": ({"k": 1.0}, "k"),
    "angle": ({"deg": math.pi / 180.0, "rad": 1.0}, "deg"),
}

TASKS = ("transfer", "emission", "fig1", "fig2", "fig3", "fig4", "scaling", "channels")

OBJECT_KEYS = {
    "material": ("str", "SiC"),
    "r_par": ("length", None),
    "r_perp": ("length", None),
    "theta": ("angle", 90.0),
    "phi": ("angle", 0.0),
}
SCENE_KEYS = {"d": ("length", None), "T1": ("temperature", 300.0), "T2": ("temperature", 0.0)}
QUAD_KEYS = {
    "rel_tol": ("float", 1e-8),
    "abs_floor": ("float", 0.0),
    "omega_max_factor": ("float", 40.0),
    "panel_budget": ("int", 100_000),
    "initial_panels": ("int", 8),
    "seeded": ("bool", True),
}
_COMMON = {"material": ("str", "SiC"), "volume_radius": ("length", 5.0)}
TASK_KEYS = {
    "transfer": {},
    "channels": {},
    "emission": {},
    "fig1": {**_COMMON, "aspect_min": ("float", 0.02), "aspect_max": ("float", 1.0),
             "aspect_points": ("int", 40)},
    "fig2": {**_COMMON, "aspect_min": ("float", 0.05), "aspect_max": ("float", 0.5),
             "aspect_points": ("int", 19), "profile_aspect": ("float", 0.2),
             "beta_points": ("int", 181)},
    "fig3": {**_COMMON, "aspect1": ("float", 0.25), "aspect2": ("float", 0.2),
             "detuning1": ("float", 1.05), "detuning2": ("float", 1.10),
             "regime": ("str", "near"), "beta_points": ("int", 181)},
    "fig4": {**_COMMON, "prolate_aspect": ("float", 0.30), "oblate_ratio": ("float", 0.145),
             "regime": ("str", "near"), "beta_points": ("int", 181)},
    "scaling": {"material": ("str", "drude_probe"), "volume_radius": ("length", 5.0),
                "s_min": ("float", 2.0), "s_max": ("float", 1e5), "s_points": ("int", 60),
                "regime": ("str", "far")},
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the file position and key."""


@dataclass
class RunConfig:
    task: str
    task_params: Dict[str, object]
    materials: Dict[str, PermittivityModel]
    objects: Dict[str, Dict[str, object]]
    scene: Dict[str, Optional[float]]
    quadrature: QuadratureSpec
    raw: Dict[str, Dict[str, str]]
    overrides: List[str] = field(default_factory=list)
    source: str = ""

    def material(self, name: str) -> PermittivityModel:
        if name in self.materials:
            return self.materials[name]
        try:
            return get_material(name)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None

    def spheroid(self, key: str) -> Spheroid:
        o = self.objects.get(key)
        if o is None or o.get("r_par") is None or o.get("r_perp") is None:
            raise ConfigError(f"[{key}] with r_par and r_perp is required for task {self.task!r}")
        return Spheroid(o["r_par"], o["r_perp"], self.material(o["material"]))


def _locate(text: str, section: str, key: Optional[str]) -> str:
    cur = None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[(.+)\]$", s)
        if m:
            cur = m.group(1).strip()
            if key is None and cur == section:
                return f"line {lineno}"
            continue
        if cur == section and key is not None and re.match(rf"^{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return f"line {lineno}"
    return "position unknown"


class _Source:
    """Maps (section, key) to a position for error messages."""

    def __init__(self, text: str, overrides: Sequence[str]):
        self.text = text
        self.overridden = set()
        for item in overrides:
            lhs = item.split("=", 1)[0].strip()
            if "." in lhs:
                sec, key = lhs.rsplit(".", 1)
                self.overridden.add((sec.strip(), key.strip()))

    def loc(self, section: str, key: Optional[str]) -> str:
        if (section, key) in self.overridden:
            return f"override {section}.{key}"
        return _locate(self.text, section, key)


def parse_quantity(text, kind: str):
    s = str(text).strip()
    if kind == "str":
        return s
    if kind == "bool":
        low = s.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {s!r}")
    if kind == "int":
        v = float(s)
        if v != int(v):
            raise ValueError(f"expected an integer, got {s!r}")
        return int(v)
    if kind == "float":
        return float(s)
    units, default = UNITS[kind]
    m = re.match(r"^([-+0-9.eE]+)\s*([A-Za-zµ]*)$", s)
    if not m:
        raise ValueError(f"cannot parse {kind} value {s!r}")
    unit = (m.group(2) or default).lower()
    if unit not in units:
        raise ValueError(f"unit {m.group(2)!r} not allowed for a {kind}; use one of {sorted(units)}")
    return float(m.group(1)) * units[unit]


def _default_si(kind, value):
    if value is None or kind not in UNITS:
        return value
    units, default = UNITS[kind]
    return value * units[default]


def _read_raw(path: Path) -> Tuple[Dict[str, Dict[str, str]], str]:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        raw = data.get("config", data)
        return {s: {k: str(v) for k, v in kv.items()} for s, kv in raw.items()}, ""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return {s: dict(cp.items(s)) for s in cp.sections()}, text


def apply_overrides(raw: Dict[str, Dict[str, str]], overrides: Sequence[str]) -> None:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        lhs, value = item.split("=", 1)
        if "." not in lhs:
            raise ConfigError(f"override {item!r} needs a section, e.g. quadrature.rel_tol=1e-6")
        section, key = lhs.strip().rsplit(".", 1)
        raw.setdefault(section, {})[key.strip()] = value.strip()


def _typed(section: str, kv: Dict[str, str], schema, src: "_Source", where: str) -> Dict[str, object]:
    unknown = [k for k in kv if k not in schema]
    if unknown:
        k = unknown[0]
        raise ConfigError(f"{where}:{src.loc(section, k)}: unknown key [{section}] {k!r}; "
                          f"allowed: {sorted(schema)}")
    out = {}
    for key, (kind, default) in schema.items():
        if key in kv:
            try:
                out[key] = parse_quantity(kv[key], kind)
            except ValueError as exc:
                raise ConfigError(f"{where}:{src.loc(section, key)}: [{section}] {key}: {exc}") from None
        else:
            out[key] = _default_si(kind, default)
    return out


def _positive(section, key, value, src, where):
    if value is not None and not value > 0:
        raise ConfigError(f"{where}:{src.loc(section, key)}: [{section}] {key} must be > 0")


def build_config(raw: Dict[str, Dict[str, str]], text: str = "", where: str = "<config>",
                 overrides: Sequence[str] = ()) -> RunConfig:
    raw = {s: dict(kv) for s, kv in raw.items()}
    apply_overrides(raw, overrides)
    src = _Source(text, overrides)
    if "task" not in raw or "name" not in raw["task"]:
        raise ConfigError(f"{where}: missing [task] name (one of {', '.join(TASKS)})")
    task = raw["task"]["name"].strip()
    if task not in TASKS:
        raise ConfigError(f"{where}:{src.loc('task', 'name')}: unknown task {task!r}; expected one of {TASKS}")

    materials: Dict[str, PermittivityModel] = {}
    objects: Dict[str, Dict[str, object]] = {}
    scene = {k: _default_si(kind, v) for k, (kind, v) in SCENE_KEYS.items()}
    quad_kv: Dict[str, object] = {k: v for k, (_, v) in QUAD_KEYS.items()}
    task_params: Dict[str, object] = {}

    for section, kv in raw.items():
        if section == "task":
            params = {k: v for k, v in kv.items() if k != "name"}
            task_params = _typed(section, params, TASK_KEYS[task], src, where)
        elif section.startswith("material."):
            name = section.split(".", 1)[1]
            kv = dict(kv)
            variant = kv.pop("variant", None)
            if variant is None:
                raise ConfigError(f"{where}:{src.loc(section, None)}: [{section}] needs 'variant'")
            allowed = VARIANT_PARAMS.get(variant.lower())
            if allowed is None:
                raise ConfigError(f"{where}:{src.loc(section, 'variant')}: unknown variant {variant!r}")
            energy_keys = {"omega_lo", "omega_to", "gamma", "omega_p"}
            vals = {}
            for k, v in kv.items():
                if k not in allowed:
                    raise ConfigError(f"{where}:{src.loc(section, k)}: unknown key [{section}] {k!r}; "
                                      f"allowed for {variant}: {sorted(allowed)}")
                try:
                    vals[k] = parse_quantity(v, "energy") if k in energy_keys else v
                except ValueError as exc:
                    raise ConfigError(f"{where}:{src.loc(section, k)}: [{section}] {k}: {exc}") from None
            try:
                materials[name] = material_from_params(name, variant, vals)
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"{where}:{src.loc(section, None)}: [{section}]: {exc}") from None
        elif section in ("object1", "object2"):
            obj = _typed(section, kv, OBJECT_KEYS, src, where)
            _positive(section, "r_par", obj["r_par"], src, where)
            _positive(section, "r_perp", obj["r_perp"], src, where)
            objects[section] = obj
        elif section == "scene":
            scene = _typed(section, kv, SCENE_KEYS, src, where)
            _positive(section, "d", scene["d"], src, where)
            for t in ("T1", "T2"):
                if scene[t] < 0:
                    raise ConfigError(f"{where}:{src.loc(section, t)}: [scene] {t} must be >= 0 K")
        elif section == "quadrature":
            quad_kv = _typed(section, kv, QUAD_KEYS, src, where)
        else:
            raise ConfigError(f"{where}:{src.loc(section, None)}: unknown section [{section}]")

    if "task" in raw and not task_params:
        task_params = _typed("task", {}, TASK_KEYS[task], src, where)
    seeded = quad_kv.pop("seeded")
    try:
        quad = QuadratureSpec(seed_points=None if seeded else (), **quad_kv)
    except ValueError as exc:
        raise ConfigError(f"{where}: [quadrature]: {exc}") from None

    cfg = RunConfig(task, task_params, materials, objects, scene, quad, raw, list(overrides), where)
    for key in ("material",):
        if key in task_params:
            cfg.material(task_params[key])
    for o in objects.values():
        cfg.material(o["material"])
    if "regime" in task_params and task_params["regime"] not in ("near", "far", "exact"):
        raise ConfigError(f"{where}:{src.loc('task', 'regime')}: regime must be near, far or exact")
    if task_params.get("regime") == "exact" and scene.get("d") is None:
        raise ConfigError(f"{where}: regime 'exact' needs [scene] d")
    return cfg


def load_config(path, overrides: Sequence[str] = ()) -> RunConfig:
    """Parse an INI config (or a JSON run manifest) and apply ``section.key=value`` overrides."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    raw, text = _read_raw(p)
    return build_config(raw, text, str(p), overrides)


def known_material_names(cfg: RunConfig) -> List[str]:
    return sorted(set(registered_materials()) | set(cfg.materials))


def aspect_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if not (0 < lo <= hi) or n < 1:
        raise ConfigError("aspect grid needs 0 < min <= max and at least one point")
    return np.geomspace(lo, hi, n) if n > 1 else np.array([lo])
