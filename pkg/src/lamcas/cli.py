"""Command-line interface: configuration parsing, subcommand dispatch, and
plot-ready CSV/JSON-lines output with a reproducibility manifest.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .constants import HBAR_C_EV_NM, K_B_EV_PER_K
from .eigen import solve_eta_spectrum, kappa_from_eta
from .engine import (CasimirConfig, Structure, convergence_report, free_energy,
                     grating, lifshitz_plane_plane, matsubara_terms, plane,
                     pressure)
from .geometry import GratingGeometry, SpectralPoint
from .materials import DielectricModel, ev_to_wavevector
from .modes import ModalFunction, Region, assemble_eigenvector, grating_modes
from .scattering import (GratingOperator, build_chain, grating_basis,
                         homogeneous_basis, stable_scattering)
from .materials import vacuum as vacuum_model


class ConfigError(ValueError):
    pass


PAPER_PRESET = {
    "temperature": 300.0,
    "geometry": {"p1": 160.0, "p2": 90.0, "depth": 216.0},
    "left": {"type": "grating",
             "groove": {"model": "vacuum"},
             "tooth": {"model": "drude", "omega_p_ev": 8.39, "gamma_ev": 0.043}},
    "right": {"type": "plane",
              "material": {"model": "drude", "omega_p_ev": 8.39,
                           "gamma_ev": 0.043}},
    "n_max": 11,
    "l_max": 41,
    "n_alpha": 30,
    "n_ky": 20,
}

_MATERIAL_KEYS = {"model", "omega_p_ev", "gamma_ev", "eps"}
_STRUCTURE_KEYS = {"type", "material", "groove", "tooth", "backing", "geometry"}
_GEOMETRY_KEYS = {"p1", "p2", "depth"}
_TOP_KEYS = {"temperature", "geometry", "left", "right", "n_max", "l_max",
             "n_alpha", "n_ky", "ky_scale", "a", "period", "command", "pol",
             "alpha0_frac", "ky", "workers"}


def _check_keys(obj, allowed, path):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}")


def _material(spec, path):
    if spec is None:
        return vacuum_model()
    _check_keys(spec, _MATERIAL_KEYS, path)
    kind = spec.get("model", "vacuum")
    if kind == "vacuum":
        return vacuum_model()
    if kind == "constant":
        if "eps" not in spec:
            raise ConfigError(f"{path}eps required for a constant model")
        return DielectricModel("constant", eps_const=float(spec["eps"]))
    if kind in ("drude", "plasma"):
        if "omega_p_ev" not in spec:
            raise ConfigError(f"{path}omega_p_ev required for {kind}")
        wp = ev_to_wavevector(float(spec["omega_p_ev"]))
        if kind == "plasma":
            return DielectricModel("plasma", omega_p=wp)
        if "gamma_ev" not in spec:
            raise ConfigError(f"{path}gamma_ev required for drude")
        return DielectricModel("drude", omega_p=wp,
                               gamma_d=ev_to_wavevector(float(spec["gamma_ev"])))
    raise ConfigError(f"{path}model: unknown material model {kind!r}")


def _geometry(spec, path):
    _check_keys(spec, _GEOMETRY_KEYS, path)
    for k in _GEOMETRY_KEYS:
        if k not in spec:
            raise ConfigError(f"missing key {path}{k}")
        if not isinstance(spec[k], (int, float)):
            raise ConfigError(f"{path}{k} must be a number")
    geom = spec
    if geom["p1"] < 0 or geom["p2"] < 0:
        raise ConfigError(f"{path}p1/{path}p2 must be >= 0")
    if geom["p1"] + geom["p2"] <= 0:
        raise ConfigError(f"{path}: period must be positive")
    if geom["depth"] < 0:
        raise ConfigError(f"{path}depth must be >= 0")
    return GratingGeometry(float(geom["p1"]), float(geom["p2"]),
                           float(geom["depth"]))


def _structure(spec, default_geometry, path):
    _check_keys(spec, _STRUCTURE_KEYS, path)
    kind = spec.get("type")
    if kind == "plane":
        return plane(_material(spec.get("material"), path + "material."))
    if kind == "grating":
        geom_spec = spec.get("geometry")
        geom = _geometry(geom_spec, path + "geometry.") if geom_spec \
            else default_geometry
        if geom is None:
            raise ConfigError(f"{path}geometry required for a grating")
        groove = _material(spec.get("groove"), path + "groove.")
        tooth = _material(spec.get("tooth"), path + "tooth.")
        backing = spec.get("backing")
        backing = _material(backing, path + "backing.") if backing else None
        return grating(geom, groove, tooth, backing)
    raise ConfigError(f"{path}type must be 'plane' or 'grating'")


class RunConfig:
    """Validated CLI configuration with defaults resolved."""

    def __init__(self, raw, command, args):
        _check_keys(raw, _TOP_KEYS, "")
        self.raw = dict(raw)
        self.command = command
        geometry = None
        if "geometry" in raw:
            geometry = _geometry(raw["geometry"], "geometry.")
        self.geometry = geometry
        self.temperature = float(raw.get("temperature", 300.0))
        self.n_max = int(raw.get("n_max", 11))
        self.l_max = int(raw.get("l_max", 41))
        self.n_alpha = int(raw.get("n_alpha", 30))
        self.n_ky = int(raw.get("n_ky", 20))
        self.ky_scale = raw.get("ky_scale")
        self.gap = float(raw.get("a", 1000.0))
        self.pol = raw.get("pol", "h")
        self.alpha0_frac = float(raw.get("alpha0_frac", 0.5))
        self.ky = float(raw.get("ky", 0.0))
        self.workers = int(raw.get("workers", 1))
        self.left = _structure(raw["left"], geometry, "left.") \
            if "left" in raw else None
        self.right = _structure(raw["right"], geometry, "right.") \
            if "right" in raw else None
        self.a_values = _parse_range(args.a_range) if args.a_range else None
        self.xi_values = _parse_range(args.xi_range) if args.xi_range else None
        if self.pol not in ("e", "h"):
            raise ConfigError("pol must be 'e' or 'h'")

    def casimir(self):
        if self.left is None or self.right is None:
            raise ConfigError("left and right structures are required")
        return CasimirConfig(self.left, self.right, gap=self.gap,
                             temperature=self.temperature, n_max=self.n_max,
                             n_alpha=self.n_alpha, n_ky=self.n_ky,
                             ky_scale=self.ky_scale, l_max=self.l_max)

    def manifest(self):
        return {
            "version": __version__,
            "command": self.command,
            "resolved": self.raw,
            "constants": {"hbar_c_ev_nm": HBAR_C_EV_NM,
                          "k_b_ev_per_k": K_B_EV_PER_K},
            "gap_nm": self.gap,
            "a_values": self.a_values,
            "xi_values": self.xi_values,
        }


def _parse_range(text):
    """lo:hi:n[:lin|log] -> list of floats."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"bad range {text!r}; expected lo:hi:n[:lin|log]")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    mode = parts[3] if len(parts) == 4 else "lin"
    if n < 1:
        raise ConfigError("range count must be >= 1")
    if mode == "lin":
        return list(np.linspace(lo, hi, n))
    if mode == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError("log range requires positive endpoints")
        return list(np.geomspace(lo, hi, n))
    raise ConfigError(f"range mode must be lin or log, got {mode!r}")


def _fmt(x):
    return f"{x:.17g}"


class Writer:
    def __init__(self, path, fmt, columns):
        self.fmt = fmt
        self.columns = columns
        self.rows = []
        self.path = path

    def add(self, values):
        self.rows.append(list(values))

    def flush(self):
        out = sys.stdout if self.path is None else open(self.path, "w")
        try:
            if self.fmt == "csv":
                out.write(",".join(self.columns) + "\n")
                for row in self.rows:
                    out.write(",".join(v if isinstance(v, str) else _fmt(v)
                                       for v in row) + "\n")
            else:
                for row in self.rows:
                    rec = {c: (v if isinstance(v, str) else float(_fmt(v)))
                           for c, v in zip(self.columns, row)}
                    out.write(json.dumps(rec) + "\n")
        finally:
            if self.path is not None:
                out.close()


def _write_manifest(cfg: RunConfig, out_path, wall_time):
    if out_path is None:
        return
    man = cfg.manifest()
    man["wall_time_s"] = wall_time
    with open(str(out_path) + ".manifest.json", "w") as fh:
        json.dump(man, fh, indent=2, sort_keys=True)


def _grating_region(cfg: RunConfig):
    structure = cfg.left if cfg.left is not None and not cfg.left.is_plane \
        else cfg.right
    if structure is None or structure.is_plane:
        raise ConfigError("this command needs a grating structure")
    geom, groove, tooth = structure.slices[0]
    return Region(geom, groove, tooth), structure


def cmd_eigen(cfg: RunConfig, writer: Writer):
    region, _ = _grating_region(cfg)
    p = region.geom.period
    alpha0 = cfg.alpha0_frac * math.pi / p
    xis = cfg.xi_values
    if xis is None:
        from .materials import ThermalContext
        unit = ThermalContext(cfg.temperature).unit
        xis = [l * unit for l in range(0, cfg.l_max + 1)]
    for xi in xis:
        point = SpectralPoint(float(xi), alpha0, cfg.ky, p)
        spectrum = solve_eta_spectrum(cfg.pol, point, region.geom,
                                      region.groove_model, region.tooth_model,
                                      cfg.n_max)
        for idx, root in enumerate(spectrum.roots):
            kappa = kappa_from_eta(root.eta, point, region.groove_model)
            writer.add([xi, alpha0, cfg.pol, idx, root.eta, kappa,
                        root.seed_label])


def cmd_modes(cfg: RunConfig, writer: Writer):
    region, _ = _grating_region(cfg)
    p = region.geom.period
    alpha0 = cfg.alpha0_frac * math.pi / p
    from .materials import ThermalContext
    xi = cfg.xi_values[0] if cfg.xi_values else \
        2.0 * ThermalContext(cfg.temperature).unit
    point = SpectralPoint(float(xi), alpha0, cfg.ky, p)
    modes, _spec = grating_modes(cfg.pol, point, region, cfg.n_max)
    xs = np.linspace(-p / 2, p / 2, 401)
    for idx, mode in enumerate(modes):
        fields = assemble_eigenvector(mode, +1, xs)
        for i, x in enumerate(xs):
            writer.add([idx, x,
                        fields[0, i].real, fields[0, i].imag,
                        fields[1, i].real, fields[1, i].imag,
                        fields[2, i].real, fields[2, i].imag,
                        fields[3, i].real, fields[3, i].imag])


def cmd_reflect(cfg: RunConfig, writer: Writer):
    region, structure = _grating_region(cfg)
    p = region.geom.period
    from .materials import ThermalContext
    unit = ThermalContext(cfg.temperature).unit
    xis = cfg.xi_values if cfg.xi_values else [l * unit for l in range(1, 8)]
    alpha0 = cfg.alpha0_frac * math.pi / p
    for xi in xis:
        point = SpectralPoint(float(xi), alpha0, cfg.ky, p)
        bv = homogeneous_basis(vacuum_model(), point, cfg.n_max)
        bm = homogeneous_basis(structure.backing, point, cfg.n_max)
        bg = grating_basis(region, point, cfg.n_max)
        chain = build_chain(bm, [(bg, region.geom.depth)], bv)
        r_left, _ = stable_scattering(chain, point, drive="gap")
        orders = bv.orders
        for i in range(r_left.shape[0]):
            for j in range(r_left.shape[1]):
                writer.add([xi, alpha0, cfg.ky, "R_left",
                            "e" if i % 2 == 0 else "h", orders[i // 2],
                            "e" if j % 2 == 0 else "h", orders[j // 2],
                            r_left[i, j].real, r_left[i, j].imag])


def cmd_pressure(cfg: RunConfig, writer: Writer, energy=False):
    ccfg = cfg.casimir()
    gaps = cfg.a_values if cfg.a_values else [cfg.gap]
    terms = matsubara_terms(ccfg, gaps, want_pressure=True,
                            workers=cfg.workers)
    from .engine import _matsubara_sum
    from .constants import ENERGY_SI, PRESSURE_SI, thermal_wavevector_unit
    unit = thermal_wavevector_unit(cfg.temperature) / (2.0 * math.pi)
    tot_p, tail_p = _matsubara_sum(ccfg, terms, 1)
    tot_f, _tail_f = _matsubara_sum(ccfg, terms, 0)
    p_vals = PRESSURE_SI * (-unit / math.pi ** 2) * tot_p
    f_vals = ENERGY_SI * (unit / math.pi ** 2) * tot_f
    tail_rel = np.abs(tail_p) / np.maximum(np.abs(tot_p), 1e-300)
    for i, a in enumerate(gaps):
        writer.add([a, p_vals[i], f_vals[i], ccfg.l_max, ccfg.n_max,
                    tail_rel[i]])


def cmd_lifshitz(cfg: RunConfig, writer: Writer):
    left = cfg.left.backing if cfg.left else None
    right = cfg.right.backing if cfg.right else None
    if left is None or right is None:
        raise ConfigError("lifshitz needs left and right plane materials")
    gaps = cfg.a_values if cfg.a_values else [cfg.gap]
    for a in gaps:
        p = lifshitz_plane_plane(left, right, a, cfg.temperature)
        writer.add([a, p, float("nan"), cfg.l_max, cfg.n_max, 0.0])


def cmd_converge(cfg: RunConfig, writer: Writer):
    ccfg = cfg.casimir()
    base, rows = convergence_report(ccfg, workers=cfg.workers)
    writer.add(["base", 0, base, 0.0])
    for kind, value, val, delta in rows:
        writer.add([kind, value, val, delta])


_COLUMNS = {
    "eigen": ["xi", "alpha0", "pol", "index", "eta", "kappa", "seed_label"],
    "modes": ["mode", "x", "Ex_re", "Ex_im", "Ey_re", "Ey_im",
              "Hx_re", "Hx_im", "Hy_re", "Hy_im"],
    "reflect": ["xi", "alpha0", "ky", "block", "row_pol", "row_order",
                "col_pol", "col_order", "re", "im"],
    "pressure": ["a_nm", "P_Pa", "F_J_per_m2", "l_max", "N_max",
                 "tail_estimate"],
    "energy": ["a_nm", "P_Pa", "F_J_per_m2", "l_max", "N_max",
               "tail_estimate"],
    "lifshitz": ["a_nm", "P_Pa", "F_J_per_m2", "l_max", "N_max",
                 "tail_estimate"],
    "converge": ["knob", "value", "P_Pa", "rel_delta"],
}


def build_parser():
    ap = argparse.ArgumentParser(prog="lamcas", description=__doc__)
    ap.add_argument("command", choices=sorted(_COLUMNS))
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--preset", choices=["paper"],
                    help="start from a built-in parameter set")
    ap.add_argument("--a", type=float, help="gap in nm")
    ap.add_argument("--a-range", help="lo:hi:n[:lin|log] gap sweep in nm")
    ap.add_argument("--xi-range", help="lo:hi:n[:lin|log] xi sweep in 1/nm")
    ap.add_argument("--l-max", type=int)
    ap.add_argument("--n-max", type=int)
    ap.add_argument("--pol", choices=["e", "h"])
    ap.add_argument("--alpha0-frac", type=float,
                    help="alpha0 in units of pi/period")
    ap.add_argument("--ky", type=float)
    ap.add_argument("--temperature", type=float)
    ap.add_argument("--out", help="output path (default: stdout)")
    ap.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    ap.add_argument("--workers", type=int)
    return ap


def load_config(args):
    raw = {}
    if args.preset == "paper":
        raw = json.loads(json.dumps(PAPER_PRESET))
    if args.config:
        with open(args.config) as fh:
            try:
                file_cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config root must be a JSON object")
        raw.update(file_cfg)
    overrides = {"a": args.a, "l_max": args.l_max, "n_max": args.n_max,
                 "pol": args.pol, "alpha0_frac": args.alpha0_frac,
                 "ky": args.ky, "workers": args.workers,
                 "temperature": args.temperature}
    for key, val in overrides.items():
        if val is not None:
            raw[key] = val
    return RunConfig(raw, args.command, args)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    writer = Writer(args.out, args.format, _COLUMNS[args.command])
    handlers = {
        "eigen": cmd_eigen,
        "modes": cmd_modes,
        "reflect": cmd_reflect,
        "pressure": cmd_pressure,
        "energy": cmd_pressure,
        "lifshitz": cmd_lifshitz,
        "converge": cmd_converge,
    }
    start = time.time()
    try:
        handlers[args.command](cfg, writer)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure path
        print(f"numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3
    writer.flush()
    _write_manifest(cfg, args.out, time.time() - start)
    return 0


if __name__ == "__main__":
    sys.exit(main())
