"""Command-line front end.

Every option can come from a flat ``key = value`` config file (``--config``)
or a flag; flags win.  Outputs are a CSV at ``--out`` plus ``<out>.json`` with
the resolved configuration and conventions.  Exit codes: 0 success,
1 numerical failure or failed gate, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .errors import NoDampingError, PacketError
from .fields import PHI_SIGN, FieldProfile
from .states import COMPONENT_ORDER, OMEGA_SIGN, PacketParams

COMMANDS = ("density", "asymmetry", "variance", "verify", "lifetime", "collider", "decompose")
EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "RIGIDPACKET_THREADS"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# typed option table shared by flags and config files
# ---------------------------------------------------------------------------

def _float(s):
    return float(s)


def _floats(s):
    return tuple(float(x) for x in str(s).split(",") if x.strip())


def _time(s):
    """A time with an optional unit tag: '1fs', '7.76e5' or '7.76e5c' (Compton)."""
    from .analytics import fs_to_compton
    s = str(s).strip()
    if s.endswith("fs"):
        return fs_to_compton(float(s[:-2]))
    if s.endswith("c"):
        s = s[:-1]
    return float(s)


def _times(s):
    return tuple(_time(x) for x in str(s).split(",") if x.strip())


def _ints(s):
    return tuple(int(x) for x in str(s).split(",") if x.strip())


def _choice(*options):
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s
    return parse


# name: (parser, default, help)
OPTIONS = {
    "alpha": (_float, None, "chirp parameter α"),
    "abar": (_float, None, "size parameter ā (> 0)"),
    "alphas": (_floats, None, "comma-separated α values (asymmetry)"),
    "abars": (_floats, None, "comma-separated ā values (asymmetry, variance)"),
    "alpha_convention": (_choice("figure", "packet"), "figure",
                         "figure: α as in the density figures (packet α = -α); packet: literal"),
    "omega": (_float, None, "Rindler frequency Ω (eigenstate selector)"),
    "selector": (_choice("free", "laser", "rest", "eigenstate"), "free", "state to sample"),
    "frame": (_choice("lab", "rindler"), "lab", "coordinates of the grid"),
    "window": (_floats, None, "x0,x1,y0,y1 (Z̄,T̄ or ū,η)"),
    "res": (_ints, (200,), "points per axis, or nx,ny"),
    "normalization": (_choice("unit-integral", "raw", "fixed", "slice"), None,
                      "density: unit-integral|raw; variance over ū: fixed|slice"),
    "field": (_choice("off", "linear", "circular", "tabulated"), "off", "plane-wave field kind"),
    "a0": (_float, 0.0, "field amplitude"),
    "omega_bar": (_float, 0.1, "field frequency ω/m"),
    "envelope": (_choice("none", "sin2"), "none", "field envelope"),
    "field_csv_f1": (str, None, "two-column CSV (ξ, ḟ₁) for a tabulated field"),
    "field_csv_f2": (str, None, "two-column CSV (ξ, ḟ₂) for a tabulated field"),
    "time": (_time, None, "lab time; suffix fs for femtoseconds, otherwise Compton units"),
    "tbar": (_times, None, "comma-separated lab times (variance over Z̄)"),
    "eta": (_floats, None, "comma-separated η values (variance over ū)"),
    "xi": (_floats, None, "comma-separated phase values ξ (decompose)"),
    "suite": (_choice("all", "free", "laser", "rindler", "volkov", "transformed"), "all", "residual gates"),
    "order": (int, 4, "finite-difference order (2 or 4)"),
    "h": (_float, 1e-3, "finite-difference step"),
    "tol": (_float, 1e-6, "residual tolerance"),
    "omega_over_m": (_float, None, "laser frequency over electron mass"),
    "gamma0": (_float, None, "electron Lorentz factor for the radiation bound"),
    "points_per_efold": (int, 40, "log-grid density for norm integrals"),
    "out": (str, None, "CSV output path; the sidecar goes to <out>.json"),
    "seed": (int, 0, "recorded in the sidecar; every command is deterministic"),
    "threads": (int, None, f"worker processes (default ${THREADS_ENV} or CPU count)"),
    "mask_threshold": (_float, 0.5, "largest tolerated masked-cell fraction"),
}

COMMAND_KEYS = {
    "density": {"alpha", "abar", "alpha_convention", "omega", "selector", "frame", "window", "res",
                "normalization", "field", "a0", "omega_bar", "envelope", "field_csv_f1",
                "field_csv_f2", "mask_threshold"},
    "asymmetry": {"alphas", "abars", "alpha", "abar", "alpha_convention", "time", "points_per_efold"},
    "variance": {"alpha", "abar", "alpha_convention", "tbar", "eta", "normalization", "points_per_efold"},
    "verify": {"suite", "order", "h", "tol"},
    "lifetime": {"alpha", "abar"},
    "collider": {"omega_over_m", "a0", "gamma0", "alpha", "abar"},
    "decompose": {"field", "a0", "omega_bar", "envelope", "field_csv_f1", "field_csv_f2", "xi"},
}
COMMON_KEYS = {"out", "seed", "threads"}


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        values = self.__dict__.get("values", {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    def to_dict(self) -> dict:
        return {"command": self.command, **{k: _jsonable(v) for k, v in sorted(self.values.items())}}


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    return v


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment, dashes in keys become underscores."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rigidpacket", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", default=None, help="flat key = value file")
        for key in sorted(COMMAND_KEYS[cmd] | COMMON_KEYS):
            _, default, help_ = OPTIONS[key]
            # raw strings here; typing happens after merging with the config file
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                            help=f"{help_} (default: {default})")
    return ap


def parse_config(argv=None) -> RunConfig:
    """Merge defaults, config file and flags into a validated RunConfig."""
    ap = build_parser()
    ns = ap.parse_args(argv)
    cmd = ns.command
    allowed = COMMAND_KEYS[cmd] | COMMON_KEYS
    raw = {}
    if ns.config:
        filed = read_config_file(ns.config)
        unknown = sorted(set(filed) - allowed)
        if unknown:
            raise UsageError(f"unknown config keys for '{cmd}': {', '.join(unknown)}")
        raw.update(filed)
    for key in allowed:
        v = getattr(ns, key)
        if v is not None:
            raw[key] = v
    values = {}
    for key in sorted(allowed):
        parse, default, _ = OPTIONS[key]
        if key in raw:
            try:
                values[key] = parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise UsageError(f"invalid value for {key}: {raw[key]!r} ({exc})") from exc
        else:
            values[key] = default
    if values.get("threads") is None:
        env = os.environ.get(THREADS_ENV)
        try:
            values["threads"] = int(env) if env else (os.cpu_count() or 1)
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV} must be an integer") from exc
    cfg = RunConfig(cmd, values)
    _validate(cfg)
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.values.get(k) is None]
    if missing:
        raise UsageError(f"'{cfg.command}' needs {', '.join('--' + k.replace('_', '-') for k in missing)}")


def _check_abar(*abars):
    for a in abars:
        if not a > 0:
            raise UsageError(f"abar must be > 0 (the envelope e^(-abar E_p) needs damping), got {a}")


def _validate(cfg: RunConfig):
    v = cfg.values
    if v["threads"] < 1:
        raise UsageError("threads must be >= 1")
    if cfg.command == "density":
        if v["abar"] is not None:
            _check_abar(v["abar"])
        _require(cfg, "window")
        if len(v["window"]) != 4:
            raise UsageError("window needs four numbers x0,x1,y0,y1")
        if len(v["res"]) not in (1, 2):
            raise UsageError("res needs one or two integers")
        if v["selector"] == "eigenstate":
            _require(cfg, "omega")
            if v["frame"] != "rindler":
                raise UsageError("the eigenstate selector needs --frame rindler")
        else:
            _require(cfg, "alpha", "abar")
            _check_abar(v["abar"])
        if v["normalization"] not in (None, "unit-integral", "raw"):
            raise UsageError("density normalization is unit-integral or raw")
    elif cfg.command == "asymmetry":
        if v["alphas"] is None and v["alpha"] is None:
            raise UsageError("'asymmetry' needs --alpha or --alphas")
        if v["abars"] is None and v["abar"] is None:
            raise UsageError("'asymmetry' needs --abar or --abars")
        _require(cfg, "time")
        _check_abar(*(v["abars"] or (v["abar"],)))
    elif cfg.command == "variance":
        _require(cfg, "alpha", "abar")
        _check_abar(v["abar"])
        if (v["tbar"] is None) == (v["eta"] is None):
            raise UsageError("'variance' needs exactly one of --tbar (over Z̄) or --eta (over ū)")
        if v["normalization"] not in (None, "fixed", "slice"):
            raise UsageError("variance normalization is fixed or slice")
    elif cfg.command == "verify":
        if v["order"] not in (2, 4):
            raise UsageError("order must be 2 or 4")
        if not v["h"] > 0:
            raise UsageError("h must be positive")
    elif cfg.command == "lifetime":
        _require(cfg, "alpha", "abar")
        _check_abar(v["abar"])
        if not abs(v["alpha"]) > v["abar"]:
            raise UsageError("lifetime needs |alpha| > abar")
    elif cfg.command == "collider":
        _require(cfg, "omega_over_m", "a0")
        if not (v["omega_over_m"] > 0 and v["a0"] > 0) or (v["gamma0"] is not None and not v["gamma0"] > 0):
            raise UsageError("collider inputs must be positive")
        if v["abar"] is not None:
            _check_abar(v["abar"])
            _require(cfg, "alpha")
    elif cfg.command == "decompose":
        _require(cfg, "xi")
    if "field" in v and v["field"] == "tabulated":
        _require(cfg, "field_csv_f1")


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def conventions() -> dict:
    from .analytics import FIGURE_ALPHA_SIGN
    return {
        "phi_sign": PHI_SIGN,
        "component_order": COMPONENT_ORDER,
        "omega_sign": OMEGA_SIGN,
        "lifetime_convention": "both: t_reduced uses hbar/mc^2, t_paper = 2*pi*t_reduced",
        "figure_alpha_sign": FIGURE_ALPHA_SIGN,
        "units": "Compton (lengths hbar/mc, times hbar/mc^2)",
    }


def write_atomic(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    def fmt(x):
        if isinstance(x, bool):
            return str(int(x))
        if isinstance(x, float):
            return f"{x:.12e}"
        return str(x)
    lines = [",".join(header)] + [",".join(fmt(x) for x in r) for r in rows]
    return "\n".join(lines) + "\n"


def _emit(cfg: RunConfig, csv_text: str, results: dict):
    sidecar = {"version": __version__, "config": cfg.to_dict(), "conventions": conventions(),
               "results": results}
    if cfg.out:
        # threads never changes the numbers, so it stays out of the byte-compared sidecar
        sidecar["config"].pop("threads", None)
        write_atomic(cfg.out, csv_text)
        write_atomic(cfg.out + ".json", json.dumps(sidecar, indent=2, sort_keys=True, default=_jsonable) + "\n")
    else:
        sys.stdout.write(csv_text)


def _packet(cfg, alpha=None, abar=None) -> PacketParams:
    from .analytics import FIGURE_ALPHA_SIGN
    alpha = cfg.alpha if alpha is None else alpha
    abar = cfg.abar if abar is None else abar
    sign = FIGURE_ALPHA_SIGN if cfg.values.get("alpha_convention") == "figure" else 1
    return PacketParams(sign * alpha, abar)


def _profile(cfg) -> FieldProfile:
    env = None if cfg.envelope == "none" else cfg.envelope
    if cfg.field == "tabulated":
        return FieldProfile.from_csv(cfg.field_csv_f1, cfg.field_csv_f2, cfg.omega_bar, envelope=env)
    return FieldProfile(cfg.field, cfg.a0, cfg.omega_bar, env)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_density(cfg):
    from .analytics import density_grid
    params = None if cfg.selector == "eigenstate" else _packet(cfg)
    res = cfg.res if len(cfg.res) == 2 else (cfg.res[0], cfg.res[0])
    grid = density_grid(cfg.selector, params, _profile(cfg), cfg.window, res, frame=cfg.frame,
                        Omega=cfg.omega, normalization=cfg.normalization or "unit-integral",
                        threads=cfg.threads)
    meta = grid.metadata()
    if params is not None:
        meta["packet_alpha"] = params.alpha
    if grid.mask_fraction() > cfg.mask_threshold:
        _emit(cfg, grid.to_csv(), meta)
        print(f"masked fraction {grid.mask_fraction():.3f} exceeds {cfg.mask_threshold}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(cfg, grid.to_csv(), meta)
    print(f"density grid {meta['shape']} masked={meta['mask_statistics']['masked_cells']}", file=sys.stderr)
    return EXIT_OK


def cmd_asymmetry(cfg):
    from .analytics import COMPTON_TIME_S, asymmetry_log_ratio
    alphas = cfg.alphas or (cfg.alpha,)
    abars = cfg.abars or (cfg.abar,)
    t_fs = cfg.time * COMPTON_TIME_S * 1e15
    rows = []
    for al in alphas:
        for a in abars:
            r = asymmetry_log_ratio(_packet(cfg, al, a), t_fs, cfg.points_per_efold)
            rows.append((float(al), float(a), float(r), math.tanh(r / 2)))
    _emit(cfg, _csv(("alpha", "abar", "log_ratio", "asymmetry"), rows),
          {"time_compton": cfg.time, "time_fs": t_fs,
           "definition": "A = (N_R - N_W)/(N_R + N_W); N_R rest-frame norm of the T=0 slice, "
                         "N_W lab norm outside the light cone at the given time"})
    return EXIT_OK


def cmd_variance(cfg):
    from .analytics import variance_u_numeric, variance_z_closed
    p = _packet(cfg)
    if cfg.tbar is not None:
        rows = []
        for T in cfg.tbar:
            c = variance_z_closed(p, T)
            rows.append((float(T), c["mean"], c["second_moment"], c["variance"], c["delta2"]))
        _emit(cfg, _csv(("tbar", "mean", "second_moment", "variance", "delta2"), rows),
              {"kind": "lab Z moments, closed form"})
    else:
        norm = cfg.normalization or "fixed"
        rows = [(float(e), variance_u_numeric(p, e, norm, cfg.points_per_efold)) for e in cfg.eta]
        _emit(cfg, _csv(("eta", "delta_u"), rows), {"kind": "rest-frame u width", "normalization": norm})
    return EXIT_OK


def cmd_verify(cfg):
    from .verify import SUITES, gate_suite
    suites = SUITES if cfg.suite == "all" else (cfg.suite,)
    gates = gate_suite(suites, cfg.h, cfg.order, cfg.tol)
    rows = [(g.name, g.report.residual_norm, g.tol, g.report.order_estimate, g.passed) for g in gates]
    width = max(len(g.name) for g in gates)
    for g in gates:
        print(f"{'PASS' if g.passed else 'FAIL'}  {g.name:<{width}}  residual={g.report.residual_norm:.3e}"
              f"  tol={g.tol:.0e}  slope={g.report.order_estimate:.3f}", file=sys.stderr)
    results = {"gates": [g.row() for g in gates], "all_passed": all(g.passed for g in gates)}
    _emit(cfg, _csv(("gate", "residual", "tol", "slope", "passed"), rows), results)
    return EXIT_OK if results["all_passed"] else EXIT_NUMERIC


def cmd_lifetime(cfg):
    from .analytics import lifetime
    r = lifetime(PacketParams(cfg.alpha, cfg.abar))
    print(f"t_reduced = {r['t_reduced_s']:.4e} s   t_paper = {r['t_paper_s']:.4e} s", file=sys.stderr)
    _emit(cfg, _csv(("alpha", "abar", "t_reduced_s", "t_paper_s"),
                    [(float(cfg.alpha), float(cfg.abar), r["t_reduced_s"], r["t_paper_s"])]),
          {**r, "discrepancy_factor": r["t_paper_s"] / r["t_reduced_s"]})
    return EXIT_OK


def cmd_collider(cfg):
    from .analytics import collider_estimates
    params = PacketParams(cfg.alpha, cfg.abar) if cfg.abar is not None else None
    est = collider_estimates(cfg.omega_over_m, cfg.a0, cfg.gamma0, params)
    d = est.to_dict()
    keys = sorted(d)
    _emit(cfg, _csv(keys, [tuple(float(d[k]) if d[k] is not None else "" for k in keys)]),
          {**d, "recollision_reference_s": 3e-17,
           "recollision_ratio_T_over_gamma": d["recollision_time_s"] / 3e-17,
           "recollision_ratio_T_over_2gamma": d["recollision_time_doppler_s"] / 3e-17})
    for k in keys:
        print(f"{k} = {d[k]}", file=sys.stderr)
    return EXIT_OK


def cmd_decompose(cfg):
    from .states import decompose_boost_rotation
    prof = _profile(cfg)
    rows = []
    for xi in cfg.xi:
        d = decompose_boost_rotation(prof, xi)
        u = d.proper_velocity
        rows.append((float(xi), d.theta, d.w, *d.V, d.gamma, *d.beta, *map(float, u)))
    header = ("xi", "theta", "w", "V1", "V2", "V3", "gamma", "beta1", "beta2", "beta3", "u0", "u1", "u2", "u3")
    _emit(cfg, _csv(header, rows), {"kind": "rotation-boost split of the field-induced null rotation"})
    return EXIT_OK


HANDLERS = {
    "density": cmd_density, "asymmetry": cmd_asymmetry, "variance": cmd_variance,
    "verify": cmd_verify, "lifetime": cmd_lifetime, "collider": cmd_collider, "decompose": cmd_decompose,
}


def run(cfg: RunConfig) -> int:
    try:
        return HANDLERS[cfg.command](cfg)
    except NoDampingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PacketError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
