"""Batch front end: ``akgup <command> --config run.ini --output outdir --seed N``.

Exit codes: 0 ok, 2 verification failure, 3 config error, 4 I/O error.
Every failure writes a one-line JSON error record to stderr.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coefficients import CoefficientMismatchError, compare_with_quoted, derive_coefficients, kernel_table
from .dynamics import (
    DEFAULT_GRID,
    DEFAULT_WIDTH,
    GaussianPacket,
    InitialState,
    ak_product,
    beta_sweep,
    evolve,
    sweep_csv,
    sweep_slopes,
    variance,
)
from .factorization import verify_factorization
from .jsonio import complex_pair, dumps
from .oracle.grid import GridSpec, GridTooSmallError, save_state
from .oracle.quadrature import DEFAULT_EPS, quad_kernel
from .params import ParameterError, SystemParams
from .propagator import PropagatorPoint, PropagatorValue, k_ak, k_gup

__all__ = [
    "COMMANDS",
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
    "report_diff",
    "DiffReport",
    "SchemaMismatch",
    "run",
    "main",
]

COMMANDS = ("verify-algebra", "derive-coefficients", "eval-kernel", "compare-oracle", "evolve", "ak-product", "sweep")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


# -- configuration -----------------------------------------------------------------
@dataclass
class RunConfig:
    command: str
    params: SystemParams = field(default_factory=SystemParams)
    grid: GridSpec | None = None
    points: list[PropagatorPoint] = field(default_factory=list)
    initial: InitialState | None = None
    output: Path = Path(".")
    seed: int = 0
    t_order: int = 6
    eps: tuple[float, ...] = DEFAULT_EPS
    tolerance: float = 1e-6
    random_points: int = 0
    beta_cap: float = 1e-3
    betas: tuple[float, ...] = (0.0, 1e-6, 1e-5)
    method: str = "unitary"


def _floats(text: str, name: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(name, f"expected numbers, got {text!r}") from None


def _get_float(sec, key: str, name: str, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(name, "missing")
        return default
    vals = _floats(sec[key], name)
    if len(vals) != 1:
        raise ConfigError(name, "expected a single number")
    return vals[0]


def _get_int(sec, key: str, name: str, default: int) -> int:
    if key not in sec:
        return default
    try:
        return int(sec[key])
    except ValueError:
        raise ConfigError(name, f"expected an integer, got {sec[key]!r}") from None


def _params(cp) -> SystemParams:
    if "params" not in cp:
        raise ConfigError("params", "section is required")
    sec = cp["params"]
    known = {"m1", "m2", "m3", "kappa", "beta", "t"}
    for key in sec:
        if key not in known:
            raise ConfigError(f"params.{key}", "unknown key")
    defaults = SystemParams()
    vals = {}
    for key in ("m1", "m2", "m3", "kappa", "beta"):
        vals[key] = _get_float(sec, key, f"params.{key}", getattr(defaults, key))
    vals["T"] = _get_float(sec, "t", "params.T", defaults.T)
    try:
        return SystemParams(**vals)
    except ParameterError as exc:
        raise ConfigError("params", str(exc)) from None


def _grid(cp) -> GridSpec | None:
    if "grid" not in cp:
        return None
    sec = cp["grid"]
    n = _get_int(sec, "n", "grid.n", DEFAULT_GRID.n)
    try:
        return GridSpec(n, _get_float(sec, "p_max", "grid.p_max", DEFAULT_GRID.p_max))
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None


def _points(cp) -> list[PropagatorPoint]:
    if "points" not in cp:
        return []
    out = []
    for key, text in cp["points"].items():
        vals = _floats(text, f"points.{key}")
        if len(vals) != 6:
            raise ConfigError(f"points.{key}", "expected six numbers: Q1 Q2 Q3 q1 q2 q3")
        out.append(PropagatorPoint(vals[:3], vals[3:]))
    return out


def _initial(cp) -> InitialState:
    sec = cp["initial"] if "initial" in cp else {}
    kind = sec.get("kind", "product")
    packets = []
    for i in (1, 2, 3):
        width = _get_float(sec, f"width{i}", f"initial.width{i}", _get_float(sec, "width", "initial.width", DEFAULT_WIDTH))
        center = _get_float(sec, f"center{i}", f"initial.center{i}", 0.0)
        momentum = _get_float(sec, f"momentum{i}", f"initial.momentum{i}", 0.0)
        try:
            packets.append(GaussianPacket(center, momentum, width))
        except ParameterError as exc:
            raise ConfigError(f"initial.width{i}", str(exc)) from None
    rho = _get_float(sec, "rho", "initial.rho", 0.0)
    try:
        return InitialState(tuple(packets), kind, rho)
    except ParameterError as exc:
        raise ConfigError("initial", str(exc)) from None


def parse_config(text: str, command: str, output=".", seed: int | None = None) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from None
    run_sec = cp["run"] if "run" in cp else {}
    cfg = RunConfig(command=command, output=Path(output))
    cfg.params = _params(cp) if "params" in cp else SystemParams()
    cfg.grid = _grid(cp)
    cfg.points = _points(cp)
    cfg.initial = _initial(cp)
    cfg.seed = _get_int(run_sec, "seed", "run.seed", 0) if seed is None else seed
    if "oracle" in cp:
        sec = cp["oracle"]
        if "eps" in sec:
            cfg.eps = _floats(sec["eps"], "oracle.eps")
        cfg.tolerance = _get_float(sec, "tolerance", "oracle.tolerance", cfg.tolerance)
        cfg.random_points = _get_int(sec, "random_points", "oracle.random_points", 0)
        cfg.beta_cap = _get_float(sec, "beta_cap", "oracle.beta_cap", cfg.beta_cap)
    if "algebra" in cp:
        cfg.t_order = _get_int(cp["algebra"], "t_order", "algebra.t_order", 6)
    if "sweep" in cp and "betas" in cp["sweep"]:
        cfg.betas = _floats(cp["sweep"]["betas"], "sweep.betas")
    if "evolve" in cp:
        cfg.method = cp["evolve"].get("method", "unitary")
        if cfg.method not in ("unitary", "convolution"):
            raise ConfigError("evolve.method", "expected 'unitary' or 'convolution'")
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    c = cfg.command
    if c == "eval-kernel" and not cfg.points:
        raise ConfigError("points", "eval-kernel needs at least one point")
    if c == "compare-oracle" and not cfg.points and cfg.random_points <= 0:
        raise ConfigError("points", "compare-oracle needs points or oracle.random_points > 0")
    if c in ("eval-kernel", "compare-oracle", "derive-coefficients") and cfg.params.b == 0:
        raise ConfigError("params", "m2 m3 kappa^2 = 1 makes the AK kernel singular")
    if c == "compare-oracle" and (any(e <= 0 for e in cfg.eps) or any(b >= a for a, b in zip(cfg.eps, cfg.eps[1:]))):
        raise ConfigError("oracle.eps", "dampings must be positive and strictly descending")
    if c in ("ak-product", "sweep") and not np.isclose(cfg.params.T * cfg.params.kappa, 1.0, rtol=1e-12, atol=0):
        raise ConfigError("params.T", "ak-product and sweep require T = 1/kappa")
    if c == "verify-algebra" and cfg.t_order < 5:
        raise ConfigError("algebra.t_order", "must be at least 5")


def load_config(path, command: str, output=".", seed: int | None = None) -> RunConfig:
    text = Path(path).read_text()
    return parse_config(text, command, output, seed)


# -- structured diffs --------------------------------------------------------------
class SchemaMismatch(ValueError):
    pass


@dataclass
class DiffReport:
    tolerance: float
    entries: list[dict]
    max_relative: float

    @property
    def ok(self) -> bool:
        return not self.entries

    def as_dict(self) -> dict:
        return {"tolerance": self.tolerance, "max_relative": self.max_relative, "ok": self.ok, "flagged": self.entries}


def _is_pair(x) -> bool:
    return isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)


def _walk(e, a, path: str, out: list):
    if isinstance(e, dict):
        if not isinstance(a, dict) or set(e) != set(a):
            raise SchemaMismatch(f"keys differ at {path or '<root>'}")
        for k in sorted(e):
            _walk(e[k], a[k], f"{path}.{k}" if path else str(k), out)
    elif _is_pair(e):
        if not _is_pair(a):
            raise SchemaMismatch(f"expected a [Re, Im] pair at {path}")
        out.append((path, complex(*e), complex(*a)))
    elif isinstance(e, list):
        if not isinstance(a, list) or len(a) != len(e):
            raise SchemaMismatch(f"list length differs at {path}")
        for i, (x, y) in enumerate(zip(e, a)):
            _walk(x, y, f"{path}[{i}]", out)
    elif isinstance(e, bool) or isinstance(e, str) or e is None:
        if type(a) is not type(e):
            raise SchemaMismatch(f"type differs at {path}")
        if a != e:
            out.append((path, e, a))
    elif isinstance(e, (int, float)):
        if not isinstance(a, (int, float)) or isinstance(a, bool):
            raise SchemaMismatch(f"expected a number at {path}")
        out.append((path, e, a))
    else:
        raise SchemaMismatch(f"unsupported value at {path}")


def report_diff(expected, actual, tolerance: float) -> DiffReport:
    """Per-field relative differences; entries above ``tolerance``, worst first."""
    leaves: list = []
    _walk(expected, actual, "", leaves)
    flagged = []
    worst = 0.0
    for path, e, a in leaves:
        if isinstance(e, (bool, str)) or e is None:
            flagged.append({"field": path, "expected": e, "actual": a, "relative": float("inf")})
            worst = float("inf")
            continue
        rel = abs(a - e) / abs(e) if e != 0 else abs(a - e)
        worst = max(worst, rel)
        if rel > tolerance:
            exp_v = complex_pair(e) if isinstance(e, complex) else e
            act_v = complex_pair(a) if isinstance(a, complex) else a
            flagged.append({"field": path, "expected": exp_v, "actual": act_v, "relative": rel})
    flagged.sort(key=lambda d: (-d["relative"], d["field"]))
    return DiffReport(tolerance, flagged, worst)


# -- commands ----------------------------------------------------------------------
def _write(cfg: RunConfig, name: str, text: str) -> Path:
    cfg.output.mkdir(parents=True, exist_ok=True)
    path = cfg.output / name
    path.write_text(text)
    return path


def _kernel_record(params: SystemParams, point: PropagatorPoint, value) -> dict:
    return {
        "params": params.as_dict(),
        "point": {"Q": list(point.Q), "q": list(point.q)},
        "base": complex_pair(value.base),
        "correction": complex_pair(value.correction),
        "total": complex_pair(value.total),
    }


def _cmd_verify_algebra(cfg: RunConfig) -> int:
    residual = verify_factorization(cfg.t_order)
    record = {
        "command": cfg.command,
        "t_order": cfg.t_order,
        "residual_terms": len(residual),
        "ok": residual.is_zero(),
        "residual": residual.to_text(),
    }
    _write(cfg, "verify-algebra.json", dumps(record))
    print(f"residual: {len(residual)} terms")
    return EXIT_OK if residual.is_zero() else EXIT_VERIFY


def _cmd_derive(cfg: RunConfig) -> int:
    derived = derive_coefficients(cfg.params)
    worst = max(compare_with_quoted(derived).values())
    print(f"max relative deviation from quoted closed forms: {worst:.3e}")
    try:
        table = kernel_table(cfg.params)
    except CoefficientMismatchError as exc:
        _write(cfg, "coefficients.json", derived.to_json())
        return _error("verification", str(exc), EXIT_VERIFY)
    _write(cfg, "coefficients.json", table.to_json())
    return EXIT_OK


def _cmd_eval(cfg: RunConfig) -> int:
    table = kernel_table(cfg.params) if cfg.params.beta > 0 else None
    records = []
    for pt in cfg.points:
        if table is None:
            base = k_ak(cfg.params, pt)
            val = PropagatorValue(base, 1 + 0j, base)
        else:
            val = k_gup(cfg.params, pt, table)
        records.append(_kernel_record(cfg.params, pt, val))
    _write(cfg, "kernel.json", dumps(records))
    return EXIT_OK


def _random_configs(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    out = []
    while len(out) < cfg.random_points:
        m = rng.uniform(0.5, 2.0, 3)
        kappa, T = rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5)
        prm = SystemParams(*m, kappa=kappa, beta=0.0, T=T)
        if abs(prm.b) < 0.2:
            continue
        pt = PropagatorPoint(tuple(rng.uniform(-1, 1, 3)), tuple(rng.uniform(-1, 1, 3)))
        out.append((prm.replace(beta=cfg.params.beta), pt))
    return out


def _cmd_compare(cfg: RunConfig) -> int:
    configs = [(cfg.params, pt) for pt in cfg.points] + _random_configs(cfg)
    expected, actual, meta = [], [], []
    for prm, pt in configs:
        table = derive_coefficients(prm)
        closed = k_gup(prm, pt, table)
        quad = quad_kernel(prm, pt, cfg.eps, rtol=cfg.tolerance)
        expected.append({"total": complex_pair(quad.value)})
        actual.append({"total": complex_pair(closed.total)})
        meta.append(
            {
                "params": prm.as_dict(),
                "point": {"Q": list(pt.Q), "q": list(pt.q)},
                "closed_form": complex_pair(closed.total),
                "quadrature": complex_pair(quad.value),
                "quadrature_error": quad.error,
                "flagged": quad.flagged,
            }
        )
    diff = report_diff(expected, actual, cfg.tolerance)
    _write(cfg, "compare-oracle.json", dumps({"configs": meta, "diff": diff.as_dict()}))
    print(f"{len(configs)} configurations, max relative difference {diff.max_relative:.3e}")
    return EXIT_OK if diff.ok and not any(m["flagged"] for m in meta) else EXIT_VERIFY


def _grid_or_default(cfg: RunConfig) -> GridSpec:
    return cfg.grid or DEFAULT_GRID


def _cmd_evolve(cfg: RunConfig) -> int:
    spec = _grid_or_default(cfg)
    state = evolve(cfg.initial, cfg.params, spec, method=cfg.method, beta_cap=cfg.beta_cap)
    cfg.output.mkdir(parents=True, exist_ok=True)
    save_state(state, cfg.output / "state")
    summary = {
        "params": cfg.params.as_dict(),
        "grid": spec.as_dict(),
        "method": cfg.method,
        "norm": state.norm,
        "variance": [variance(state.normalized(), ax) for ax in (1, 2, 3)],
    }
    _write(cfg, "evolve.json", dumps(summary))
    return EXIT_OK if abs(state.norm - 1) <= 1e-10 else EXIT_VERIFY


def _cmd_ak_product(cfg: RunConfig) -> int:
    rep = ak_product(cfg.initial, cfg.params, _grid_or_default(cfg), cross_check=cfg.initial.kind == "product", beta_cap=cfg.beta_cap)
    _write(cfg, "ak-product.json", dumps(rep.as_dict()))
    print(f"dx1 dx2 = {rep.product:.12f} (bound {rep.bound})")
    if cfg.params.beta == 0 and not rep.satisfies_bound:
        return EXIT_VERIFY
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig) -> int:
    reports = beta_sweep(cfg.initial, cfg.params, cfg.betas, _grid_or_default(cfg), beta_cap=cfg.beta_cap)
    _write(cfg, "sweep.csv", sweep_csv(reports))
    if len(reports) > 1:
        _write(cfg, "sweep-slopes.json", dumps({"betas": list(cfg.betas), "slopes": sweep_slopes(reports)}))
    return EXIT_OK


_HANDLERS = {
    "verify-algebra": _cmd_verify_algebra,
    "derive-coefficients": _cmd_derive,
    "eval-kernel": _cmd_eval,
    "compare-oracle": _cmd_compare,
    "evolve": _cmd_evolve,
    "ak-product": _cmd_ak_product,
    "sweep": _cmd_sweep,
}


def run(cfg: RunConfig) -> int:
    return _HANDLERS[cfg.command](cfg)


def _error(kind: str, message: str, code: int, field_name: str | None = None) -> int:
    rec = {"error": kind, "message": message, "exit_code": code}
    if field_name:
        rec["field"] = field_name
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="akgup", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="sectioned key = value run file")
    ap.add_argument("--output", default=".", help="directory for artifacts")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--t-order", type=int, default=None, help="verify-algebra: highest power of T checked")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.config:
            cfg = load_config(args.config, args.command, args.output, args.seed)
        else:
            cfg = parse_config("", args.command, args.output, args.seed)
        if args.t_order is not None:
            cfg.t_order = args.t_order
            _validate(cfg)
    except ConfigError as exc:
        return _error("config", exc.message, EXIT_CONFIG, exc.field)
    except OSError as exc:
        return _error("io", f"cannot read {args.config}: {exc.strerror}", EXIT_IO)
    try:
        return run(cfg)
    except (ParameterError, GridTooSmallError) as exc:
        return _error("config", str(exc), EXIT_CONFIG)
    except CoefficientMismatchError as exc:
        return _error("verification", str(exc), EXIT_VERIFY)
    except OSError as exc:
        return _error("io", str(exc), EXIT_IO)


if __name__ == "__main__":
    sys.exit(main())
