"""
Command-line driver: ``entanglab {solve,alpha,entangle,sweep,kernel,verify}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import sys
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .cone import e1_closed_form
from .correlators import (
    ALPHA_ZERO_TOL,
    KernelParams,
    ProbeSpec,
    alpha_from_spectrum,
    filtered_correlator,
    mode_occupation_correlator,
    probe_level_correlator,
    read_spectrum_table,
)
from .fock import bosonic_sign_ladder, ladder_array
from .models import QdFormulaInputs, build_model, qd_entanglement_formula
from .spectra import DEGENERACY_TOL, ground_state, low_spectrum

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
FLAVORS = ("mode", "filtered", "probe_level")
FIELDS = ("model_id", "flavor", "eps0", "eps1", "gamma", "vprime", "alpha", "mean0", "mean1",
          "covariance", "E1", "status")
TOP_KEYS = {"model_id", "flavor", "model", "probes", "sweep", "output", "tolerances"}
PROBE_KEYS = {"energy", "character", "width", "site", "coupling", "mode"}
SWEEP_KEYS = {"parameter", "from", "to", "steps"}
OUTPUT_KEYS = {"path", "format"}
RUN_TOLERANCES = {"degeneracy": DEGENERACY_TOL, "mode_selection": None}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: dict
    probes: tuple[ProbeSpec, ProbeSpec]
    flavor: str = "mode"
    model_id: str = ""
    sweep: dict | None = None
    output: dict | None = None
    tolerances: dict | None = None
    raw: dict | None = None


@dataclass
class ResultRow:
    model_id: str
    flavor: str
    eps0: float
    eps1: float
    gamma: float
    vprime: float
    alpha: float | None
    mean0: float | None
    mean1: float | None
    covariance: float | None
    E1: float | None
    status: str


# ------------------------------------------------------------------ config


def _unknown(d: dict, allowed: set, where: str):
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def parse_config(raw: dict) -> RunConfig:
    """Validate a parsed TOML document; unknown keys are errors."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    _unknown(raw, TOP_KEYS, "top level")
    if "model" not in raw:
        raise ConfigError("missing [model] table")
    model = raw["model"]
    if not isinstance(model, dict) or "preset" not in model:
        raise ConfigError("[model] needs a preset")
    _unknown(model, {"preset", "params"}, "[model]")
    flavor = raw.get("flavor", "mode")
    if flavor not in FLAVORS:
        raise ConfigError(f"flavor must be one of {FLAVORS}, got {flavor!r}")
    probes = raw.get("probes", [])
    if len(probes) != 2:
        raise ConfigError("exactly two [[probes]] entries required")
    specs = []
    for i, p in enumerate(probes):
        _unknown(p, PROBE_KEYS, f"probes[{i}]")
        if "energy" not in p:
            raise ConfigError(f"probes[{i}] needs an energy")
        try:
            specs.append(ProbeSpec(**p))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"probes[{i}]: {exc}") from exc
    sweep = raw.get("sweep")
    if sweep is not None:
        _unknown(sweep, SWEEP_KEYS, "[sweep]")
        if not SWEEP_KEYS <= set(sweep):
            raise ConfigError(f"[sweep] needs {sorted(SWEEP_KEYS)}")
        if int(sweep["steps"]) < 2:
            raise ConfigError("sweep steps must be >= 2")
        _resolve_path(raw, sweep["parameter"])
    output = raw.get("output")
    if output is not None:
        _unknown(output, OUTPUT_KEYS, "[output]")
        if output.get("format", "csv") not in ("csv", "json"):
            raise ConfigError("output format must be csv or json")
    tol = raw.get("tolerances", {})
    _unknown(tol, set(RUN_TOLERANCES), "[tolerances]")
    try:
        build_model(model)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc
    return RunConfig(model, tuple(specs), flavor, str(raw.get("model_id", model["preset"])),
                     sweep, output, tol, raw)


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(raw)


def _resolve_path(raw: dict, path: str):
    """Container and key addressed by a dotted path such as ``probes.1.energy``."""
    parts = path.split(".")
    node = raw
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) and part.isdigit() else node.get(part) if isinstance(node, dict) else None
        if node is None:
            raise ConfigError(f"sweep parameter {path!r} does not exist")
    last = parts[-1]
    if isinstance(node, list) and last.isdigit() and int(last) < len(node):
        key = int(last)
    elif isinstance(node, dict) and last in node:
        key = last
    else:
        raise ConfigError(f"sweep parameter {path!r} does not exist")
    if isinstance(node[key], bool) or not isinstance(node[key], (int, float)):
        raise ConfigError(f"sweep parameter {path!r} is not numeric")
    return node, key


def sweep_points(cfg: RunConfig) -> list[RunConfig]:
    if cfg.sweep is None:
        return [cfg]
    s = cfg.sweep
    values = np.linspace(float(s["from"]), float(s["to"]), int(s["steps"]))
    points = []
    for v in values:
        raw = copy.deepcopy(cfg.raw)
        raw.pop("sweep")
        node, key = _resolve_path(raw, s["parameter"])
        node[key] = float(v)
        points.append(parse_config(raw))
    return points


# ------------------------------------------------------------- evaluation


def _tol(cfg: RunConfig, name):
    return (cfg.tolerances or {}).get(name, RUN_TOLERANCES[name])


def _clip_alpha(alpha: float) -> float:
    # round-off around zero counts as zero
    return 0.0 if abs(alpha) < ALPHA_ZERO_TOL else max(alpha, 0.0)


def evaluate(cfg: RunConfig, cache: SolveCache | None = None) -> ResultRow:
    """One result row; numerical failures become a status, not an exception."""
    p0, p1 = cfg.probes
    base = dict(model_id=cfg.model_id, flavor=cfg.flavor, eps0=p0.energy, eps1=p1.energy,
                gamma=p0.width, vprime=p0.coupling)
    try:
        r = compute_alpha(cfg, cache)
    except Exception as exc:  # degeneracy, no convergence, undefined alpha
        return ResultRow(**base, alpha=None, mean0=None, mean1=None, covariance=None, E1=None,
                         status=f"error: {exc}")
    e1 = e1_closed_form(_clip_alpha(r.alpha)) if r.status == "ok" and r.alpha is not None else None
    return ResultRow(**base, alpha=r.alpha, mean0=r.mean0, mean1=r.mean1, covariance=r.covariance,
                     E1=e1, status=r.status)


class SolveCache:
    """Ground states and spectra shared by sweep points with the same model."""

    def __init__(self):
        self._lock = threading.Lock()
        self._locks: dict = {}
        self._store: dict = {}

    def get(self, key, compute):
        with self._lock:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            if key not in self._store:
                self._store[key] = compute()
            return self._store[key]


def compute_alpha(cfg: RunConfig, cache: SolveCache | None = None):
    p0, p1 = cfg.probes
    deg = float(_tol(cfg, "degeneracy"))
    if cfg.flavor == "probe_level":
        probes = [(p.energy, p.coupling, p.site) for p in (p0, p1)]
        config = {"preset": "probe_coupled", "params": {"inner": cfg.model, "probes": probes}}
        return probe_level_correlator(config, (p0.character, p1.character))
    cache = cache or SolveCache()
    key = (cfg.flavor, json.dumps(cfg.model, sort_keys=True), deg)
    if cfg.flavor == "mode":
        def solve():
            model = build_model(cfg.model)
            sector = model.modes.fermi_index if model.number_conserving else None
            return model, ground_state(model.hamiltonian, model.basis(sector), degeneracy_tol=deg).state

        model, g = cache.get(key, solve)
        return mode_occupation_correlator(g, model.modes, p0, p1, tol=_tol(cfg, "mode_selection"))

    def spectrum():
        model = build_model(cfg.model)
        return low_spectrum(model.hamiltonian, model.basis(), degeneracy_tol=deg)

    return filtered_correlator(cache.get(key, spectrum), p0, p1)


def run(cfg: RunConfig, threads: int = 1) -> list[ResultRow]:
    """Rows in sweep order regardless of completion order."""
    points = sweep_points(cfg)
    cache = SolveCache()
    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda p: evaluate(p, cache), points))
    return [evaluate(p, cache) for p in points]


# ----------------------------------------------------------------- output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_text(rows: list[ResultRow], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([asdict(r) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in rows:
        w.writerow([_fmt(getattr(r, f)) for f in FIELDS])
    return buf.getvalue()


def read_rows(path) -> list[ResultRow]:
    """Inverse of :func:`rows_to_text` for either format."""
    text = Path(path).read_text()
    if text.lstrip().startswith("["):
        return [ResultRow(**d) for d in json.loads(text)]
    out = []
    for d in csv.DictReader(io.StringIO(text)):
        conv = {}
        for f in FIELDS:
            v = d[f]
            if f in ("model_id", "flavor", "status"):
                conv[f] = v
            else:
                conv[f] = None if v == "" else float(v)
        out.append(ResultRow(**conv))
    return out


def write_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, args, cfg: RunConfig | None = None):
    out = args.output or ((cfg.output or {}).get("path") if cfg else None)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _format(args, cfg: RunConfig | None):
    return args.format or ((cfg.output or {}).get("format") if cfg and cfg.output else None) or "csv"


def _apply_tolerances(cfg: RunConfig, overrides: dict) -> RunConfig:
    tol = dict(cfg.tolerances or {})
    for k, v in overrides.items():
        if k not in RUN_TOLERANCES:
            raise ConfigError(f"unknown tolerance {k!r} (known: {', '.join(RUN_TOLERANCES)})")
        tol[k] = v
    cfg.tolerances = tol
    return cfg


def _parse_tolerances(items) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tolerance expects NAME=VALUE, got {item!r}")
        try:
            out[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"tolerance {name!r} is not a number") from exc
    return out


# --------------------------------------------------------------- commands


def cmd_solve(args) -> int:
    cfg = _apply_tolerances(load_config(args.config), _parse_tolerances(args.tolerance))
    model = build_model(cfg.model)
    basis = model.basis(args.sector)
    k = min(args.k, len(basis))
    spec = low_spectrum(model.hamiltonian, basis, k, degeneracy_tol=float(_tol(cfg, "degeneracy")))
    rows = [{"index": i, "energy": float(e)} for i, e in enumerate(spec.eigenvalues)]
    if _format(args, None) == "json":
        text = json.dumps({"model_id": cfg.model_id, "dimension": len(basis), "method": spec.method,
                           "ground_degeneracy": spec.ground_degeneracy, "levels": rows}, indent=1) + "\n"
    else:
        text = "index,energy\n" + "".join(f"{r['index']},{r['energy']!r}\n" for r in rows)
    _emit(text, args)
    return EXIT_OK


def _rows_command(args, force_single: bool) -> int:
    cfg = _apply_tolerances(load_config(args.config), _parse_tolerances(args.tolerance))
    if force_single:
        cfg.sweep = None
    elif cfg.sweep is None:
        raise ConfigError("sweep command needs a [sweep] table")
    rows = run(cfg, threads=args.threads)
    _emit(rows_to_text(rows, _format(args, cfg)), args, cfg)
    if all(r.status.startswith("error") for r in rows):
        for r in rows:
            print(r.status, file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_alpha(args) -> int:
    return _rows_command(args, True)


def cmd_sweep(args) -> int:
    return _rows_command(args, False)


def cmd_entangle(args) -> int:
    if args.qd is not None:
        try:
            N, g0, g1, e0, e1 = (float(x) for x in args.qd.split(","))
            inp = QdFormulaInputs(N, g0, g1, e0, e1)
        except ValueError as exc:
            raise ConfigError(f"--qd expects N,gamma0,gamma1,eps0,eps1: {exc}") from exc
        r = qd_entanglement_formula(inp)
        report = {"E1": r.entanglement, "alpha_int": r.alpha_int, "alpha_nonint": r.alpha_nonint,
                  "gamma_bar": r.gamma_bar, "valid": r.valid}
    elif args.alpha is not None:
        if args.alpha < 0:
            report = {"alpha": args.alpha, "E1": None, "status": "negative_alpha"}
        else:
            report = {"alpha": args.alpha, "E1": e1_closed_form(args.alpha), "status": "ok",
                      "weights": [1 / (1 + args.alpha), args.alpha / (1 + args.alpha)]}
    elif args.config:
        cfg = _apply_tolerances(load_config(args.config), _parse_tolerances(args.tolerance))
        cfg.sweep = None
        row = evaluate(cfg)
        report = asdict(row)
        if row.E1 is not None:
            a = _clip_alpha(row.alpha)
            report["weights"] = [1 / (1 + a), a / (1 + a)]
        if row.status.startswith("error"):
            print(json.dumps(report, indent=1))
            return EXIT_NUMERIC
    else:
        raise ConfigError("entangle needs --config, --alpha or --qd")
    _emit(json.dumps(report, indent=1) + "\n", args)
    return EXIT_OK


def cmd_kernel(args) -> int:
    try:
        omega, s = read_spectrum_table(args.spectrum)
        k = KernelParams(args.gamma, args.tau)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    tol = _parse_tolerances(args.tolerance)
    extra = set(tol) - {"quadrature"}
    if extra:
        raise ConfigError(f"unknown tolerance(s) {sorted(extra)} (known: quadrature)")
    r = alpha_from_spectrum(omega, s, tuple(args.means), k, **({"tol": tol["quadrature"]} if tol else {}))
    report = {"alpha": r.alpha, "error_estimate": r.error_estimate, "imaginary": r.imaginary}
    _emit(json.dumps(report, indent=1) + "\n", args)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import DEFAULT_TOLERANCES, run_verify

    tol = _parse_tolerances(args.tolerance)
    unknown = set(tol) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ConfigError(f"unknown tolerance(s) {sorted(unknown)} (known: {', '.join(DEFAULT_TOLERANCES)})")
    ladder = bosonic_sign_ladder if args.mutate == "sign" else ladder_array
    results = run_verify(tol, ladder=ladder, only=args.only, log=lambda s: print(s, flush=True))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if args.output:
        write_atomic(args.output, json.dumps([asdict(r) for r in results], indent=1) + "\n")
    return EXIT_NUMERIC if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--output", help="write results here (atomically) instead of stdout")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--tolerance", action="append", metavar="NAME=VALUE")

    p = argparse.ArgumentParser(prog="entanglab", description=__doc__.splitlines()[1])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="low-lying spectrum of the configured model")
    s.add_argument("--k", type=int, default=6)
    s.add_argument("--sector", type=int, default=None)
    s.set_defaults(func=cmd_solve)
    sub.add_parser("alpha", parents=[common], help="alpha and E1 at one point").set_defaults(func=cmd_alpha)
    sub.add_parser("sweep", parents=[common], help="alpha and E1 along the [sweep]").set_defaults(func=cmd_sweep)
    e = sub.add_parser("entangle", parents=[common], help="E1 from a config, a given alpha, or the open-dot formula")
    e.add_argument("--alpha", type=float)
    e.add_argument("--qd", metavar="N,G0,G1,EPS0,EPS1")
    e.set_defaults(func=cmd_entangle)
    k = sub.add_parser("kernel", parents=[common], help="alpha from a tabulated cross-correlation spectrum")
    k.add_argument("spectrum")
    k.add_argument("--gamma", type=float, required=True)
    k.add_argument("--tau", type=float, default=None)
    k.add_argument("--means", type=float, nargs=2, required=True, metavar=("MEAN0", "MEAN1"))
    k.set_defaults(func=cmd_kernel)
    v = sub.add_parser("verify", parents=[common], help="run the oracle batteries")
    v.add_argument("--mutate", choices=("sign",), help="run on a mutated ladder (should fail)")
    v.add_argument("--only", nargs="+", help="battery names")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    needs_config = args.command in ("solve", "alpha", "sweep")
    if needs_config and not args.config:
        print(f"error: {args.command} needs --config", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
