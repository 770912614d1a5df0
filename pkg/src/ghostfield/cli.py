"""Command-line front end.

Every command writes a JSON run record (``<command>.json`` in
``--output-dir``) and prints a short summary.  ``sweep`` also writes
``sweep.csv``.  Exit codes: 0 success, 2 bad configuration or usage,
3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .dynamics import (
    brute_force_mode_phase,
    build_mode_hamiltonian,
    closed_form_mode_phase,
    constrained_state,
    ghost_null_expectations,
)
from .errors import ConfigError, ConvergenceError, DomainError, TruncationError
from .fock import FockSpace
from .interference import (
    branch_phase_matrix,
    entanglement_witness,
    heisenberg_CA_expectation,
    relative_phase,
    tomography_without_closing,
)
from .quadrature import QuadratureSpec, analytic_phase, coulomb_phase
from .units import Configuration, mode_frequency, source_amplitude

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3

COMMANDS = ("phase", "modes", "heisenberg", "tomography", "entangle", "sweep", "selftest")
SWEEP_COLUMNS = ("param", "R", "t", "phase_numeric", "phase_analytic", "rel_err", "est_error")
THREADS_ENV = "GHOSTFIELD_THREADS"

_CONFIG_KEYS = {
    "coupling": str,
    "q": float,
    "m": float,
    "ra": str,
    "rb": str,
    "t": float,
    "k_min": float,
    "k_max": float,
    "n_nodes": int,
    "scheme": str,
    "tail": str,
}
_REQUIRED = ("coupling", "ra", "rb", "t")


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_digest: str
    spec: dict
    results: dict
    tool_version: str
    timestamp: str

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config_digest": self.config_digest,
            "spec": self.spec,
            "results": self.results,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
        }


# ---------------------------------------------------------------------------
# configuration


def parse_vectors(text: str, name: str) -> list:
    """``"x,y,z"`` or ``"x,y,z; x,y,z"`` to a list of 3-tuples."""
    out = []
    for part in str(text).split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            vec = tuple(float(v) for v in part.split(","))
        except ValueError:
            raise ConfigError(f"{name}: malformed vector {part!r}") from None
        if len(vec) != 3 or not all(math.isfinite(v) for v in vec):
            raise ConfigError(f"{name}: expected three finite components, got {part!r}")
        out.append(vec)
    if not out:
        raise ConfigError(f"{name}: no position given")
    return out


def read_config_file(path) -> dict:
    """Raw ``key=value`` pairs with types checked; unknown keys are errors."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from None
    return values


def build_config(values: dict):
    """Validated ``(Configuration, QuadratureSpec)`` from merged raw values."""
    missing = [k for k in _REQUIRED if values.get(k) is None]
    if values.get("q") is None and values.get("m") is None:
        missing.append("q")
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    if values.get("q") is not None and values.get("m") is not None:
        raise ConfigError("give either q or m, not both")
    charge = values["q"] if values.get("q") is not None else values["m"]
    config = Configuration(
        coupling=values["coupling"],
        charge=charge,
        positions_a=parse_vectors(values["ra"], "ra"),
        positions_b=parse_vectors(values["rb"], "rb"),
        time=values["t"],
    )
    spec_kw = {k: values[k] for k in ("k_min", "k_max", "n_nodes", "scheme", "tail") if values.get(k) is not None}
    try:
        spec = QuadratureSpec(**spec_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config, spec


def parse_config(path):
    """Read a flat ``key=value`` file into ``(Configuration, QuadratureSpec)``."""
    return build_config(read_config_file(path))


def config_record(config: Configuration) -> dict:
    return {
        "coupling": config.coupling.value,
        "charge": config.charge,
        "positions_a": [r.tolist() for r in config.positions_a],
        "positions_b": [r.tolist() for r in config.positions_b],
        "time": config.time,
    }


def digest(payload) -> str:
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def to_jsonable(value):
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


# ---------------------------------------------------------------------------
# commands


def cmd_phase(config, spec, args):
    bpm = branch_phase_matrix(config, spec)
    rows = []
    for a, ra in enumerate(config.positions_a):
        for b, rb in enumerate(config.positions_b):
            res = coulomb_phase(config, ra, rb, spec, rtol=args.rtol)
            R = float(np.linalg.norm(ra - rb))
            exact = analytic_phase(config, R)
            rows.append({
                "branch_a": a,
                "branch_b": b,
                "R": R,
                "phase": res.phase,
                "phase_analytic": exact,
                "rel_err": abs(res.phase - exact) / exact if exact else abs(res.phase),
                "est_error": res.est_error,
                "subtracted_constant": res.subtracted_constant,
                "k_max": res.k_max,
            })
    results = {"kappa": config.kappa, "phase": rows[0]["phase"], "pairs": rows,
               "phase_matrix": bpm.phases}
    summary = [f"pair ({r['branch_a']},{r['branch_b']}) R={r['R']:.6g}: phase={r['phase']:.10g} "
               f"analytic={r['phase_analytic']:.10g} rel_err={r['rel_err']:.2e}" for r in rows]
    return results, summary


def cmd_modes(config, spec, args):
    rep = FockSpace(args.n_max)
    ra, rb = config.positions_a[0], config.positions_b[0]
    axis = (rb - ra) / np.linalg.norm(rb - ra)
    rows = []
    for k in args.k:
        k_vec = k * axis
        eta = source_amplitude(k_vec, [ra, rb], config)
        mode = build_mode_hamiltonian(k, eta, rep, config.units)
        state = constrained_state(eta, rep)
        brute = brute_force_mode_phase(mode, state, config.time)
        closed = closed_form_mode_phase(k, eta, config.time, config.units)
        quad, number = ghost_null_expectations(mode, state, config.time)
        rows.append({
            "k": float(k),
            "omega": float(mode_frequency(k, config.units)),
            "eta": complex(eta),
            "phase_closed_form": closed,
            "phase_brute_force": brute.phase,
            "phase_diff": abs(math.remainder(brute.phase - closed, 2 * math.pi)),
            "modulus": brute.modulus,
            "ghost_quadrature": quad,
            "ghost_number": number,
        })
    summary = [f"k={r['k']:.4g}: |eta|={abs(r['eta']):.4g} phase={r['phase_closed_form']:.10g} "
               f"brute-force diff={r['phase_diff']:.1e} ghost nulls=({r['ghost_quadrature']:.1e}, "
               f"{r['ghost_number']:.1e})" for r in rows]
    return {"n_max": args.n_max, "modes": rows}, summary


def cmd_heisenberg(config, spec, args):
    res = heisenberg_CA_expectation(config, spec, n_max=args.n_max)
    rel = relative_phase(config, spec)
    results = {
        "value": res.value,
        "extracted_phase": res.extracted_phase,
        "visibility": res.visibility,
        "field_overlap": res.field_overlap,
        "tail_phase": res.tail_phase,
        "n_modes": res.n_modes,
        "relative_phase": rel,
        "rel_diff": abs(res.extracted_phase - rel) / max(abs(rel), 1e-3),
    }
    summary = [f"extracted phase {res.extracted_phase:.10g} vs relative phase {rel:.10g} "
               f"(visibility {res.visibility:.6g}, {res.n_modes} modes)"]
    return results, summary


def cmd_tomography(config, spec, args):
    exact = relative_phase(config, spec)
    n = None if args.n_samples <= 0 else args.n_samples
    est = tomography_without_closing(config, spec, noise_seed=args.seed, n_samples=n)
    sigma = float("nan") if n is None else 1.0 / math.sqrt(n)
    results = {"estimate": est, "relative_phase": exact, "n_samples": n, "seed": args.seed, "sigma": sigma}
    return results, [f"estimate {est:.6g} (exact {exact:.6g}, sigma ~ {sigma:.2g})"]


def cmd_entangle(config, spec, args):
    bpm = branch_phase_matrix(config, spec)
    wit = entanglement_witness(config, spec)
    results = {"negativity": wit.negativity, "concurrence": wit.concurrence,
               "delta": bpm.delta, "phase_matrix": bpm.phases}
    return results, [f"concurrence {wit.concurrence:.10g} negativity {wit.negativity:.10g} "
                     f"delta {bpm.delta:.6g}"]


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n


def sweep_points(config, R_values, t_values):
    ra = config.positions_a[0]
    swept = [name for name, vals in (("R", R_values), ("t", t_values)) if len(vals) > 1] or ["R"]
    label = ",".join(swept)
    return [(label, float(R), float(t), config.with_(positions_a=[ra], positions_b=[ra + np.array([R, 0.0, 0.0])],
                                                       time=t))
            for R in R_values for t in t_values]


def _sweep_row(point, spec):
    label, R, t, cfg = point
    res = coulomb_phase(cfg, cfg.positions_a[0], cfg.positions_b[0], spec)
    exact = analytic_phase(cfg, R)
    rel = abs(res.phase - exact) / exact if exact else abs(res.phase)
    return {"param": label, "R": R, "t": t, "phase_numeric": res.phase,
            "phase_analytic": exact, "rel_err": rel, "est_error": res.est_error}


def cmd_sweep(config, spec, args):
    R_values = args.R or [float(np.linalg.norm(config.positions_a[0] - config.positions_b[0]))]
    t_values = args.t_values or [config.time]
    points = sweep_points(config, R_values, t_values)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = list(pool.map(lambda p: _sweep_row(p, spec), points))
    csv_path = Path(args.output_dir) / "sweep.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    worst = max(r["rel_err"] for r in rows)
    return {"rows": rows, "csv": csv_path.name}, [f"{len(rows)} points, worst rel_err {worst:.2e}, wrote {csv_path}"]


def cmd_selftest(config, spec, args):
    from .selftest import run_selftest

    checks = run_selftest()
    results = {"checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in checks],
               "all_passed": all(ok for _, ok, _ in checks)}
    summary = [f"{'PASS' if ok else 'FAIL'} {n}: {d}" for n, ok, d in checks]
    return results, summary


_HANDLERS = {
    "phase": cmd_phase,
    "modes": cmd_modes,
    "heisenberg": cmd_heisenberg,
    "tomography": cmd_tomography,
    "entangle": cmd_entangle,
    "sweep": cmd_sweep,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# argument parsing


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help="flat key=value configuration file")
    g.add_argument("--coupling", choices=["em", "gravity"])
    g.add_argument("--q", type=float, help="charge (em) or mass (gravity)")
    g.add_argument("--m", type=float, help="mass; alias of --q for gravity runs")
    g.add_argument("--ra", action="append", help="position of A as x,y,z; repeat for a superposition")
    g.add_argument("--rb", action="append", help="position of B as x,y,z; repeat for a superposition")
    g.add_argument("--t", type=float, help="interaction time")
    q = common.add_argument_group("quadrature")
    q.add_argument("--k-min", type=float)
    q.add_argument("--k-max", type=float)
    q.add_argument("--n-nodes", type=int)
    q.add_argument("--scheme", choices=["composite-gauss", "tanh-sinh"])
    q.add_argument("--tail", choices=["none", "analytic-sine-integral"])
    o = common.add_argument_group("output")
    o.add_argument("--output-dir", default=".", help="directory for the JSON record and CSV")
    o.add_argument("--print-json", action="store_true", help="print the JSON record instead of the summary")

    parser = argparse.ArgumentParser(prog="ghostfield", description="Coulomb phases from the scalar mode.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("phase", parents=[common], help="Coulomb phase for every branch pair")
    p.add_argument("--rtol", type=float, help="fail with exit 3 if est_error > rtol * |phase|")
    p = sub.add_parser("modes", parents=[common], help="single-mode brute-force checks")
    p.add_argument("--k", type=_float_list, default=[1.0], help="comma-separated |k| values")
    p.add_argument("--n-max", type=int, default=48)
    p = sub.add_parser("heisenberg", parents=[common], help="C_A(t) cross term")
    p.add_argument("--n-max", type=int, default=24)
    p = sub.add_parser("tomography", parents=[common], help="sampled phase tomography")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-samples", type=int, default=10_000, help="0 for the exact limit")
    sub.add_parser("entangle", parents=[common], help="negativity and concurrence")
    p = sub.add_parser("sweep", parents=[common], help="phase against R and t, written as CSV")
    p.add_argument("--R", type=_float_list, help="comma-separated separations")
    p.add_argument("--t-values", type=_float_list, help="comma-separated times")
    sub.add_parser("selftest", parents=[common], help="oracle-equivalence checks")
    return parser


def _merged_values(args) -> dict:
    values = read_config_file(args.config) if args.config else {}
    overrides = {
        "coupling": args.coupling,
        "q": args.q,
        "m": args.m,
        "ra": ";".join(args.ra) if args.ra else None,
        "rb": ";".join(args.rb) if args.rb else None,
        "t": args.t,
        "k_min": args.k_min,
        "k_max": args.k_max,
        "n_nodes": args.n_nodes,
        "scheme": args.scheme,
        "tail": args.tail,
    }
    for key, value in overrides.items():
        if value is not None:
            if key in ("q", "m"):
                values.pop("q", None)
                values.pop("m", None)
            values[key] = value
    return values


_DEFAULT_SELFTEST = {"coupling": "em", "q": 1.0, "ra": "0,0,0", "rb": "1,0,0", "t": 1.0}


def run_command(argv: Optional[Sequence[str]] = None, now: Optional[str] = None) -> int:
    """Run one command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        values = _merged_values(args)
        if args.command == "selftest":
            values = {**_DEFAULT_SELFTEST, **values}
        config, spec = build_config(values)
        out_dir = Path(args.output_dir)
        if not out_dir.is_dir():
            raise ConfigError(f"output directory {out_dir} does not exist")
        results, summary = _HANDLERS[args.command](config, spec, args)
    except (ConfigError, DomainError) as exc:
        print(f"ghostfield: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, TruncationError) as exc:
        print(f"ghostfield: numerical failure: {exc}", file=sys.stderr)
        extra = getattr(exc, "diagnostics", None) or {"residual": getattr(exc, "residual", None)}
        print(json.dumps(to_jsonable(extra), sort_keys=True), file=sys.stderr)
        return EXIT_CONVERGENCE

    echo = {"config": config_record(config), "quadrature": spec.as_dict()}
    options = {k: v for k, v in sorted(vars(args).items())
               if k not in ("config", "output_dir", "print_json") and k not in _CONFIG_ARG_NAMES}
    manifest = RunManifest(
        command=args.command,
        config_digest=digest({"command": args.command, **echo, "options": to_jsonable(options)}),
        spec=echo,
        results=to_jsonable(results),
        tool_version=__version__,
        timestamp=now or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    body = json.dumps(manifest.as_dict(), indent=2, allow_nan=True) + "\n"
    (out_dir / f"{args.command}.json").write_text(body, encoding="utf-8")
    if args.print_json:
        sys.stdout.write(body)
    else:
        for line in summary:
            print(line)
    if args.command == "selftest" and not results["all_passed"]:
        return EXIT_CONVERGENCE
    return EXIT_OK


_CONFIG_ARG_NAMES = {"coupling", "q", "m", "ra", "rb", "t", "k_min", "k_max", "n_nodes", "scheme", "tail", "command"}


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run_command(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
