"""Command line: validate, lmr-grid, lemma-check, construct, forward, roundtrip, report.

Every flag can also be set through an environment variable SLITLOEWNER_<FLAG>
(for example SLITLOEWNER_ACCURACY=1e-7); explicit flags win.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fixtures, geometry
from .bangbang import ConstantCoeffSolution, construct, normalization_error
from .lmr_oracle import FloorReached, LmrOracle, lemma_ratio, monotone_differences, random_quadruples
from .loewner import regenerate_traces, roundtrip_report, solve_forward

ENV_PREFIX = "SLITLOEWNER_"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    input: str | None = None
    out: str = "out"
    accuracy: float = 1e-6
    max_level: int = 6
    lambda_tol: float = 1e-3
    steps: int = 128
    fixture: str | None = None
    resolution: int | None = None
    grid: int = 33
    seed: int = 0

    def __post_init__(self):
        if not (self.accuracy > 0 and self.lambda_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_level < 2:
            raise ValueError("max level exponent must be >= 2")
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        if (self.input is None) == (self.fixture is None):
            raise ValueError("give exactly one of --input and --fixture")

    def digest(self):
        """Hash of everything that affects results (the output directory does not)."""
        fields = dataclasses.asdict(self)
        fields.pop("out")
        if self.input is not None:
            fields["input"] = hashlib.sha256(Path(self.input).read_bytes()).hexdigest()
        blob = json.dumps(fields, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def provenance(config: RunConfig, command: str):
    import numba
    import scipy
    from importlib.metadata import PackageNotFoundError, version
    try:
        own = version("artifact")
    except PackageNotFoundError:
        own = "unknown"
    return {"command": command, "config_hash": config.digest(), "format": FORMAT_VERSION,
            "versions": {"slitloewner": own, "numpy": np.__version__,
                         "scipy": scipy.__version__, "numba": numba.__version__}}


# -- output helpers ------------------------------------------------------------------

def _fmt(x):
    return repr(float(x))


def write_csv(path, header, rows, prov):
    buf = io.StringIO()
    buf.write("# " + json.dumps(prov, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    Path(path).write_text(buf.getvalue())


def read_csv(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def write_json(path, payload, prov):
    Path(path).write_text(json.dumps({"provenance": prov, **payload}, sort_keys=True, indent=2,
                                     allow_nan=False) + "\n")


def _clean(x):
    """Replace non-finite floats for strict JSON."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if np.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


# -- commands -------------------------------------------------------------------------

def load_system(config: RunConfig):
    if config.fixture is not None:
        return fixtures.get(config.fixture)
    return geometry.loads(Path(config.input).read_text())


def _oracle(config, system):
    return LmrOracle(system, accuracy=config.accuracy, resolution=config.resolution)


def cmd_validate(config, out):
    system = load_system(config)
    problems = geometry.validate(system)
    write_json(out / "validate.json", {"violations": problems, "valid": not problems},
               provenance(config, "validate"))
    return 0 if not problems else 3


def cmd_lmr_grid(config, out):
    oracle = _oracle(config, load_system(config))
    if oracle.m != 2:
        raise ValueError("lmr-grid needs a two-slit system")
    f = np.linspace(0.0, 1.0, config.grid)
    G = oracle.grid(f, f)
    rows = [(float(f[i]), float(f[j]), float(G[i, j])) for i in range(len(f)) for j in range(len(f))]
    write_csv(out / "lmr_grid.csv", ["f1", "f2", "lmr"], rows, provenance(config, "lmr-grid"))
    return 0


def cmd_lemma_check(config, out):
    oracle = _oracle(config, load_system(config))
    if oracle.m != 2:
        raise ValueError("lemma-check needs a two-slit system")
    f = np.linspace(0.0, 1.0, config.grid)
    G = oracle.grid(f, f)
    d0, d1 = monotone_differences(G)
    payload = {"grid": config.grid, "min_difference": [d0, d1], "monotone": bool(d0 > 0 and d1 > 0)}
    try:
        delta, dev = oracle.continuity_modulus(0.25)
        rng = np.random.default_rng(config.seed)
        ratios = [lemma_ratio(oracle, q) for q in random_quadruples(rng, delta, 200)]
        payload.update(delta=delta, grid_deviation=dev, ratio_min=min(ratios), ratio_max=max(ratios),
                       ratios_ok=bool(0.75 < min(ratios) and max(ratios) < 1.25), floor_reached=False)
    except FloorReached as exc:
        payload.update(delta=None, floor_reached=True, message=str(exc))
    write_json(out / "lemma_check.json", _clean(payload), provenance(config, "lemma-check"))
    return 0


def _sidecar_path(out):
    return out / "construct.json"


def cmd_construct(config, out):
    system = load_system(config)
    oracle = _oracle(config, system)
    sol = construct(oracle, max_level=config.max_level, min_level=config.max_level,
                    lambda_tol=config.lambda_tol)
    prov = provenance(config, "construct")
    m = sol.m
    header = ["t"] + [f"u_{k + 1}" for k in range(m)] + \
        [c for k in range(m) for c in (f"xi_{k + 1}_re", f"xi_{k + 1}_im")]
    rows = []
    for i, t in enumerate(sol.times):
        row = [float(t)] + [float(sol.u_tables[k, i]) for k in range(m)]
        for k in range(m):
            row += [float(sol.xi_tables[k, i].real), float(sol.xi_tables[k, i].imag)]
        rows.append(row)
    write_csv(out / "construct.csv", header, rows, prov)
    side = {"lambda": [float(x) for x in sol.lam], "L": float(sol.L), "levels": sol.trace(),
            "converged": sol.converged, "stall": sol.stall, "schedule": sol.schedule,
            "resolution": oracle.resolution,
            "normalization_error": normalization_error(oracle, sol),
            "system": geometry.to_dict(system)}
    write_json(_sidecar_path(out), _clean(side), prov)
    return 0


def load_solution(out):
    side = json.loads(_sidecar_path(out).read_text())
    header, rows = read_csv(out / "construct.csv")
    data = np.array(rows, dtype=float)
    m = len(side["lambda"])
    times = data[:, 0]
    u = data[:, 1:1 + m].T
    xi = np.array([data[:, 1 + m + 2 * k] + 1j * data[:, 2 + m + 2 * k] for k in range(m)])
    return side, ConstantCoeffSolution(np.array(side["lambda"]), float(side["L"]), times, u, xi,
                                       schedule=side.get("schedule", "dyadic"))


def _require_sidecar(out):
    if not _sidecar_path(out).exists():
        raise FileNotFoundError(f"{_sidecar_path(out)} missing; run construct first")


def cmd_forward(config, out):
    _require_sidecar(out)
    side, sol = load_solution(out)
    tr = regenerate_traces(sol.lam, sol.times, sol.xi_tables, config.steps)
    rows = []
    dt = sol.L / config.steps
    for k, trace in enumerate(tr.traces):
        for i, z in enumerate(trace):
            rows.append((k, float(i * dt), float(z.real), float(z.imag)))
    prov = provenance(config, "forward")
    write_csv(out / "traces.csv", ["slit", "t", "re", "im"], rows, prov)
    fwd = solve_forward(sol.lam, sol.times, sol.xi_tables, sol.L)
    write_json(out / "forward.json", _clean({
        "steps": config.steps, "derivative_law_error": fwd.derivative_law_error(),
        "h_at_0_max": float(np.max(np.abs(fwd.origin_path))),
        "scale": [tr.scale(k) for k in range(len(tr.traces))]}), prov)
    return 0


def cmd_roundtrip(config, out):
    _require_sidecar(out)
    side, sol = load_solution(out)
    system = geometry.from_dict(side["system"])
    oracle = _oracle(config, system)
    rep = roundtrip_report(system, sol, config.steps, oracle=oracle)
    write_json(out / "roundtrip.json", _clean(rep.to_dict()), provenance(config, "roundtrip"))
    return 0 if rep.ok else 4


def cmd_report(config, out):
    parts = {}
    for name in ("validate", "lemma_check", "construct", "forward", "roundtrip"):
        p = out / f"{name}.json"
        if p.exists():
            data = json.loads(p.read_text())
            data.pop("provenance", None)
            data.pop("system", None)
            parts[name] = data
    if not parts:
        raise FileNotFoundError(f"no artifacts in {out}")
    write_json(out / "report.json", parts, provenance(config, "report"))
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "lmr-grid": cmd_lmr_grid,
    "lemma-check": cmd_lemma_check,
    "construct": cmd_construct,
    "forward": cmd_forward,
    "roundtrip": cmd_roundtrip,
    "report": cmd_report,
}


def build_parser():
    p = argparse.ArgumentParser(prog="slitloewner", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--accuracy", type=float)
    p.add_argument("--max-level", type=int)
    p.add_argument("--lambda-tol", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--fixture", choices=sorted(fixtures.FIXTURES))
    p.add_argument("--resolution", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int)
    return p


def config_from(args, env=None):
    env = os.environ if env is None else env
    kw = {}
    for f in dataclasses.fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is None:
            raw = env.get(ENV_PREFIX + f.name.upper())
            if raw is not None:
                typ = {"accuracy": float, "lambda_tol": float, "max_level": int, "steps": int,
                       "resolution": int, "grid": int, "seed": int}.get(f.name, str)
                val = typ(raw)
        if val is not None:
            kw[f.name] = val
    return RunConfig(**kw)


def run(command, config: RunConfig):
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return COMMANDS[command](config, out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = config_from(args)
        return run(args.command, config)
    except Exception as exc:     # every module error becomes machine-readable output
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        feature = getattr(exc, "feature", None)
        if feature is not None:
            err["feature"] = feature
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
