"""Command-line front end.

    qspkan solve-phases --config cfg.json [--seed N] [--out DIR] [--quiet]
    qspkan sweep        --config cfg.json ...
    qspkan train        --config cfg.json ... [--wall-clock]
    qspkan eval         --config cfg.json ...

Configs are JSON documents with ``"schema_version": 1``; see docs/config.md.
Exit codes: 0 success, 1 usage/config error, 2 ran but did not converge.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np
from numpy.polynomial import chebyshev as C

from . import io
from .datasets import DatasetSpec, build_model, known_phases, make_dataset
from .errors import InvalidInput, QspKanError
from .qsp import SolverOptions, q_values, qsp_p, solve_phases
from .sim import make_rng
from .training import OptimizerConfig, mse_loss, model_outputs, train

EXIT_OK, EXIT_ERROR, EXIT_NO_CONVERGENCE = 0, 1, 2
PHASES_FILE = "phases.json"
SWEEP_FILE = "sweep.csv"
CHECKPOINT_FILE = "checkpoint.json"
CURVE_FILE = "training.csv"
EVAL_FILE = "eval.csv"


class _Ctx:
    def __init__(self, args, config: dict, base: Path):
        self.args = args
        self.config = config
        self.base = base
        self.out = Path(args.out)
        seed = config.get("seed", 0) if args.seed is None else args.seed
        self.seed = int(seed)

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base / p

    def say(self, msg: str):
        if not self.args.quiet:
            print(msg)


def _load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc.msg})") from exc
    if not isinstance(cfg, dict):
        raise InvalidInput(f"{path}: config must be a JSON object")
    version = cfg.get("schema_version")
    if version != io.CONFIG_SCHEMA_VERSION:
        raise InvalidInput(f"{path}: unsupported schema_version {version!r}")
    return cfg


def parse_target(spec: str, base: Path = Path(".")):
    """``chebyshev:d``, ``poly:c0,c1,...`` (monomial, lowest first) or ``table:file.csv``."""
    kind, _, arg = spec.partition(":")
    if kind == "chebyshev":
        d = int(arg)
        if d < 0:
            raise InvalidInput("chebyshev degree must be non-negative")
        coef = np.zeros(d + 1)
        coef[d] = 1.0
        return lambda a: C.chebval(a, coef)
    if kind == "poly":
        coef = np.array([float(c) for c in arg.split(",") if c.strip()])
        if coef.size == 0:
            raise InvalidInput("poly target needs at least one coefficient")
        return lambda a: np.polynomial.polynomial.polyval(a, coef)
    if kind == "table":
        path = Path(arg) if Path(arg).is_absolute() else base / arg
        pts = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                try:
                    pts.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    continue
        if len(pts) < 2:
            raise InvalidInput(f"{path}: table target needs at least two (a, value) rows")
        pts.sort()
        xs, ys = np.array(pts).T
        return lambda a: np.interp(a, xs, ys)
    raise InvalidInput(f"unknown target {spec!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_solve_phases(ctx: _Ctx) -> int:
    cfg = ctx.config
    target_spec = cfg["target"]
    degree = int(cfg["degree"])
    solver = dict(cfg.get("solver", {}))
    solver["seed"] = ctx.seed
    opts = SolverOptions(**solver)
    phases, report = solve_phases(parse_target(target_spec, ctx.base), degree, cfg.get("grid_size"), opts)
    io.save_phases(ctx.out / PHASES_FILE, phases, report.to_dict(), target_spec, degree)
    ctx.say(f"residual_max={report.residual_max:.3e} converged={report.converged}")
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _sweep_grid(grid: dict) -> np.ndarray:
    if "values" in grid:
        return np.asarray(grid["values"], dtype=float)
    n = int(grid.get("points", 101))
    if n < 1:
        raise InvalidInput("grid needs at least one point")
    lo, hi = float(grid.get("lo", -1.0)), float(grid.get("hi", 1.0))
    return np.array([hi]) if n == 1 else np.linspace(lo, hi, n)


def cmd_sweep(ctx: _Ctx) -> int:
    phases = io.load_phases(ctx.path(ctx.config["phases"]))
    a = _sweep_grid(ctx.config.get("grid", {}))
    p = qsp_p(phases, a)
    q = q_values(phases, a)
    resid = np.abs(p) ** 2 + (1 - a ** 2) * np.abs(q) ** 2 - 1
    rows = zip(a, p.real, p.imag, np.abs(p) ** 2, resid)
    io.write_csv(ctx.out / SWEEP_FILE, ["a", "re_p", "im_p", "prob", "identity_residual"], rows)
    ctx.say(f"{a.size} points, max |identity_residual| = {np.max(np.abs(resid)):.3e}")
    return EXIT_OK


def _dataset_spec(d: dict, seed: int) -> DatasetSpec:
    d = dict(d)
    d.setdefault("seed", seed)
    return DatasetSpec(**d)


def _initial_params(model, init: dict, seed: int, data_spec: DatasetSpec) -> np.ndarray:
    kind = init.get("kind", "gaussian")
    sigma = float(init.get("sigma", 0.3))
    noise = make_rng(np.random.SeedSequence([int(init.get("seed", seed)), 1])).normal(0.0, sigma, model.num_params)
    if kind == "zeros":
        return np.zeros(model.num_params)
    if kind == "gaussian":
        return noise
    if kind == "perturb-known":
        if data_spec.generator != "realizable-by-known-phases":
            raise InvalidInput("perturb-known init needs the realizable-by-known-phases dataset")
        return known_phases(model, data_spec.seed) + noise
    raise InvalidInput(f"unknown init kind {kind!r}")


def cmd_train(ctx: _Ctx) -> int:
    cfg = ctx.config
    model = build_model(cfg["model"])
    data_spec = _dataset_spec(cfg.get("dataset", {}), ctx.seed)
    data = make_dataset(data_spec, model)
    opt_cfg = dict(cfg.get("optimizer", {}))
    opt_cfg["seed"] = ctx.seed
    opt = OptimizerConfig(**opt_cfg)
    model = model.with_params(_initial_params(model, cfg.get("init", {}), ctx.seed, data_spec))
    clock = time.perf_counter if ctx.args.wall_clock else None
    trained, records = train(model, data, opt, clock=clock)
    final = mse_loss(trained, data)
    io.write_csv(ctx.out / CURVE_FILE, ["iteration", "loss", "grad_norm", "elapsed"],
                 ((r.iteration, r.loss, r.grad_norm, r.elapsed) for r in records))
    io.save_checkpoint(ctx.out / CHECKPOINT_FILE, trained, target_dim=data.target_dim, config=opt.to_dict(),
                       seed=ctx.seed, dataset=data_spec.to_dict(), final_loss=final,
                       iterations=records[-1].iteration)
    ctx.say(f"initial loss {records[0].loss:.6e}, final loss {final:.6e}, {records[-1].iteration} iterations")
    target_loss = cfg.get("target_loss")
    if target_loss is not None and final > float(target_loss):
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_eval(ctx: _Ctx) -> int:
    model, doc = io.load_checkpoint(ctx.path(ctx.config["checkpoint"]))
    ds = ctx.config.get("dataset", doc["dataset"])
    if ds.get("generator") == "file" and "path" in ds:
        ds = dict(ds, path=str(ctx.path(ds["path"])))
    data = make_dataset(_dataset_spec(ds, doc["seed"]), model)
    if data.target_dim != doc["target_dim"]:
        raise InvalidInput(f"checkpoint was trained on {doc['target_dim']} targets, dataset has {data.target_dim}")
    mse_loss(model, data)  # validates the pairing
    T = data.target_dim
    out = model_outputs(model, data.X)[:, :T]
    sq = np.mean((out - data.Y) ** 2, axis=1)
    header = ([f"x{i}" for i in range(data.input_dim)] + [f"y{i}" for i in range(T)]
              + [f"t{i}" for i in range(T)] + ["sq_error"])
    rows = (list(x) + list(y) + list(t) + [e] for x, y, t, e in zip(data.X, out, data.Y, sq))
    io.write_csv(ctx.out / EVAL_FILE, header, rows)
    ctx.say(f"{data.num_samples} samples, mean squared error {np.mean(sq):.6e}")
    return EXIT_OK


COMMANDS = {
    "solve-phases": cmd_solve_phases,
    "sweep": cmd_sweep,
    "train": cmd_train,
    "eval": cmd_eval,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qspkan", description="QSP-based quantum KAN simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--quiet", action="store_true")
        if name == "train":
            p.add_argument("--wall-clock", action="store_true",
                           help="record real elapsed seconds (breaks byte-reproducibility)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        config = _load_config(args.config)
        ctx = _Ctx(args, config, Path(args.config).resolve().parent)
        ctx.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](ctx)
    except (QspKanError, KeyError, TypeError, ValueError, OSError) as exc:
        kind = type(exc).__name__
        msg = f"missing config key {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"error: {kind}: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
