"""Command-line front end: ``todacurve --command {generate,verify,expand,simulate,invariants}``.

Exit status is 0 when every check passes, 1 when a check fails (or a
simulation hits a degenerate state) and 2 on configuration errors.
Verbosity follows the ``TODA_CURVE_LOG`` environment variable
(``quiet``, ``info`` or ``debug``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from . import brackets, dynamics, flows
from .curves import CurveState, compute_invariants, generate_curve, monodromy, lax_matrices, perturbed_polygon
from .errors import TodaCurveError

log = logging.getLogger("todacurve")

COMMANDS = ("generate", "verify", "expand", "simulate", "invariants")
PRESETS = ("hexagon", "polygon")

# default tolerances of the verification suite, overridden by --tol
TOLERANCES = {
    "induced_bracket": 1e-9,
    "gradients_fd": 1e-6,
    "lambda_grade": 1e-9,
    "jacobi": 1e-9,
    "zero_curvature": 1e-9,
    "monodromy_identity": 1e-9,
}
PENCIL_T = (0.5, 2.0)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "verify"
    n: int = 6
    lambdas: list = field(default_factory=lambda: [0.0, 1.0, -1.0])
    seed: int = 0
    trials: int = 10
    tol: float | None = None
    t_end: float = 1.0
    dt: float = 1e-3
    out: str | None = None
    format: str = "json"
    preset: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.n < 1:
            raise ConfigError("--n must be at least 1")
        if self.seed < 0:
            raise ConfigError("--seed must be non-negative")
        if self.trials < 1:
            raise ConfigError("--trials must be at least 1")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.command == "simulate" and not self.dt > 0:
            raise ConfigError("--dt must be positive")
        if self.t_end < 0:
            raise ConfigError("--t-end must be non-negative")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.command in ("verify", "expand") and self.site_count <= 3:
            raise ConfigError(
                f"bracket checks need N > 3 sites (got N={self.site_count}); "
                "the closed-form relations only make sense for N > 3")

    @property
    def site_count(self) -> int:
        return 6 if self.preset == "hexagon" else self.n

    def tolerance(self, name: str) -> float:
        return self.tol if self.tol is not None else TOLERANCES[name]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="todacurve", description=__doc__.splitlines()[0])
    p.add_argument("--command", choices=COMMANDS, default="verify")
    p.add_argument("--n", type=int, default=6, help="number of curve vertices")
    p.add_argument("--lambda", dest="lambdas", type=float, action="append",
                   help="spectral parameter; repeatable (default 0, 1, -1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10,
                   help="verify: number of consecutive seeds starting at --seed")
    p.add_argument("--tol", type=float, default=None,
                   help="override every check tolerance")
    p.add_argument("--t-end", dest="t_end", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--preset", choices=PRESETS, default=None,
                   help="hexagon: regular hexagon; polygon: jittered regular n-gon")
    return p


def parse_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(ns).items() if k != "lambdas"})
    if ns.lambdas:
        cfg.lambdas = list(ns.lambdas)
    return cfg


def initial_curve(cfg: RunConfig, seed: int | None = None) -> CurveState:
    seed = cfg.seed if seed is None else seed
    if cfg.preset == "polygon":
        return perturbed_polygon(cfg.n, seed)
    return generate_curve(cfg.n, seed, preset=cfg.preset)


def random_fm_state(n: int, seed: int) -> brackets.FMState:
    rng = np.random.default_rng(seed)
    return brackets.FMState(rng.uniform(0.5, 2.0, n), rng.uniform(-1.0, 1.0, n))


# ---------------------------------------------------------------------------
# commands


def _check(name, value, tol):
    value = float(value)
    return {"name": name, "value": value, "tol": tol, "pass": bool(value < tol)}


def run_verify(cfg: RunConfig) -> dict:
    checks = []
    seeds = range(cfg.seed, cfg.seed + cfg.trials) if cfg.preset != "hexagon" else [cfg.seed]
    for seed in seeds:
        c = initial_curve(cfg, seed)
        tag = f"seed={seed}"
        log.info("verifying %s (N=%d)", tag, c.n)
        for lam in cfg.lambdas:
            r = brackets.verify_theorem2(c, lam, cfg.tolerance("induced_bracket"))
            checks.append(_check(f"induced_bracket[{tag},lambda={lam:g}]", r.max_rel, cfg.tolerance("induced_bracket")))
        an = brackets.fm_gradients(c).stacked
        fd = brackets.fd_gradients(c).stacked
        grad_dev = (np.abs(an - fd).max(axis=1) / np.abs(an).max(axis=1)).max()
        checks.append(_check(f"gradients_fd[{tag}]", grad_dev, cfg.tolerance("gradients_fd")))
        graded = brackets.lambda_grade(c, cfg.tolerance("lambda_grade"))
        worst = max(max(graded.deviation.values()), graded.reconstruction_deviation)
        checks.append(_check(f"lambda_grade[{tag}]", worst, cfg.tolerance("lambda_grade")))
        s = random_fm_state(c.n, seed)
        pencils = [("P1", brackets.P1), ("P2", brackets.P2), ("P3", brackets.P3)]
        pencils += [(f"P1+{t:g}P2+{t * t:g}P3", brackets.P1 + t * brackets.P2 + (t * t) * brackets.P3)
                    for t in PENCIL_T]
        for name, P in pencils:
            checks.append(_check(f"jacobi[{tag},{name}]", brackets.jacobi_residual(P, s),
                                 cfg.tolerance("jacobi")))
        rng = np.random.default_rng(seed)
        f = flows.FlowCoefficients(rng.normal(size=c.n), rng.normal(size=c.n))
        checks.append(_check(f"zero_curvature[{tag}]", flows.zero_curvature_residual(c, f),
                             cfg.tolerance("zero_curvature")))
        T = monodromy(lax_matrices(compute_invariants(c)))
        checks.append(_check(f"monodromy_identity[{tag}]", np.abs(T - np.eye(2)).max(),
                             cfg.tolerance("monodromy_identity")))
    return {"config": _config_dict(cfg), "checks": checks, "pass": all(ch["pass"] for ch in checks)}


def run_expand(cfg: RunConfig) -> dict:
    c = initial_curve(cfg)
    graded = brackets.lambda_grade(c, cfg.tolerance("lambda_grade"))
    n = c.n
    labels = [brackets.index_label(i, n) for i in range(2 * n)]
    return {
        "config": _config_dict(cfg),
        "labels": labels,
        "state": {"a": graded.state.a.tolist(), "b": graded.state.b.tolist()},
        "tables": {k: getattr(graded, k).values.tolist() for k in ("P1", "P2", "P3")},
        "checks": [_check(f"lambda_grade[{k}]", v, graded.tol) for k, v in graded.deviation.items()]
        + [_check("lambda_grade[reconstruction]", graded.reconstruction_deviation, graded.tol)],
        "pass": graded.passed,
    }


def run_invariants(cfg: RunConfig) -> dict:
    c = initial_curve(cfg)
    tr = dynamics.spectral_invariants(c, cfg.lambdas)
    return {"config": _config_dict(cfg), "lambdas": list(map(float, cfg.lambdas)),
            "trace": tr.tolist(), "pass": True}


def simulate_rows(cfg: RunConfig):
    """Header and rows of the (a, b) trajectory plus tr T at every configured lam."""
    c = initial_curve(cfg)
    sign = float(np.sign(np.prod(compute_invariants(c).g)))
    lam0 = cfg.lambdas[0]
    s0 = brackets.fm_map(c, lam0)
    traj = dynamics.integrate(s0, dynamics.ab_field, cfg.t_end, cfg.dt,
                              invariants=lambda s: dynamics.fm_spectral_invariants(s, cfg.lambdas, sign))
    n = c.n
    header = (["t"] + [f"a_{k}" for k in range(n)] + [f"b_{k}" for k in range(n)]
              + [f"trT_{lam:g}" for lam in cfg.lambdas])
    rows = [[t, *s.a, *s.b, *inv] for t, s, inv in zip(traj.times, traj.states, traj.invariant_log)]
    return header, rows, c


def run_simulate(cfg: RunConfig):
    header, rows, c = simulate_rows(cfg)
    if cfg.format == "csv":
        return header, rows
    rep = dynamics.consistency_check(c, cfg.lambdas[0], cfg.t_end, cfg.dt)
    return {"config": _config_dict(cfg), "columns": header, "rows": rows,
            "consistency": {"max_deviation": rep.max_deviation, "ranks": rep.ranks}, "pass": True}


def run_generate(cfg: RunConfig):
    c = initial_curve(cfg)
    if cfg.format == "csv":
        return ["k", "x", "y"], [[k, x, y] for k, (x, y) in enumerate(c.points)]
    return {"config": _config_dict(cfg), "n": c.n, "x": c.x.tolist(), "y": c.y.tolist(), "pass": True}


# ---------------------------------------------------------------------------
# output


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("out")
    return d


def render(result, fmt: str) -> str:
    if isinstance(result, tuple):
        header, rows = result
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([[repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r]
                      for r in rows])
        return buf.getvalue()
    if fmt == "csv" and "checks" in result:
        header = ["name", "value", "tol", "pass"]
        return render((header, [[ch[k] for k in header] for ch in result["checks"]]), "csv")
    return json.dumps(result, indent=2) + "\n"


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".todacurve-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _setup_logging():
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    name = os.environ.get("TODA_CURVE_LOG", "quiet").lower()
    logging.basicConfig(level=level.get(name, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


RUNNERS = {
    "generate": run_generate,
    "verify": run_verify,
    "expand": run_expand,
    "simulate": run_simulate,
    "invariants": run_invariants,
}


def main(argv=None) -> int:
    _setup_logging()
    try:
        cfg = parse_config(argv)
        cfg.validate()
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"todacurve: error: {exc}", file=sys.stderr)
        return 2
    try:
        result = RUNNERS[cfg.command](cfg)
    except TodaCurveError as exc:  # includes DegeneracyCrossing, which names the time
        print(f"todacurve: {exc}", file=sys.stderr)
        return 1
    text = render(result, cfg.format)
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)
    passed = result["pass"] if isinstance(result, dict) else True
    if not passed:
        failed = [ch["name"] for ch in result.get("checks", []) if not ch["pass"]]
        log.warning("%d check(s) failed: %s", len(failed), ", ".join(failed[:10]))
    return 0 if passed else 1


def entry():
    sys.exit(main())
