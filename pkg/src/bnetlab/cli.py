"""Command line: ``bnetlab simulate | curve | verify``.

Exit codes: 0 success / all verdicts pass, 1 verification failure or runtime
fault (e.g. a path reached the window edge), 2 usage or configuration error.

Every option can also come from a plain ``key=value`` file given with
``--config``; flags on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import config as cfg

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# option name -> (type, builtin default)
OPTIONS = {
    "beta": (float, None),
    "epsilon": (float, None),
    "half_width": (int, 30),
    "steps": (int, 20),
    "paths": (int, 5),
    "seed": (int, 0),
    "replicas": (int, None),
    "h": (float, None),
    "out": (str, "."),
    "k": (float, cfg.K_SIGMA),
    "budget": (str, "quick"),
    "svg": (bool, False),
    "svg_map": (str, "linear"),
    "tmin": (float, 0.1),
    "tmax": (float, 10.0),
    "eps": (float, 1.0),
    "s": (float, None),
}


@dataclass
class RunConfig:
    command: str
    target: str | None = None
    beta: float | None = None
    epsilon: float | None = None
    half_width: int = 30
    steps: int = 20
    paths: int = 5
    seed: int = 0
    replicas: int | None = None
    h: float | None = None
    out: str = "."
    k: float = cfg.K_SIGMA
    budget: str = "quick"
    svg: bool = False
    svg_map: str = "linear"
    tmin: float = 0.1
    tmax: float = 10.0
    eps: float = 1.0
    s: float | None = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.beta is not None and not 0.0 <= self.beta <= 1.0:
            raise UsageError(f"--beta must lie in [0, 1], got {self.beta}")
        if self.epsilon is None:
            self.epsilon = self.beta
        if self.epsilon is not None and not self.epsilon > 0 and self.command != "simulate":
            raise UsageError("--epsilon must be positive")
        if self.half_width < 1 or self.steps < 1:
            raise UsageError("--half-width and --steps must be positive")
        if self.paths < 1:
            raise UsageError("--paths must be positive")
        if self.replicas is not None and self.replicas < 2:
            raise UsageError("--replicas must be at least 2")
        if self.h is not None and not self.h > 0:
            raise UsageError("--h must be positive")
        if not self.k > 0:
            raise UsageError("--k must be positive")
        if self.budget not in cfg.BUDGETS:
            raise UsageError(f"--budget must be one of {sorted(cfg.BUDGETS)}")
        if self.svg_map not in ("linear", "theta"):
            raise UsageError("--svg-map must be linear or theta")
        if self.command == "curve":
            if not 0 < self.tmin < self.tmax:
                raise UsageError("need 0 < --tmin < --tmax")
            if self.steps < 2:
                raise UsageError("--steps must be at least 2 for a curve")
            if self.eps < 0:
                raise UsageError("--eps must be non-negative")
            if self.s is not None and not 0 < self.s <= self.tmin:
                raise UsageError("need 0 < --s <= --tmin")
        if self.seed < 0:
            raise UsageError("--seed must be non-negative")
        return self


def read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path) as f:
            lines = f.readlines()
    except OSError as e:
        raise UsageError(f"cannot read config file {path}: {e}") from None
    for i, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key=value")
        key, val = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise UsageError(f"{path}:{i}: unknown key {key!r}")
        out[key] = val
    return out


def _convert(key, val):
    typ = OPTIONS[key][0]
    if typ is bool:
        if isinstance(val, bool):
            return val
        low = str(val).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{key}: expected a boolean, got {val!r}")
    try:
        return typ(val)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {val!r} as {typ.__name__}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bnetlab", description="Branching-coalescing walks and the Brownian net.")
    p.add_argument("--config", help="key=value file with option defaults")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--config", help="key=value file with option defaults", dest="config_sub")

    sim = sub.add_parser("simulate", help="sample one arrow configuration and trace paths")
    common(sim)
    sim.add_argument("--beta", type=float)
    sim.add_argument("--epsilon", type=float)
    sim.add_argument("--half-width", type=int)
    sim.add_argument("--steps", type=int)
    sim.add_argument("--paths", type=int, help="number of forward and dual starting points")
    sim.add_argument("--svg", action="store_const", const=True)
    sim.add_argument("--svg-map", choices=["linear", "theta"])

    cur = sub.add_parser("curve", help="tabulate psi, Psi or the flux bound")
    common(cur)
    cur.add_argument("target", choices=["psi", "Psi", "flux"])
    cur.add_argument("--tmin", type=float)
    cur.add_argument("--tmax", type=float)
    cur.add_argument("--steps", type=int)
    cur.add_argument("--eps", type=float, help="starting distance for Psi")
    cur.add_argument("--s", type=float, help="lower limit of the flux integral (default tmin)")

    ver = sub.add_parser("verify", help="run experiments and write reports")
    common(ver)
    ver.add_argument("target", help="suite name or 'all'")
    ver.add_argument("--beta", type=float)
    ver.add_argument("--epsilon", type=float)
    ver.add_argument("--replicas", type=int)
    ver.add_argument("--h", type=float)
    ver.add_argument("--k", type=float)
    ver.add_argument("--budget", choices=sorted(cfg.BUDGETS))
    return p


def resolve(ns: argparse.Namespace) -> RunConfig:
    file_vals = {}
    path = getattr(ns, "config_sub", None) or ns.config
    if path:
        file_vals = read_config_file(path)
    vals = {}
    for key, (_, default) in OPTIONS.items():
        v = getattr(ns, key, None)
        if v is None and key in file_vals:
            v = _convert(key, file_vals[key])
        vals[key] = default if v is None else v
    return RunConfig(command=ns.command, target=getattr(ns, "target", None), **vals).validate()


def _ensure_out(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise UsageError(f"cannot create output directory {path}: {e}") from None
    if not os.access(path, os.W_OK):
        raise UsageError(f"output directory {path} is not writable")
    return path


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------


def cmd_simulate(rc: RunConfig) -> int:
    from .lattice import Side, Window, dual_config, sample_config, trace_dual_extremal, trace_extremal
    from .svg import paths_svg

    beta = 0.5 if rc.beta is None else rc.beta
    out = _ensure_out(rc.out)
    try:
        window = Window.centered(rc.half_width, 0, rc.steps, margin=2)
    except ValueError as e:
        raise UsageError(str(e)) from None
    config = sample_config(window, beta, rc.seed)
    dual = dual_config(config)
    reach = rc.half_width - rc.steps - 2
    starts = np.unique(np.linspace(-reach, reach, rc.paths).round().astype(int))
    rows, drawn, index = [], [], []
    pid = 0
    for x in starts.tolist():
        xf = x - (x % 2)
        for side in (Side.Left, Side.Right):
            p = trace_extremal(config, (xf, 0), side)
            rows += [(int(t), int(v), pid) for t, v in zip(p.times, p.positions)]
            drawn.append((p.times, p.positions, False))
            index.append((pid, "forward", side.name.lower(), xf, 0))
            pid += 1
        xd = x if (x + rc.steps) % 2 else x + 1
        for side in (Side.Left, Side.Right):
            p = trace_dual_extremal(dual, (xd, rc.steps), side)
            rows += [(int(t), int(v), pid) for t, v in zip(p.times, p.positions)]
            drawn.append((p.times, p.positions, True))
            index.append((pid, "dual", side.name.lower(), xd, rc.steps))
            pid += 1
    _write_csv(os.path.join(out, "trajectories.csv"), ["t", "x", "path_id"], rows)
    _write_csv(os.path.join(out, "paths.csv"), ["path_id", "kind", "side", "x0", "t0"], index)
    if rc.svg:
        eps = rc.epsilon if rc.epsilon else max(beta, 1.0 / rc.steps)
        with open(os.path.join(out, "skeleton.svg"), "w") as f:
            f.write(paths_svg(drawn, mapping=rc.svg_map, eps=eps))
    print(f"wrote {len(rows)} trajectory rows for {pid} paths to {out}")
    return EXIT_OK


def cmd_curve(rc: RunConfig) -> int:
    from .closed_forms import big_psi, left_flux_bound, small_psi
    from .svg import line_plot_svg

    out = _ensure_out(rc.out)
    ts = np.linspace(rc.tmin, rc.tmax, rc.steps)
    which = rc.target
    if which == "psi":
        vals = small_psi(ts)
        header, rows = ["t", "value"], [(repr(float(t)), repr(float(v))) for t, v in zip(ts, vals)]
    elif which == "Psi":
        vals = big_psi(rc.eps, ts)
        header = ["eps", "t", "value"]
        rows = [(repr(float(rc.eps)), repr(float(t)), repr(float(v))) for t, v in zip(ts, vals)]
    else:
        s = rc.tmin if rc.s is None else rc.s
        vals = np.array([left_flux_bound(s, float(t)) for t in ts])
        header, rows = ["t", "value"], [(repr(float(t)), repr(float(v))) for t, v in zip(ts, vals)]
    base = os.path.join(out, f"curve_{which}")
    _write_csv(base + ".csv", header, rows)
    with open(base + ".svg", "w") as f:
        f.write(line_plot_svg(ts, vals, xlabel="t", ylabel=which))
    print(f"wrote {len(rows)} rows to {base}.csv")
    return EXIT_OK


def cmd_verify(rc: RunConfig) -> int:
    from . import experiments as ex

    out = _ensure_out(rc.out)
    name = rc.target
    if name != "all" and name not in ex.SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from all, {', '.join(ex.SUITES)}")
    if rc.beta is not None and rc.beta > cfg.SCALING_BETA_MAX:
        print(f"warning: beta = {rc.beta} is outside the scaling regime; the bias allowance widens",
              file=sys.stderr)
    budget = cfg.budget(rc.budget)
    if rc.replicas is not None:
        for key in budget:
            if key.endswith("_replicas"):
                budget[key] = rc.replicas
    if rc.h is not None:
        budget["sticky_h"] = rc.h
        budget["hitting_h"] = rc.h
    names = list(ex.SUITES) if name == "all" else [name]
    reports = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for nm in names:
            fn = ex.SUITES[nm]
            reports += fn(budget, rc.seed, rc.k) if rc.beta is None else fn(budget, rc.seed, rc.k, beta=rc.beta)
    ex.write_reports_csv(reports, os.path.join(out, "reports.csv"))
    text = ex.summary_text(reports)
    with open(os.path.join(out, "summary.txt"), "w") as f:
        f.write(text)
    sys.stdout.write(text)
    return EXIT_OK if all(r.verdict for r in reports) else EXIT_FAIL


COMMANDS = {"simulate": cmd_simulate, "curve": cmd_curve, "verify": cmd_verify}


def main(argv=None) -> int:
    from ._kernels import BoundaryError

    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        rc = resolve(ns)
        return COMMANDS[rc.command](rc)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BoundaryError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (ArithmeticError, RuntimeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
