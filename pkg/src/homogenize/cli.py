"""Command-line driver: ``homogenize run <config.ini>``.

A config file is INI text with one ``[experiment]`` section.  ``kind``
selects the experiment; the remaining keys are described in the README.
Every run writes CSV tables plus ``manifest.json`` into the output
directory; the manifest is written even when the run fails.

Exit codes: 0 success, 1 invalid config, 2 solver failure.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__, beltrami, cell2d, homog1d, kernels, macro2d
from .expr import DomainError, ExprError, Expression
from .fields import EllipticityError, Grid1D, PeriodicGrid2D, ScalarCoefficient, validate_periodicity
from .linalg import SolverError
from .quadrature import QuadratureError

log = logging.getLogger("homogenize")

KINDS = ("cell1d", "cell2d", "solve1d", "solve2d", "lb1d", "lb2d", "convergence")


class ConfigError(ValueError):
    pass


SOLVER_ERRORS = (SolverError, QuadratureError, EllipticityError, DomainError,
                 beltrami.DegenerateMetricError, macro2d.ResolutionError)


# -- config -----------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    kind: str
    values: dict
    path: Path
    text: str
    used: set = field(default_factory=set)

    def get(self, key: str, default=None):
        self.used.add(key)
        return self.values.get(key, default)

    def require(self, key: str) -> str:
        v = self.get(key)
        if v is None or v == "":
            raise ConfigError(f"{self.path}: [experiment] needs '{key}' for kind {self.kind}")
        return v

    def expression(self, key: str, allowed: Sequence[str], default: str | None = None) -> Expression:
        src = self.get(key, default)
        if src is None:
            raise ConfigError(f"{self.path}: [experiment] needs '{key}' for kind {self.kind}")
        try:
            e = Expression(src)
        except ExprError as exc:
            raise ConfigError(f"{self.path}: key '{key}': {exc}") from exc
        extra = e.variables - set(allowed)
        if extra:
            raise ConfigError(f"{self.path}: key '{key}' uses {sorted(extra)}; allowed: {list(allowed)}")
        return e

    def number(self, key: str, default: float | None = None, positive: bool = False) -> float:
        src = self.get(key)
        if src is None:
            if default is None:
                raise ConfigError(f"{self.path}: [experiment] needs '{key}' for kind {self.kind}")
            return float(default)
        try:
            e = Expression(src)
            if e.variables:
                raise ConfigError(f"{self.path}: key '{key}' must be a constant expression")
            v = float(e())
        except ExprError as exc:
            raise ConfigError(f"{self.path}: key '{key}': {exc}") from exc
        if positive and not v > 0:
            raise ConfigError(f"{self.path}: key '{key}' must be positive, got {v!r}")
        return v

    def integer(self, key: str, default: int | None = None, minimum: int = 1) -> int:
        src = self.get(key)
        if src is None:
            if default is None:
                raise ConfigError(f"{self.path}: [experiment] needs '{key}' for kind {self.kind}")
            return int(default)
        try:
            v = int(src)
        except ValueError:
            raise ConfigError(f"{self.path}: key '{key}' must be an integer, got {src!r}") from None
        if v < minimum:
            raise ConfigError(f"{self.path}: key '{key}' must be at least {minimum}")
        return v

    def numbers(self, key: str, default: str | None = None) -> list[float]:
        src = self.get(key, default)
        if src is None:
            raise ConfigError(f"{self.path}: [experiment] needs '{key}' for kind {self.kind}")
        items = [s.strip() for s in src.split(",") if s.strip()]
        out = []
        for s in items:
            try:
                e = Expression(s)
                if e.variables:
                    raise ConfigError(f"{self.path}: '{key}' entries must be constants")
                out.append(float(e()))
            except ExprError as exc:
                raise ConfigError(f"{self.path}: key '{key}' entry {s!r}: {exc}") from exc
        return out

    def etas(self) -> list[float]:
        etas = self.numbers("eta", "")
        if not etas:
            raise ConfigError(f"{self.path}: eta list is empty")
        if any(not e > 0 for e in etas):
            raise ConfigError(f"{self.path}: eta values must be positive")
        if len(set(etas)) != len(etas):
            raise ConfigError(f"{self.path}: eta values must be distinct")
        return etas

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{path}: config parse error at line {exc.lineno}: "
                          "text before the first [section] header") from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0]
        line = text.splitlines()[lineno - 1].strip()
        raise ConfigError(f"{path}: config parse error at line {lineno}: "
                          f"not a 'key = value' line: {line!r}") from exc
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        detail = str(exc).split("]: ", 1)[-1].splitlines()[0]
        where = f" at line {lineno}" if lineno else ""
        raise ConfigError(f"{path}: config parse error{where}: {detail}") from exc
    if not parser.has_section("experiment"):
        raise ConfigError(f"{path}: missing [experiment] section")
    values = dict(parser["experiment"])
    kind = values.get("kind", "")
    if kind not in KINDS:
        raise ConfigError(f"{path}: kind must be one of {', '.join(KINDS)}, got {kind!r}")
    cfg = ExperimentConfig(kind, values, path, text)
    cfg.used.add("kind")
    return cfg


# -- output -------------------------------------------------------------------------

class Output:
    """Collects written files and timings for the manifest."""

    def __init__(self, directory: Path):
        self.dir = directory
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.runtimes: dict[str, float] = {}

    def csv(self, name: str, header: Sequence[str], rows) -> Path:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        path = self.dir / name
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join("%.17g" % v for v in row) + "\n")
        self.files.append(name)
        return path

    def text(self, name: str, body: str) -> Path:
        path = self.dir / name
        with open(path, "w", newline="\n") as fh:
            fh.write(body)
        self.files.append(name)
        return path

    def timed(self, label: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.runtimes[label] = time.perf_counter() - t0


def eta_tag(eta: float) -> str:
    return "%g" % eta


# -- convergence report -------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple
    passed: bool
    text: str

    def csv_rows(self) -> np.ndarray:
        return np.array([[r[0], r[1], r[2]] for r in self.rows])


def report_convergence(table) -> ConvergenceReport:
    """Summarise an ``(eta, max_err, l2_err)`` table; PASS when max_err falls with eta."""
    rows = sorted((tuple(map(float, r)) for r in table), key=lambda r: -r[0])
    if len(rows) < 2:
        raise ValueError("a convergence report needs at least two eta values")
    ok = all(b[1] < a[1] for a, b in zip(rows, rows[1:]))
    lines = [f"{'eta':>12}  {'max_err':>12}  {'l2_err':>12}  {'rate':>6}"]
    for k, r in enumerate(rows):
        rate = ""
        if k and r[1] > 0 and rows[k - 1][1] > 0:
            rate = "%.2f" % (math.log(rows[k - 1][1] / r[1]) / math.log(rows[k - 1][0] / r[0]))
        lines.append(f"{r[0]:12.6g}  {r[1]:12.6e}  {r[2]:12.6e}  {rate:>6}")
    lines.append(f"monotone decrease of max_err: {'PASS' if ok else 'FAIL'}")
    return ConvergenceReport(tuple(rows), ok, "\n".join(lines) + "\n")


def write_errors(out: Output, table: list) -> ConvergenceReport | None:
    out.csv("errors.csv", ["eta", "max_err", "l2_err"], table)
    if len(table) < 2:
        return None
    rep = report_convergence(table)
    out.csv("convergence.csv", ["eta", "max_err", "l2_err"], rep.csv_rows())
    out.text("convergence.txt", rep.text)
    return rep


# -- experiments --------------------------------------------------------------------

def _validate_periodic(cfg: ExperimentConfig, c: ScalarCoefficient, period: float, seed: int,
                       variables=("Y1",)) -> None:
    for v in variables:
        if c.uses(v):
            rep = validate_periodicity(c, period, 100, v, {"ETA": 1.0}, seed)
            if not rep.passed:
                raise ConfigError(f"{cfg.path}: coefficient is not {period:g}-periodic in {v} "
                                  f"(violation {rep.worst_violation:.3g} at {v}={rep.worst_point:.6g})")


def run_cell1d(cfg: ExperimentConfig, out: Output, args) -> None:
    kappa = ScalarCoefficient(cfg.expression("kappa", ("Y1",)))
    period = cfg.number("period", 1.0, positive=True)
    nodes = cfg.integer("nodes", 201, minimum=2)
    n_quad = cfg.integer("n_quad", 64)
    _validate_periodic(cfg, kappa, period, args.seed)
    chi = out.timed("corrector", homog1d.corrector_1d, kappa, Grid1D(0.0, period, nodes, "Y1"), n_quad)
    out.csv("cell1d.csv", ["Y", "kappa", "chi1"],
            np.column_stack([chi.grid.nodes, chi.kappa_values, chi.values]))
    flux = homog1d.flux_form_mean(kappa, chi, n_quad)
    arith = homog1d.arithmetic_mean(kappa, n_quad, period)
    out.csv("summary.csv", ["period", "khat_harmonic", "khat_flux", "kappa_arithmetic"],
            [[period, chi.khat, flux, arith]])


def _cell_problem(cfg: ExperimentConfig, n: int, length: float) -> cell2d.CellProblem2D:
    grid = PeriodicGrid2D(length, n)
    if cfg.get("kappa") is not None:
        kappa = ScalarCoefficient(cfg.expression("kappa", ("Y1", "Y2")))
        return cell2d.CellProblem2D.from_scalar(kappa, grid)
    y1, y2 = grid.mesh()
    a = [np.broadcast_to(np.asarray(cfg.expression(k, ("Y1", "Y2"))(Y1=y1, Y2=y2), dtype=float),
                         y1.shape).copy() for k in ("a11", "a12", "a22")]
    return cell2d.CellProblem2D(grid, a[0], a[2], a[1])


def run_cell2d(cfg: ExperimentConfig, out: Output, args) -> None:
    length = cfg.number("length", 1.0, positive=True)
    sizes = [int(n) for n in cfg.numbers("resolution", "64")]
    tol = cfg.number("tol", cell2d.DEFAULT_TOL, positive=True)
    if cfg.get("kappa") is None and cfg.get("a11") is None:
        raise ConfigError(f"{cfg.path}: cell2d needs 'kappa' or 'a11', 'a12', 'a22'")
    problems = [_cell_problem(cfg, n, length) for n in sizes]
    if cfg.get("kappa") is not None:
        kappa = ScalarCoefficient(cfg.expression("kappa", ("Y1", "Y2")))
        _validate_periodic(cfg, kappa, length, args.seed, ("Y1", "Y2"))
    rows = []
    for n, p in zip(sizes, problems):
        t, c1, c2 = out.timed(f"cell_N{n}", cell2d.homogenize_cell, p, tol)
        spread = [cell2d.flux_spread(p, c, d) for c in (c1, c2) for d in (1, 2)]
        rows.append([n, t.k11, t.k12, t.k21, t.k22, *spread, c1.iterations, c2.iterations])
        y1, y2 = p.grid.mesh()
        out.csv(f"cell2d_N{n}.csv", ["Y1", "Y2", "a11", "a12", "a22", "chi1", "chi2"],
                np.column_stack([a.ravel() for a in (
                    y1, y2, p.a11, p.a12 if p.a12 is not None else np.zeros_like(p.a11), p.a22,
                    c1.values, c2.values)]))
    out.csv("tensor.csv", ["N", "k11", "k12", "k21", "k22", "spread_chi1_dir1", "spread_chi1_dir2",
                           "spread_chi2_dir1", "spread_chi2_dir2", "iterations1", "iterations2"], rows)


def _khat_1d(kappa: ScalarCoefficient, period: float, eta: float, n_quad: int):
    slow = {"ETA": eta} if kappa.uses("ETA") else {}
    if kappa.uses("X1"):
        def khat(x):
            return homog1d.harmonic_mean(kappa, n_quad, period, slow={**slow, "X1": x})
        return khat
    return homog1d.harmonic_mean(kappa, n_quad, period, slow=slow or None)


def run_solve1d(cfg: ExperimentConfig, out: Output, args) -> None:
    kappa = ScalarCoefficient(cfg.expression("kappa", ("X1", "Y1", "ETA")))
    period = cfg.number("period", 1.0, positive=True)
    etas = cfg.etas()
    h = cfg.number("h", 1.0)
    u0 = cfg.number("u0", 0.0)
    n_quad = cfg.integer("cell_quad", 64)
    nodes = cfg.integer("nodes", homog1d.OUTPUT_NODES, minimum=2)
    _validate_periodic(cfg, kappa, period, args.seed)
    grid = Grid1D(0.0, 1.0, nodes)
    table = []
    for eta in etas:
        exact = out.timed(f"exact_eta{eta_tag(eta)}", homog1d.solve_bvp_1d,
                          homog1d.BVP1D(kappa, eta, u0, h, period), None, grid)
        khat = _khat_1d(kappa, period, eta, n_quad)
        hom = out.timed(f"homogenized_eta{eta_tag(eta)}", homog1d.solve_homogenized_1d, khat, u0, h, grid)
        x = grid.nodes
        k = kappa.evaluate(**homog1d.multiscale_bindings(kappa, x, eta))
        out.csv(f"solution_eta{eta_tag(eta)}.csv", ["X", "kappa", "U_exact", "U_homogenized"],
                np.column_stack([x, k, exact.values, hom.values]))
        table.append([eta, *macro2d.error_norms(exact, hom)])
    write_errors(out, table)


def run_solve2d(cfg: ExperimentConfig, out: Output, args) -> None:
    kappa = ScalarCoefficient(cfg.expression("kappa", ("Y1", "Y2", "ETA")))
    period = cfg.number("period", 1.0, positive=True)
    etas = cfg.etas()
    m = cfg.integer("resolution", 256, minimum=2)
    n = cfg.integer("cell_resolution", cell2d.DEFAULT_N, minimum=8)
    h = cfg.number("h", 1.0)
    u0 = cfg.number("u0", 0.0)
    tol = cfg.number("tol", macro2d.DEFAULT_TOL, positive=True)
    _validate_periodic(cfg, kappa, period, args.seed, ("Y1", "Y2"))
    for eta in etas:
        if m * eta / period < 20 - 1e-9:
            raise ConfigError(f"{cfg.path}: resolution {m} gives fewer than 20 cells per period at eta={eta}")
    if m > macro2d.MAX_RESOLUTION:
        raise ConfigError(f"{cfg.path}: resolution {m} exceeds {macro2d.MAX_RESOLUTION}")

    def cell_tensor(eta):
        c = ScalarCoefficient(lambda **b: kappa(**{**b, "ETA": eta}))
        p = cell2d.CellProblem2D.from_scalar(c, PeriodicGrid2D(period, n))
        return cell2d.homogenize_cell(p, tol)[0]

    tensors = {eta: out.timed(f"cell_eta{eta_tag(eta)}", cell_tensor, eta)
               for eta in (etas if kappa.uses("ETA") else etas[:1])}

    def one(eta):
        problem = macro2d.MacroProblem2D(kappa, m, h, eta, u0, cells_per_period=20 * period)
        t0 = time.perf_counter()
        ms = macro2d.solve_multiscale_2d(problem, tol)
        t = tensors.get(eta, tensors[etas[0]])
        hom = macro2d.solve_homogenized_2d(t, m, h, u0, tol)
        return eta, ms, hom, time.perf_counter() - t0

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = list(pool.map(one, etas))
    table, trows = [], []
    for eta, ms, hom, dt in results:
        out.runtimes[f"solve_eta{eta_tag(eta)}"] = dt
        x1, x2 = np.meshgrid(*ms.coords, indexing="ij")
        out.csv(f"solution2d_eta{eta_tag(eta)}.csv", ["X1", "X2", "U_multiscale", "U_homogenized"],
                np.column_stack([x1.ravel(), x2.ravel(), ms.values.ravel(), hom.values.ravel()]))
        t = tensors.get(eta, tensors[etas[0]])
        trows.append([eta, t.k11, t.k12, t.k21, t.k22])
        table.append([eta, *macro2d.error_norms(ms, hom)])
    out.csv("tensor.csv", ["eta", "k11", "k12", "k21", "k22"], trows)
    write_errors(out, table)


def _lb1d_metric(cfg: ExperimentConfig, eta: float):
    chart_src = cfg.get("chart", "builtin")
    if chart_src == "builtin":
        return beltrami.wrinkled_curve_metric(), beltrami.wrinkled_curve_chart()
    chart = beltrami.SurfaceChart.curve(cfg.expression("x1", ("X1", "Y1", "ETA"), "X1"),
                                        cfg.expression("x2", ("X1", "Y1", "ETA")))
    return beltrami.TwoScaleMetric.from_chart(chart, eta), chart


def run_lb1d(cfg: ExperimentConfig, out: Output, args) -> None:
    etas = cfg.etas()
    h = cfg.number("h", 10.0)
    nodes = cfg.integer("nodes", homog1d.OUTPUT_NODES, minimum=2)
    cell_quad = cfg.integer("cell_quad", 64)
    if cfg.get("chart", "builtin") not in ("builtin", "custom"):
        raise ConfigError(f"{cfg.path}: chart must be 'builtin' or 'custom'")
    grid = Grid1D(0.0, 1.0, nodes)
    x = grid.nodes
    table = []
    khat_written = False
    for eta in etas:
        g, chart = _lb1d_metric(cfg, eta)
        rep = g.validate_periodicity(seed=args.seed)
        if not rep.passed:
            raise ConfigError(f"{cfg.path}: metric is not 1-periodic in Y1")
        if not khat_written or cfg.get("chart", "builtin") == "custom":
            kh = out.timed(f"khat_eta{eta_tag(eta)}", beltrami.homogenize_pointwise_1d, g, grid, cell_quad)
            name = "khat.csv" if cfg.get("chart", "builtin") == "builtin" else f"khat_eta{eta_tag(eta)}.csv"
            out.csv(name, ["X", "khat"], np.column_stack([x, kh]))
            khat_written = True
        tag = eta_tag(eta)
        pts = chart.evaluate([x], None, eta)
        out.csv(f"chart_eta{tag}.csv", ["X", "x1", "x2"], np.column_stack([x, pts[0], pts[1]]))
        out.csv(f"kappa_eta{tag}.csv", ["X", "kappa"],
                np.column_stack([x, beltrami.lb_coefficient_1d(g, x, x / eta)]))
        exact = out.timed(f"exact_eta{tag}", beltrami.solve_lb_1d, g, eta, h, "exact", grid)
        hom = out.timed(f"homogenized_eta{tag}", beltrami.solve_lb_1d, g, eta, h, "homogenized",
                        grid, None, cell_quad)
        out.csv(f"solution_eta{tag}.csv", ["X", "U_exact", "U_homogenized"],
                np.column_stack([x, exact.values, hom.values]))
        table.append([eta, *macro2d.error_norms(exact, hom)])
    write_errors(out, table)


def run_lb2d(cfg: ExperimentConfig, out: Output, args) -> None:
    f = cfg.expression("f", ("X1", "X2", "Y1", "Y2", "ETA"))
    chart = beltrami.SurfaceChart.graph(f)
    eta = cfg.etas()
    if len(eta) != 1:
        raise ConfigError(f"{cfg.path}: lb2d takes a single eta")
    eta = eta[0]
    n = cfg.integer("cell_resolution", 32, minimum=8)
    k = cfg.integer("macro_points", 5)
    tol = cfg.number("tol", cell2d.DEFAULT_TOL, positive=True)
    lo, hi = cfg.numbers("domain", "0, 1")
    centres = lo + (hi - lo) * (np.arange(k) + 0.5) / k
    points = [(a, b) for a in centres for b in centres]
    tensors = out.timed("cells", beltrami.homogenize_lb_2d, chart, points, n, eta, tol, args.threads)
    rows = []
    for (a, b), t in zip(points, tensors):
        lam = t.eigenvalues()
        rows.append([a, b, t.k11, t.k12, t.k21, t.k22, lam[0], lam[1]])
    out.csv("lb2d_tensors.csv", ["X1", "X2", "k11", "k12", "k21", "k22", "lambda_min", "lambda_max"], rows)


def run_convergence(cfg: ExperimentConfig, out: Output, args) -> None:
    src = Path(cfg.require("table"))
    if not src.is_absolute():
        src = cfg.path.parent / src
    try:
        data = np.loadtxt(src, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{cfg.path}: cannot read error table {src}: {exc}") from exc
    if data.shape[0] < 2 or data.shape[1] < 3:
        raise ConfigError(f"{cfg.path}: error table needs at least two rows of (eta, max_err, l2_err)")
    rep = report_convergence(data[:, :3])
    out.csv("convergence.csv", ["eta", "max_err", "l2_err"], rep.csv_rows())
    out.text("convergence.txt", rep.text)


RUNNERS = {
    "cell1d": run_cell1d, "cell2d": run_cell2d, "solve1d": run_solve1d, "solve2d": run_solve2d,
    "lb1d": run_lb1d, "lb2d": run_lb2d, "convergence": run_convergence,
}


# -- entry point ------------------------------------------------------------------

def _manifest(cfg: ExperimentConfig | None, config_path: str, out: Output, args, status: str,
              error: str | None) -> dict:
    return {
        "config": str(config_path),
        "config_sha256": cfg.sha256 if cfg else None,
        "kind": cfg.kind if cfg else None,
        "status": status,
        "error": error,
        "seed": args.seed,
        "threads": args.threads,
        "versions": {"homogenize": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "backend": kernels.BACKEND,
        "runtimes": out.runtimes,
        "outputs": out.files,
    }


def run(args) -> int:
    out_dir = os.environ.get("HOMOGENIZE_OUT") or args.out
    out = Output(Path(out_dir))
    cfg = None
    status, error, code = "ok", None, 0
    try:
        cfg = load_config(args.config)
        t0 = time.perf_counter()
        RUNNERS[cfg.kind](cfg, out, args)
        out.runtimes["total"] = time.perf_counter() - t0
        unused = sorted(set(cfg.values) - cfg.used)
        if unused:
            log.warning("unused config keys: %s", ", ".join(unused))
    except ConfigError as exc:
        status, error, code = "invalid", str(exc), 1
    except SOLVER_ERRORS as exc:
        status, error, code = "solver_error", f"{cfg.kind if cfg else ''}: {type(exc).__name__}: {exc}", 2
    if error:
        print(f"error: {error}", file=sys.stderr)
    with open(out.dir / "manifest.json", "w", newline="\n") as fh:
        json.dump(_manifest(cfg, args.config, out, args, status, error), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homogenize", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one experiment config")
    p.add_argument("config")
    p.add_argument("--out", default="out", help="output directory (HOMOGENIZE_OUT overrides)")
    p.add_argument("--threads", type=int, default=1, help="concurrent independent solves")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized validation sampling")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 1
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
