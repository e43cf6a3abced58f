"""Experiment suites: each writes CSV tables, SVG figures, AFLD snapshots and a summary."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from . import plotting
from .afld import write_field
from .asymptotics import leading_term_values, profile_sobolev_track, remainder_norms
from .config import ExperimentConfig, Suite
from .dispersion import (
    Form,
    ModelParams,
    free_solution,
    gauge_compatible_length,
    gauge_params,
    gauge_reduce,
    reduced_params,
)
from .final_state import (
    FinalStateConfig,
    backward_construct,
    decay_prediction,
    default_alpha,
    geometric_times,
    in_theorem_range,
    picard_iterate,
    scattering_defect,
    solution_distance,
    terminal_datum,
    truncation_estimate,
)
from .grid import Field, Grid, dft, idft, lp_norm
from .metrics import AdmissiblePair, fit_power_law, strichartz_series
from .oracle import kernel_integral
from .profiles import AnalyticProfile, FiniteSum, HermiteGaussian, sample
from .solver import SolveConfig, TailGuardError, solve

EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 1, 2


@dataclass
class Assertion:
    name: str
    passed: bool
    value: float
    threshold: float
    relation: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.6g} {self.relation} {self.threshold:.6g}"


def check(name: str, value: float, relation: str, threshold: float) -> Assertion:
    ok = {"<": value < threshold, "<=": value <= threshold, ">": value > threshold}[relation]
    return Assertion(name, bool(ok), float(value), float(threshold), relation)


@dataclass
class RunResult:
    exit_code: int
    assertions: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    message: str = ""

    @property
    def all_passed(self) -> bool:
        return all(a.passed for a in self.assertions)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path: Path, header: list, rows) -> Path:
    """Header line then one row per record; floats with 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class _Run:
    """Collects outputs of one suite inside its run directory."""

    def __init__(self, cfg: ExperimentConfig, out: Path):
        self.cfg, self.out = cfg, out
        self.result = RunResult(EXIT_OK)

    def path(self, name: str) -> Path:
        self.result.files.append(name)
        return self.out / name

    def csv(self, name: str, header, rows):
        write_csv(self.path(name), header, rows)

    def snapshot(self, name: str, f: Field):
        write_field(self.path(name), f)

    def add(self, a: Assertion):
        self.result.assertions.append(a)


# ---------------------------------------------------------------- suites


def _propagate(run: _Run):
    cfg, P = run.cfg, run.cfg.params
    g, m, psi = cfg.grid, cfg.model, cfg.profile
    f0 = sample(psi, g)
    coeffs = dft(f0.values, g)
    norm_x = lp_norm(f0, 2)
    norm_k = math.sqrt(float(np.sum(np.abs(coeffs) ** 2)) * g.dual_cell_volume)
    back = idft(coeffs, g)
    run.add(check("parseval_rel", abs(norm_k - norm_x) / norm_x, "<", 1e-12))
    run.add(check("dft_roundtrip_rel", float(np.linalg.norm(back - f0.values) / np.linalg.norm(f0.values)), "<", 1e-12))

    t1, dt = float(P["t_final"]), float(P["dt"])
    sc = SolveConfig.spanning(0.0, t1, abs(dt), tail_guard=bool(P["tail_guard"]), snapshot_times=tuple(P["snapshots"]))
    traj = solve(f0, t1, sc, m)
    drift = np.abs(traj.mass / traj.mass[0] - 1.0)
    run.csv("mass.csv", ["time", "mass", "relative_drift"], zip(traj.times, traj.mass, drift))
    plotting.line_plot(run.path("mass_drift.svg"), traj.times, {"|m(t)/m(0) - 1|": np.maximum(drift, 1e-18)},
                       title="mass drift", ylabel="relative drift", logy=True)
    run.snapshot("initial.afld", f0)
    for s in traj.snapshots:
        run.snapshot(f"u_t{s.time:.6g}.afld", s)
    if m.lam == 0:
        run.add(check("unitarity_drift_per_step", float(drift.max()) / sc.steps, "<", 1e-12))
        exact = free_solution(psi, t1, g, m)
        run.add(check("linear_vs_free_solution", lp_norm(traj.final - exact, 2), "<", 1e-9))
    else:
        run.add(check("mass_drift", float(drift.max()), "<", 1e-10))
    rev = solve(traj.final, 0.0, SolveConfig(-sc.dt, sc.steps), m).final
    rt = lp_norm(rev - f0, 2)
    run.add(check("backward_forward_roundtrip", rt, "<", 1e-8))
    run.result.results.update(steps=sc.steps, dt=sc.dt, max_mass_drift=float(drift.max()), roundtrip=rt)

    if P["gauge_check"]:
        if m.form is not Form.GENERAL:
            raise ValueError("gauge_check needs a general-form model")
        disc = gauge_discrepancy(m, g, psi, t1, abs(dt))
        run.add(check("gauge_commuting_diagram", disc, "<", 1e-8))
        run.result.results["gauge_discrepancy"] = disc


def gauge_discrepancy(m: ModelParams, g: Grid, psi: AnalyticProfile, t: float, dt: float) -> float:
    """|| gauge(u(t)) - v(t) ||_2 with u from the full equation and v from the reduced one.

    The box along x1 is adjusted so that exp(i k x1) is periodic, keeping the
    grid spacing; the reduced flow starts from psi modulated by exp(i k x1).
    """
    gp = gauge_params(m)
    red, _ = reduced_params(m)
    L1 = gauge_compatible_length(m, g.half_length[0])
    h = g.spacing[0]
    n1 = 2 * int(math.ceil(L1 / h))
    gg = Grid((L1,) + tuple(g.half_length[1:]), (n1,) + tuple(g.n_points[1:]))
    carrier = (gp.wavenumber,) + (0.0,) * (g.d - 1)
    def modulate(p):
        if isinstance(p, FiniteSum):
            return FiniteSum(tuple(modulate(q) for q in p.terms))
        return HermiteGaussian(p.d, p.amplitude, p.width, p.order, p.center,
                               tuple(c + k for c, k in zip(p.carrier, carrier)))

    sc = SolveConfig.spanning(0.0, t, dt)
    u = solve(sample(psi, gg), t, sc, m).final
    v = solve(sample(modulate(psi), gg), t, sc, red).final
    return lp_norm(gauge_reduce(u, t, m) - v, 2)


def _profile_error(run: _Run):
    cfg, P = run.cfg, run.cfg.params
    g, m, psi = cfg.grid, cfg.model, cfg.profile
    res = run.result.results
    cols, data = ["time"], []
    for r in P["r"] if P["times"] else ():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ns = remainder_norms(P["times"], g, psi, r, m)
        fit = fit_power_law(ns.pairs())
        tag = "inf" if math.isinf(r) else f"{r:g}"
        cols += [f"remainder_r{tag}", f"resolved_r{tag}"]
        data.append((ns.values, ns.resolved))
        res[f"fit_r{tag}"] = asdict(fit)
        plotting.loglog_plot(run.path(f"remainder_r{tag}.svg"), {f"||R(t)|| (r={tag})": (ns.times, ns.values)}, fit,
                             title=f"remainder decay, d={g.d}", ylabel="norm", reference_slope=-0.375)
        if r == 2:
            run.add(check("remainder_slope_r2", fit.exponent, "<=", -0.375 + 0.1))
            run.add(check("remainder_resolved", float(ns.resolved.all()), ">", 0.5))
    if P["times"]:
        times = np.asarray(sorted(P["times"]))
        rows = [[t] + [x for vals, ok in data for x in (vals[i], ok[i])] for i, t in enumerate(times)]
        run.csv("remainder.csv", cols, rows)

    tp = float(P["pointwise_time"])
    if tp > 0:
        if g.d != 1:
            raise ValueError("pointwise kernel comparison is one-dimensional")
        xs, kern, lead = pointwise_comparison(tp, psi, int(P["pointwise_points"]))
        rel = np.abs(kern - lead) / np.abs(lead)
        run.csv("pointwise.csv", ["time", "x1", "kernel_re", "kernel_im", "leading_re", "leading_im", "rel_error"],
                [(tp, x, k.real, k.imag, l.real, l.imag, e) for x, k, l, e in zip(xs, kern, lead, rel)])
        plotting.line_plot(run.path("pointwise.svg"), xs, {"relative error": rel}, title=f"t = {tp:g}",
                           xlabel="x1", logy=True)
        run.add(check("leading_term_pointwise_rel", float(rel.max()), "<", 0.02))
        res["pointwise_max_rel"] = float(rel.max())

    s = float(P["sobolev_s"])
    if s > 0:
        tr = profile_sobolev_track(P["sobolev_times"], s, psi, m, g)
        run.csv("sobolev.csv", ["time", "h_s_norm"], zip(tr.times, tr.values))
        plotting.line_plot(run.path("sobolev.svg"), tr.times, {f"H^{s:g} norm": tr.values}, title="profile bound")
        ratio = float(tr.values.max() / tr.values[0])
        run.add(check("profile_sobolev_ratio", ratio, "<=", 2.0))
        res["sobolev_ratio"] = ratio


def pointwise_comparison(t: float, psi: AnalyticProfile, n: int = 41, level: float = 0.1):
    """Kernel quadrature vs leading term at x1 = t (mu^3 + mu) where |psi_hat(mu)| > level * max."""
    mu = np.linspace(-psi.spectral_extent, psi.spectral_extent, 4001)
    amp = np.abs(psi.fourier(mu))
    keep = mu[amp > level * amp.max()]
    mus = np.linspace(keep[0], keep[-1], n + 2)[1:-1]
    xs = t * (mus**3 + mus)
    lead = leading_term_values(t, (xs,), psi)
    kern = np.array([kernel_integral(t, float(x), psi.fourier) for x in xs])
    return xs, kern, lead


def _scatter(run: _Run):
    cfg, P = run.cfg, run.cfg.params
    g, m, psi = cfg.grid, cfg.model, cfg.profile
    d = g.d
    res = run.result.results
    alpha = float(P["alpha_weight"]) or default_alpha(d, m.p)
    fcfg = FinalStateConfig(float(P["t_max"]), tuple(geometric_times(P["t_start"], P["t_max"], P["per_unit_log"])),
                            alpha, int(P["max_iter"]), float(P["contraction_tol"]))
    trunc = truncation_estimate(fcfg, psi, m, d)
    pic = picard_iterate(fcfg, g, psi, m, raise_on_growth=False)
    bk = backward_construct(fcfg, g, psi, m, max_dt=float(P["max_dt"]))
    agree = solution_distance(pic, bk)
    z = terminal_datum(fcfg, g, psi, m)
    mass_gap = abs(lp_norm(bk.start, 2) - lp_norm(z, 2)) / lp_norm(z, 2)

    dist = pic.distances
    run.csv("picard_distances.csv", ["iteration", "distance", "ratio"],
            [(i, v, (v / dist[i - 1]) if i and dist[i - 1] > 0 else float("nan")) for i, v in enumerate(dist)])
    plotting.line_plot(run.path("picard_distances.svg"), np.arange(len(dist)),
                       {"Delta_n": np.maximum(np.asarray(dist), 1e-300)}, title="Picard distances",
                       xlabel="n", logy=True)
    run.snapshot("terminal.afld", z)
    run.snapshot("u_start_picard.afld", pic.start)
    run.snapshot("u_start_backward.afld", bk.start)

    if m.lam != 0:
        for n, rho in enumerate(pic.ratios[:3]):
            run.add(check(f"picard_ratio_{n}", rho, "<", 1.0))
    run.add(check("picard_final_distance", dist[-1], "<", 1e-6))
    run.add(check("picard_vs_backward", agree, "<=", max(2e-6, trunc)))
    run.add(check("backward_mass_rel", mass_gap, "<", 1e-10))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dp = scattering_defect(pic, psi, m)
        db = scattering_defect(bk, psi, m)
    run.csv("defect.csv", ["time", "defect_picard", "defect_backward"],
            zip(dp.series.times, dp.series.values, db.series.values))
    pred = dp.prediction
    bound = float(P["slope_bound"]) or (-pred.gamma + 0.15 if d == 2 else -0.1)
    if dp.fit is not None:
        plotting.loglog_plot(run.path("defect.svg"), {"||u(t) - W(t) psi||_2": (dp.series.times, dp.series.values)},
                             dp.fit, title=f"scattering defect, d={d}, p={m.p:g}", ylabel="defect",
                             reference_slope=-pred.gamma)
        run.add(check("defect_slope", dp.fit.exponent, "<=", bound))
        res["defect_fit"] = asdict(dp.fit)
    else:
        run.add(Assertion("defect_slope", False, float("nan"), bound, "<="))
    res.update(
        alpha_weight=alpha,
        distances=list(map(float, dist)),
        ratios=list(map(float, pic.ratios)),
        agreement=agree,
        truncation_estimate=trunc,
        predicted_gamma=pred.gamma,
        gamma_branch=pred.branch,
        theorem_range=in_theorem_range(d, m.p),
        points_per_decade=dp.per_decade,
    )


def _strichartz(run: _Run):
    cfg, P = run.cfg, run.cfg.params
    g, m, psi = cfg.grid, cfg.model, cfg.profile
    t0, t1 = P["window"]
    n = int(P["samples"])
    rows, series = [], {}
    for q, r in P["pairs"]:
        pair = AdmissiblePair(q, r, g.d)
        out = []
        for hi in (t1, 2.0 * t1):
            times = np.linspace(t0, hi, n)
            norm0, vals = strichartz_series(pair, times, psi, g, m)
            if math.isinf(q):
                Q = float(vals.max()) / norm0
            else:
                Q = float(trapezoid(vals**q, times)) ** (1.0 / q) / norm0
            out.append(Q)
        change = abs(out[1] - out[0]) / out[0]
        tag = f"q{q:g}_r{r:g}"
        rows.append((t0, t1, q, r, out[0], out[1], change))
        series[tag] = (times, vals / norm0)
        if math.isinf(q) and r == 2:
            run.add(check(f"strichartz_unitary_{tag}", abs(out[0] - 1.0), "<", 1e-12))
        else:
            run.add(check(f"strichartz_doubling_{tag}", change, "<", 0.10))
    run.csv("strichartz.csv", ["t0", "t1", "q", "r", "quotient", "quotient_doubled", "relative_change"], rows)
    plotting.line_plot(run.path("strichartz.svg"), series[next(iter(series))][0], {k: v for k, (_, v) in series.items()},
                       title="weighted L^r norms / ||psi||_2", ylabel="norm ratio")
    run.result.results["quotients"] = rows


def _dispersion_table(run: _Run):
    rows, labels, values = [], [], []
    for d, p in run.cfg.params["cases"]:
        d, p = int(d), float(p)
        pred = decay_prediction(d, p)
        ok = in_theorem_range(d, p)
        rows.append((d, p, pred.gamma, pred.branch, ok))
        labels.append(f"d={d}, p={p:g}")
        values.append(pred.gamma)
        if ok:
            run.add(check(f"gamma_positive_d{d}_p{p:g}", pred.gamma, ">", 0.0))
    run.csv("gamma.csv", ["d", "p", "gamma", "branch", "theorem_range"], rows)
    plotting.bar_plot(run.path("gamma.svg"), labels, values, title="predicted decay exponent", ylabel="gamma")
    run.result.results["table"] = rows


SUITES = {
    Suite.PROPAGATE: _propagate,
    Suite.PROFILE_ERROR: _profile_error,
    Suite.SCATTER: _scatter,
    Suite.STRICHARTZ: _strichartz,
    Suite.DISPERSION_TABLE: _dispersion_table,
}


def run_experiment(cfg: ExperimentConfig, out_root: str | Path) -> RunResult:
    """Run one suite into ``out_root/<name>`` and write ``summary.json``."""
    out = Path(out_root) / cfg.name
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(cfg, out)
    with open(run.path("config.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(cfg.raw), fh, indent=2, sort_keys=True)
        fh.write("\n")
    np.random.seed(cfg.seed)
    try:
        SUITES[cfg.suite](run)
    except TailGuardError as e:
        run.result.exit_code = EXIT_ABORT
        run.result.message = f"numerical abort: {e}"
    summary = {
        "name": cfg.name,
        "suite": cfg.suite.value,
        "exit_code": run.result.exit_code,
        "message": run.result.message,
        "exploratory": cfg.exploratory,
        "all_passed": run.result.all_passed and run.result.exit_code == EXIT_OK,
        "assertions": [asdict(a) for a in run.result.assertions],
        "results": run.result.results,
        "files": sorted(run.result.files + ["summary.json"]),
    }
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return run.result
