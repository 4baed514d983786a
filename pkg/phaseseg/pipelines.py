"""
Experiment pipelines behind the CLI commands.

Каждый pipeline получает конфиг и объекты компонентов текущего запуска,
пишет свои CSV, записывает проверки в журнал и возвращает сводку для
`report.json`. Функции, уходящие в пул воркеров, объявлены на уровне модуля,
чтобы их можно было передать в процессный пул.
"""

import functools
import math
import typing as t
from dataclasses import dataclass
from logging import getLogger

import numpy as np
from scipy.optimize import brentq

from phaseseg import gp_field, interface_1d, shape_limit, tf_core
from phaseseg.components.artifacts import ArtifactStore
from phaseseg.components.checks import CheckLedger
from phaseseg.components.pool import SweepExecutor
from phaseseg.config import ExperimentConfig
from phaseseg.errors import DomainError
from phaseseg.shapes import DiskShape, StarShape, WeightParams, ball_perimeter

logger = getLogger(__name__)

Summary = t.Dict[str, t.Any]


@dataclass
class RunContext:
    config: ExperimentConfig
    pool: SweepExecutor
    artifacts: ArtifactStore
    checks: CheckLedger


Pipeline = t.Callable[[RunContext], t.Awaitable[Summary]]

PIPELINES: t.Dict[str, Pipeline] = {}


def pipeline(command: str) -> t.Callable[[Pipeline], Pipeline]:
    def register(fn: Pipeline) -> Pipeline:
        if command in PIPELINES:
            raise ValueError(f"Duplicate pipeline: {command}")
        PIPELINES[command] = fn
        return fn

    return register


def _label(**kwargs: t.Any) -> str:
    return ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in kwargs.items())


# ======================= tf =======================


@pipeline("tf")
async def run_tf(ctx: RunContext) -> Summary:
    cfg, checks = ctx.config, ctx.checks
    params = tf_core.TFParams(alpha1=cfg["alpha1"], alpha2=cfg["alpha2"], g=cfg["g"], K=cfg["K"])
    profile = tf_core.tf_profile(params)
    pair = tf_core.tf_density(profile, params)
    h = cfg["step"] or None
    sampled = tf_core.sample(pair, h)

    energy = tf_core.tf_energy(sampled, params)
    m1, m2 = tf_core.tf_masses(sampled)
    checks.close_to("energy_matches_closed_form", energy, profile.E0, rtol=1e-6)
    checks.close_to("mass_alpha1", m1, params.alpha1, rtol=1e-6)
    checks.close_to("mass_alpha2", m2, params.alpha2, atol=1e-6 * max(params.alpha2, 1.0))
    if params.alpha2 > 0:
        checks.close_to(
            "gap_identity", profile.sigma_plus / profile.sigma_minus, math.sqrt(params.g), rtol=1e-12
        )

    t0 = tf_core.interior_argmin(params)
    checks.close_to("interior_argmin", t0, (profile.r0 / profile.r1) ** 2, atol=1e-8)

    r = np.linspace(0.0, profile.R2 + 0.5, cfg["points"])
    rho1, rho2 = pair(r)
    ctx.artifacts.write_csv(
        "tf_profile.csv",
        [{"r": ri, "rho1": a, "rho2": b} for ri, a, b in zip(r, rho1, rho2)],
        plot=("r", ["rho1", "rho2"]),
    )

    radii = profile.r0 * np.linspace(0.5, 1.5, 101)
    rows = []
    for radius in radii:
        constrained = tf_core.tf_profile_for_radius(params, float(radius))
        rows.append({"r": radius, "t": (radius / profile.r1) ** 2, "energy": constrained.E0})
    ctx.artifacts.write_csv("tf_energy_vs_radius.csv", rows, plot=("r", ["energy"]))
    best = min(rows, key=lambda row: row["energy"])
    checks.at_least("constrained_energy_above_minimum", best["energy"], profile.E0 * (1.0 - 1e-12))
    checks.close_to("best_sampled_radius", best["r"], profile.r0, atol=0.01 * profile.r0)

    report = tf_core.stability_sweep(params, seed=cfg.seed, count=cfg["stability_samples"], h=h)
    checks.record(
        "stability_ratio_bounded",
        math.isfinite(report.sup_ratio) and report.sup_ratio > 0,
        report.sup_ratio,
        "finite",
    )
    linear = report.swap_linear_ratios
    checks.at_least("swap_linear_ratio_grows", linear[-1] / linear[0], 5.0, detail="ratio of last to first width")
    ctx.artifacts.write_csv(
        "tf_swap.csv",
        [{"step": i, "linear_ratio": v} for i, v in enumerate(linear)],
    )

    return {
        "r0": profile.r0,
        "r1": profile.r1,
        "R1": profile.R1,
        "R2": profile.R2,
        "E0": profile.E0,
        "sigma_plus": profile.sigma_plus,
        "sigma_minus": profile.sigma_minus,
        "energy_quadrature": energy,
        "t0": t0,
        "best_sampled_radius": best["r"],
        "stability": {
            "sup_ratio": report.sup_ratio,
            "family_sup": report.family_sup,
            "swap_exponent": report.swap_exponent,
            "samples": report.samples,
        },
    }


# ======================= gp-minimize =======================


def gp_rate_row(base: t.Mapping[str, t.Any], epsilon: float) -> t.Dict[str, t.Any]:
    params = gp_field.GPParams(
        epsilon=epsilon, g=base["g"], K=base["K"], alpha1=base["alpha1"], alpha2=base["alpha2"]
    )
    eta1, eta2, report = gp_field.minimize_gp(
        params, schedule=base["schedule"], n=base["n"], tol=base["tol"], max_iter=base["max_iter"]
    )
    return {
        "epsilon": epsilon,
        "distance": gp_field.tf_distance(eta1, eta2, params),
        "density_l1": gp_field.density_l1_distance(eta1, eta2, params),
        "energy": report.final_energy,
        "iterations": report.iterations,
        "gradient_norm": report.gradient_norm,
        "mass_error": max(report.mass_errors),
        "converged": report.converged,
    }


def _decomposition(cfg: ExperimentConfig) -> t.List[t.Dict[str, t.Any]]:
    params = gp_field.GPParams.crossover(
        epsilon=cfg["decomposition_epsilon"],
        xi=cfg["decomposition_xi"],
        K=cfg["K"],
        alpha1=cfg["alpha1"],
        alpha2=cfg["alpha2"],
    )
    grid = gp_field.default_grid(params, cfg["decomposition_n"])
    eta1, eta2, _ = gp_field.minimize_gp(
        params, grid=grid, schedule=cfg["schedule"], tol=cfg["tol"], max_iter=cfg["max_iter"]
    )
    rows = []
    for tol in (cfg["tol"], cfg["tol"] / 10.0):
        eta_bar, report = gp_field.minimize_g(params, grid, schedule=cfg["schedule"], tol=tol, max_iter=cfg["max_iter"])
        dec = gp_field.lm_decomposition(eta1, eta2, eta_bar, params)
        rows.append(
            {
                "tol": tol,
                "residual": dec.residual,
                "el_residual": dec.el_residual,
                "chemical_potential": dec.chemical_potential,
                "masked_cells": dec.masked_cells,
                "masked_mass": dec.masked_mass,
                "iterations": report.iterations,
                **dec.terms,
            }
        )
    return rows


@pipeline("gp-minimize")
async def run_gp_minimize(ctx: RunContext) -> Summary:
    cfg, checks = ctx.config, ctx.checks
    base = {k: cfg[k] for k in ("g", "K", "alpha1", "alpha2", "schedule", "n", "tol", "max_iter")}
    epsilons = sorted(cfg["epsilon_list"], reverse=True)
    rows = await ctx.pool.map_async(functools.partial(gp_rate_row, base), epsilons)
    ctx.artifacts.write_csv("gp_rate.csv", rows, plot=("epsilon", ["distance"]), log_scale=True)

    for row in rows:
        label = _label(epsilon=row["epsilon"])
        checks.record(f"converged[{label}]", row["converged"], row["gradient_norm"], cfg["tol"])
        checks.at_most(f"mass_preserved[{label}]", row["mass_error"], 1e-10)

    distances = [row["distance"] for row in rows]
    summary: Summary = {"rows": len(rows)}
    if len(rows) >= 2:
        rate = gp_field.fit_rate(epsilons, distances)
        summary["rate"] = rate
        checks.record(
            "distance_decreases",
            all(b < a for a, b in zip(distances, distances[1:])),
            distances,
            "monotone",
        )
        checks.at_least("fitted_rate", rate, cfg["min_rate"])

    if cfg["decomposition"]:
        dec_rows = await ctx.pool.run(_decomposition, cfg)
        ctx.artifacts.write_csv("gp_decomposition.csv", dec_rows)
        loose, tight = dec_rows
        checks.at_most(
            "decomposition_residual_vs_el_residual",
            tight["residual"] / max(tight["el_residual"], 1e-300),
            10.0,
        )
        checks.record(
            "decomposition_residual_decreases",
            tight["residual"] < loose["residual"] or tight["residual"] <= 1e-12 * abs(tight["F"]),
            [loose["residual"], tight["residual"]],
            "decreasing",
        )
        summary["decomposition"] = tight
    return summary


# ======================= sigma1d / sigma-sweep =======================


def sigma_row(n: int, weak_threshold: float, polish: bool, point: t.Tuple[float, float]) -> t.Dict[str, t.Any]:
    lambda_, K = point
    rescaled = K - 1.0 <= weak_threshold
    params = interface_1d.TransitionParams(lambda_, K, rescaled=rescaled)
    _, report = interface_1d.minimize_sigma(params, n=n, polish=polish)
    scale = math.sqrt(K - 1.0)
    sigma = report.sigma * scale if rescaled else report.sigma
    b = interface_1d.bracket(lambda_, K)
    return {
        "lambda": lambda_,
        "K": K,
        "rescaled": rescaled,
        "sigma": sigma,
        "sigma_over_sqrt_K_minus_1": sigma / scale,
        "sigma_over_sigma_infinity": sigma / interface_1d.sigma_infinity(lambda_),
        "lower": b.lower,
        "upper_overlap": b.overlap,
        "upper_small_lambda": b.small_lambda,
        "upper": b.upper,
        "equipartition_sup": report.equipartition_sup,
        "tail_mass": report.tail_mass,
        "iterations": report.iterations,
        "polished": report.polished,
    }


def _check_sigma_row(
    checks: CheckLedger, row: t.Mapping[str, t.Any], equipartition_tol: float, polish: bool = False
) -> None:
    label = _label(**{"lambda": row["lambda"], "K": row["K"]})
    slack = 1e-6 * max(1.0, row["sigma"])
    checks.record(
        f"bracket[{label}]",
        row["lower"] - slack <= row["sigma"] <= row["upper"] + slack,
        row["sigma"],
        [row["lower"], row["upper"]],
    )
    checks.at_most(f"equipartition[{label}]", row["equipartition_sup"], equipartition_tol)
    checks.at_most(
        f"below_sigma_infinity[{label}]", row["sigma_over_sigma_infinity"], 1.0 + 1e-6
    )
    if polish:
        checks.record(f"polish_converged[{label}]", bool(row["polished"]), row["polished"], True)


@pipeline("sigma1d")
async def run_sigma1d(ctx: RunContext) -> Summary:
    cfg, checks = ctx.config, ctx.checks
    params = interface_1d.TransitionParams(cfg["lambda"], cfg["K"], rescaled=cfg["rescaled"])
    profile, report = interface_1d.minimize_sigma(
        params, L=cfg["L"] or None, n=cfg["n"], tol=cfg["tol"], polish=cfg["polish"]
    )
    x = profile.x
    ctx.artifacts.write_csv(
        "sigma1d_profile.csv",
        [{"x": xi, "eta1": a, "eta2": b} for xi, a, b in zip(x, profile.eta1, profile.eta2)],
        plot=("x", ["eta1", "eta2"]),
    )
    kinetic, potential = interface_1d.densities(profile, params)
    mid = 0.5 * (x[1:] + x[:-1])
    ctx.artifacts.write_csv(
        "sigma1d_equipartition.csv",
        [{"x": xi, "kinetic": k, "potential": p} for xi, k, p in zip(mid, kinetic, potential)],
        plot=("x", ["kinetic", "potential"]),
    )

    scale = math.sqrt(params.K - 1.0)
    sigma = report.sigma * scale if params.rescaled else report.sigma
    b = interface_1d.bracket(params.lambda_, params.K)
    row = {
        "lambda": params.lambda_,
        "K": params.K,
        "sigma": sigma,
        "sigma_over_sigma_infinity": sigma / interface_1d.sigma_infinity(params.lambda_),
        "lower": b.lower,
        "upper": b.upper,
        "equipartition_sup": report.equipartition_sup,
        "polished": report.polished,
    }
    _check_sigma_row(checks, row, cfg["equipartition_tol"], cfg["polish"])
    summary = {**report.as_dict(), "sigma": sigma, "bracket": [b.lower, b.overlap, b.small_lambda]}
    if params.lambda_ <= 1:
        summary["weak_limit_ratio"] = sigma / scale / interface_1d.weak_segregation_limit(params.lambda_)
    return summary


@pipeline("sigma-sweep")
async def run_sigma_sweep(ctx: RunContext) -> Summary:
    cfg, checks = ctx.config, ctx.checks
    lambdas, Ks = list(cfg["lambda"]), sorted(cfg["K_list"])
    points = [(lam, K) for lam in lambdas for K in Ks]
    worker = functools.partial(sigma_row, cfg["n"], cfg["weak_threshold"], cfg["polish"])
    rows = await ctx.pool.map_async(worker, points)
    ctx.artifacts.write_csv(
        "sigma_sweep.csv", rows, plot=("K", ["sigma", "lower", "upper"]), log_scale=True
    )

    for row in rows:
        _check_sigma_row(checks, row, cfg["equipartition_tol"], cfg["polish"])

    summary: Summary = {"points": len(rows), "limits": {}}
    split = await ctx.pool.map_async(interface_1d.split_sigma, lambdas)
    for lam, value in zip(lambdas, split):
        label = _label(**{"lambda": lam})
        expected = interface_1d.sigma_infinity(lam)
        checks.close_to(f"sigma_infinity[{label}]", value, expected, atol=cfg["infinity_tol"])
        entry: t.Dict[str, t.Any] = {"sigma_infinity": expected, "split_sigma": value}

        per_lambda = [row for row in rows if row["lambda"] == lam]
        sigmas = [row["sigma"] for row in per_lambda]
        checks.record(
            f"sigma_increasing_in_K[{label}]",
            all(b >= a - 1e-9 for a, b in zip(sigmas, sigmas[1:])),
            sigmas,
            "nondecreasing",
        )

        if 0 < lam <= 1:
            limit = interface_1d.weak_segregation_limit(lam)
            profile = interface_1d.weak_segregation_profile(lam)
            checks.close_to(f"weak_limit_quadrature[{label}]", profile.energy_quadrature, limit, rtol=1e-8)
            entry["weak_limit"] = limit
            weak = [row for row in per_lambda if row["rescaled"]]
            if len(weak) >= 2:
                estimate = interface_1d.extrapolate_weak_limit(
                    [row["K"] for row in weak], [row["sigma_over_sqrt_K_minus_1"] for row in weak]
                )
                entry["weak_extrapolation"] = estimate
                checks.close_to(f"weak_limit[{label}]", estimate, limit, rtol=cfg["weak_rtol"])
        summary["limits"][f"{lam:g}"] = entry
    return summary


# ======================= shape-stability =======================


def fuglede_row(point: t.Tuple[float, int, float]) -> t.Dict[str, t.Any]:
    R, k, amplitude = point
    w = WeightParams(R=R)
    shape = shape_limit.single_mode(w, k, amplitude)
    delta = shape.perimeter(w) - ball_perimeter(w, 1.0)
    form = shape_limit.fuglede_form(w, shape)
    return {
        "R": R,
        "k": k,
        "t": amplitude,
        "perimeter_change": delta,
        "fuglede_form": form,
        "relative_error": abs(delta - form) / abs(form),
        "mode_coefficient": shape_limit.mode_coefficient(R, k),
    }


def _k2_crossings(R: np.ndarray) -> t.List[float]:
    values = np.array([shape_limit.mode_coefficient(float(r), 2) for r in R])
    roots = []
    for i in np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]:
        roots.append(float(brentq(shape_limit.mode_coefficient, R[i], R[i + 1], args=(2,), xtol=1e-14)))
    return roots


@pipeline("shape-stability")
async def run_shape_stability(ctx: RunContext) -> Summary:
    cfg, checks = ctx.config, ctx.checks
    R = np.linspace(cfg["R_min"], cfg["R_max"], cfg["R_count"])
    ks = range(1, cfg["k_max"] + 1)
    diagram = [
        {"R": r, **{f"k{k}": shape_limit.mode_coefficient(float(r), k) for k in ks}} for r in R
    ]
    ctx.artifacts.write_csv("stability_diagram.csv", diagram, plot=("R", [f"k{k}" for k in ks]))

    summary: Summary = {}
    _, upper = shape_limit.instability_thresholds()
    roots = _k2_crossings(R)
    summary["k2_sign_changes"] = roots
    if R[0] < upper < R[-1]:
        nearest = min(roots, key=lambda x: abs(x - upper), default=math.nan)
        checks.close_to("k2_threshold", nearest, upper, atol=cfg["threshold_tol"])

    points = [(r, k, a) for r in cfg["fuglede_R"] for k in cfg["fuglede_k"] for a in cfg["fuglede_t"]]
    fuglede = await ctx.pool.map_async(fuglede_row, points)
    ctx.artifacts.write_csv("fuglede.csv", fuglede)
    t_min = min(cfg["fuglede_t"])
    for row in fuglede:
        if row["t"] != t_min:
            continue
        label = _label(R=row["R"], k=row["k"])
        checks.at_most(f"fuglede_expansion[{label}]", row["relative_error"], cfg["fuglede_rtol"])
        checks.record(
            f"fuglede_sign[{label}]",
            np.sign(row["fuglede_form"]) == np.sign(row["mode_coefficient"]),
            row["fuglede_form"],
            row["mode_coefficient"],
        )

    w = WeightParams(R=cfg["R"])
    alpha = w.alpha_bar / 4.0
    samples = cfg["samples"]
    (single, n1), (double, n2) = await ctx.pool.map_async(
        functools.partial(_constants_job, w, alpha, cfg.seed, cfg["amplitude"], cfg["symdiff_eps"] * alpha),
        [samples, 2 * samples],
    )
    ctx.artifacts.write_csv(
        "stability_constants.csv",
        [
            {
                "samples": n,
                "capped_samples": c.capped_samples,
                "volume_gap_min": c.volume_gap_min,
                "instability_max": c.instability_max,
            }
            for n, c in ((n1, single), (n2, double))
        ],
    )
    checks.at_least("volume_gap_constant_positive", single.volume_gap_min, np.finfo(float).tiny)
    checks.record("instability_constant_finite", math.isfinite(single.instability_max), single.instability_max, "finite")
    checks.at_least(
        "instability_constant_samples", single.capped_samples, 1, detail="shapes within the symdiff cap"
    )
    rtol = cfg["constant_rtol"]
    checks.close_to("volume_gap_constant_stable", double.volume_gap_min, single.volume_gap_min, rtol=rtol)
    checks.close_to("instability_constant_stable", double.instability_max, single.instability_max, rtol=rtol)
    summary["constants"] = {
        "c": single.volume_gap_min,
        "C": single.instability_max,
        "samples": n1,
        "capped_samples": single.capped_samples,
    }

    summary["poincare"] = _poincare(ctx, w, alpha)

    summary["isoperimetric"] = _isoperimetric(ctx, w)
    return summary


def _constants_job(
    w: WeightParams, alpha: float, seed: int, amplitude: float, symdiff_cap: float, count: int
) -> t.Tuple[shape_limit.StabilityConstants, int]:
    shapes = shape_limit.random_matched_shapes(w, alpha, count, seed=seed, amplitude=amplitude)
    return shape_limit.stability_constants(shapes, w, symdiff_cap=symdiff_cap), len(shapes)


def _unit_boundaries(w: WeightParams, alpha: float, count: int, seed: int, amplitude: float) -> t.List[StarShape]:
    shapes = shape_limit.random_matched_shapes(w, alpha, count, seed=seed, amplitude=amplitude)
    return [StarShape(base_radius=1.0, fourier_u=s.fourier_u) for s in shapes]


def _poincare(ctx: RunContext, w: WeightParams, alpha: float) -> Summary:
    """Lambda_delta from one sample plus the extremal family, checked on a held-out sample."""
    cfg, checks = ctx.config, ctx.checks
    count = min(cfg["samples"], 50)
    fitted = _unit_boundaries(w, alpha, count, cfg.seed, cfg["amplitude"])
    held_out = _unit_boundaries(w, alpha, count, cfg.seed + 1, cfg["amplitude"])
    rows = []
    for delta in cfg["poincare_delta"]:
        label = _label(delta=delta)
        constant = shape_limit.poincare_sweep(fitted, delta)
        held_out_constant = shape_limit.poincare_constant(held_out, delta)
        checks.record(f"poincare_finite[{label}]", math.isfinite(constant) and constant > 0, constant, "finite")
        checks.at_most(f"poincare_held_out[{label}]", held_out_constant, constant)
        rows.append({"delta": delta, "Lambda": constant, "held_out": held_out_constant})
    ctx.artifacts.write_csv("poincare.csv", rows)
    return {f"{row['delta']:g}": row["Lambda"] for row in rows}


def _isoperimetric(ctx: RunContext, w: WeightParams) -> Summary:
    checks = ctx.checks
    half = 0.5 * w.alpha_bar
    rows = []
    for V in half * np.geomspace(1e-3, 0.999, 13):
        shape = shape_limit.match_volume(DiskShape.tangent_ball(0.5 * w.R, w), float(V), w)
        rows.append({"V": V, "ratio": shape_limit.isoperimetric_ratio(shape, w), "family": "tangent"})
    ratios = [row["ratio"] for row in rows]
    band = max(ratios) / min(ratios)
    checks.at_most("isoperimetric_exponent_band", band, ctx.config["band"])

    for name, members in shape_limit.default_families(0.25 * w.alpha_bar, w, seed=ctx.config.seed).items():
        for shape in members:
            try:
                ratio = shape_limit.isoperimetric_ratio(shape, w)
            except DomainError:
                continue
            rows.append({"V": shape.volume(w), "ratio": ratio, "family": name})
    ctx.artifacts.write_csv("isoperimetric.csv", rows, columns=["family", "V", "ratio"])
    lowest = min(row["ratio"] for row in rows)
    checks.at_least("isoperimetric_ratio_positive", lowest, np.finfo(float).tiny)
    return {"band": band, "min_ratio": lowest}


# ======================= shape-regimes / crossover-check =======================


def _regime_setup(cfg: ExperimentConfig) -> t.Tuple[WeightParams, float]:
    w = WeightParams(R=cfg["R"])
    alpha1 = cfg["alpha1"] or 0.5 * w.alpha_bar
    return WeightParams(R=cfg["R"], alpha1=alpha1), alpha1


@pipeline("shape-regimes")
async def run_shape_regimes(ctx: RunContext) -> Summary:
    cfg, checks = ctx.config, ctx.checks
    w, alpha1 = _regime_setup(cfg)
    families = shape_limit.default_families(alpha1, w, count=cfg["count"], seed=cfg.seed)
    xis = sorted(cfg["xi_list"])
    verdicts = [
        shape_limit.regime_detector(alpha1, w, xi, cfg["sigma_K"], families=families, convention=cfg["convention"])
        for xi in xis
    ]
    rows = []
    for v in verdicts:
        rows.extend(v.rows())
    ctx.artifacts.write_csv("regimes.csv", rows)
    ctx.artifacts.write_csv(
        "regime_margin.csv",
        [{"xi": v.xi, "margin": v.margin, "verdict": v.verdict} for v in verdicts],
        plot=("xi", ["margin"]),
    )

    labels = [v.verdict for v in verdicts]
    if xis[0] == 0:
        checks.record("symmetry_broken_at_zero", labels[0] == shape_limit.SYMMETRY_BROKEN, labels[0], shape_limit.SYMMETRY_BROKEN)
    first_ball = next((i for i, v in enumerate(labels) if v == shape_limit.BALL_OPTIMAL), len(labels))
    checks.record(
        "verdict_monotone_in_xi",
        all(v == shape_limit.BALL_OPTIMAL for v in labels[first_ball:]),
        labels,
        "monotone",
    )
    checks.record("ball_optimal_for_large_xi", labels[-1] == shape_limit.BALL_OPTIMAL, labels[-1], shape_limit.BALL_OPTIMAL)
    threshold = xis[first_ball] if first_ball < len(xis) else math.inf
    return {"alpha1": alpha1, "verdicts": dict(zip((f"{x:g}" for x in xis), labels)), "empirical_threshold": threshold}


@pipeline("crossover-check")
async def run_crossover_check(ctx: RunContext) -> Summary:
    cfg, checks = ctx.config, ctx.checks
    w, alpha1 = _regime_setup(cfg)
    families = shape_limit.default_families(alpha1, w, count=cfg["count"], seed=cfg.seed)
    report = shape_limit.crossover_xi(alpha1, w, cfg["sigma_K"], families=families, convention=cfg["convention"])
    ctx.artifacts.write_csv(
        "crossover.csv", [{"family": name, "xi": value} for name, value in report.per_member]
    )
    checks.record("crossover_finite", math.isfinite(report.xi_hat), report.xi_hat, "finite")

    summary: Summary = {"xi_hat": report.xi_hat, "family": report.family}
    if math.isfinite(report.xi_hat) and report.xi_hat > 0:
        above = shape_limit.regime_detector(
            alpha1, w, report.xi_hat * cfg["margin"], cfg["sigma_K"], families=families, convention=cfg["convention"]
        )
        below = shape_limit.regime_detector(
            alpha1, w, report.xi_hat / cfg["margin"], cfg["sigma_K"], families=families, convention=cfg["convention"]
        )
        checks.record("ball_optimal_above_crossover", above.verdict == shape_limit.BALL_OPTIMAL, above.margin, 0.0)
        checks.record("symmetry_broken_below_crossover", below.verdict == shape_limit.SYMMETRY_BROKEN, below.margin, 0.0)
        summary["margins"] = {"above": above.margin, "below": below.margin}
    return summary
