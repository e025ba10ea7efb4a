"""End-to-end experiment orchestration behind the CLI subcommands.

``run_experiment`` produces one reconstruction with its full artifact bundle;
``run_tau`` emits exponent-field artifacts for a list of measurement-side
sets; ``run_sweep`` reuses one assembled system across a noise-level/seed
grid and fits per-probe decay rates.

All artifacts are deterministic functions of the configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import evaluate as ev
from . import io as hio
from . import svg
from .basis import (BaseSolutionSet, DiscreteSystem, assemble_system,
                    build_basis, compute_base_solutions, discrete_norms)
from .config import ExperimentConfig
from .errors import ValidationError
from .forward import CauchyData, add_noise, sample_exact, trace_cauchy
from .grid import BoundaryPartition, Grid2D, boundary_partition, build_grid
from .measure import IndicateField, compute_indicate, reliable_region
from .tikhonov import ReconstructionResult, TikhonovConfig, reconstruct


@dataclass
class PipelineState:
    """Heavy shared objects, built once per configuration geometry."""

    cfg: ExperimentConfig
    grid: Grid2D
    partition: BoundaryPartition
    base_set: BaseSolutionSet
    system: DiscreteSystem
    tau: IndicateField
    clean_data: CauchyData


def tik_config(cfg: ExperimentConfig) -> TikhonovConfig:
    return TikhonovConfig(
        alpha_rule=cfg["alpha_rule"],
        alpha_c=cfg["alpha_c"],
        alpha_fixed=cfg["alpha_fixed"],
        reg_mode=cfg["reg_mode"],
        data_weights=(cfg["w_f"], cfg["w_g"]),
    )


def build_state(cfg: ExperimentConfig, threads: int = 1) -> PipelineState:
    grid = build_grid(cfg.rect, cfg["h"])
    partition = boundary_partition(grid, cfg["gamma_sides"])
    basis = build_basis(cfg.tilde_rect, cfg["h"], cfg["basis_kind"],
                        omega_rect=cfg.rect, arcs_per_side=cfg["arcs_per_side"])
    base_set = compute_base_solutions(basis, tol=cfg["solver_tol"],
                                      method=cfg["solver"], threads=threads)
    system = assemble_system(base_set, partition, reg_mode=cfg["reg_mode"],
                             norm_order=cfg["norm_order"])
    tau = compute_indicate(grid, partition, tol=cfg["solver_tol"],
                           method=cfg["solver"],
                           exclusion_band=cfg["exclusion_band"])
    clean = trace_cauchy(cfg.exact_solution(), partition)
    return PipelineState(cfg=cfg, grid=grid, partition=partition,
                         base_set=base_set, system=system, tau=tau,
                         clean_data=clean)


def _reconstruct_for(state: PipelineState, level: float, seed: int) -> tuple[CauchyData, ReconstructionResult]:
    cfg = state.cfg
    data = add_noise(state.clean_data, level, seed, cfg["noise_model"])
    result = reconstruct(state.system, data, tik_config(cfg), state.base_set,
                         state.grid)
    return data, result


def run_experiment(cfg: ExperimentConfig, out_dir=None,
                   threads: int = 1, state: PipelineState | None = None) -> dict:
    """One reconstruction; writes the artifact bundle when out_dir is given."""
    if state is None:
        state = build_state(cfg, threads=threads)
    data, result = _reconstruct_for(state, cfg["noise_level"], cfg["seed"])
    exact = cfg.exact_solution()
    exact_field = sample_exact(exact, state.grid)
    err = ev.pointwise_error(result.u_star, exact)
    mask, contour = reliable_region(state.tau, cfg["threshold"])
    region = ev.reliability_summary(err, state.tau, cfg["threshold"])
    sup_exact = float(np.abs(exact_field.values).max())

    level = cfg["noise_level"]
    envelope = envelope_degraded = None
    if 0.0 < level < 1.0:
        envelope = ev.envelope_check(err, state.tau, level, m_used=sup_exact)
        eps_tilde = level ** cfg["tau0"]
        if 0.0 < eps_tilde < 1.0:
            envelope_degraded = ev.envelope_check(err, state.tau, eps_tilde,
                                                  m_used=sup_exact)

    ci, cj = state.grid.nearest_node(
        0.5 * (cfg.rect.x0 + cfg.rect.x1), 0.5 * (cfg.rect.y0 + cfg.rect.y1))
    summary = {
        "config": cfg.to_dict(),
        "grid": {"nx": state.grid.nx, "ny": state.grid.ny, "h": state.grid.h},
        "n_basis": state.base_set.n,
        "m": state.partition.m,
        "alpha_used": result.alpha_used,
        "condition_estimate": result.condition_estimate,
        "residual_f": result.residual_f,
        "residual_g": result.residual_g,
        "reg_norm": result.reg_norm,
        "noise": {
            "level": data.noise_level,
            "seed": data.seed,
            "model": data.noise_model,
            "realized_eps": data.realized_eps,
        },
        "error": {
            "max": float(err.values.max()),
            "median": float(np.median(err.values)),
            "mean": float(err.values.mean()),
            "sup_exact": sup_exact,
        },
        "tau_center": float(state.tau.tau.values[cj, ci]),
        "reliable_fraction": float(mask.mean()),
        "reliability": region.to_jsonable(),
        "envelope": envelope.to_jsonable() if envelope else None,
        "envelope_degraded": (
            {"tau0": cfg["tau0"], **envelope_degraded.to_jsonable()}
            if envelope_degraded else None
        ),
    }

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        hio.write_field_csv(out / "u_star.csv", result.u_star)
        hio.write_field_csv(out / "error.csv", err)
        hio.write_field_csv(out / "exact.csv", exact_field)
        hio.write_field_csv(out / "tau.csv", state.tau.tau)
        hio.dump_json(out / "tau_contour.json",
                      {"level": contour.level, "polylines": contour.to_jsonable()})
        hio.write_vector_csv(out / "b.csv", result.b)
        hio.write_cauchy_csv(out / "cauchy.csv", data, out / "cauchy.json")
        svg.render_heatmap(exact_field, out / "exact.svg", title="exact solution")
        svg.render_heatmap(result.u_star, out / "u_star.svg", title="reconstruction")
        svg.render_heatmap(err, out / "error.svg", contours=contour,
                           title="absolute error")
        svg.render_heatmap(state.tau.tau, out / "tau.svg", contours=contour,
                           title="reliability exponent")
        hio.dump_json(out / "summary.json", summary)

    return {
        "summary": summary,
        "state": state,
        "result": result,
        "error_field": err,
        "exact_field": exact_field,
        "region_mask": mask,
        "contour": contour,
        "data": data,
    }


def run_tau(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Exponent-field artifacts for every configured measurement-side set."""
    grid = build_grid(cfg.rect, cfg["h"])
    panels = []
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    ci, cj = grid.nearest_node(0.5 * (cfg.rect.x0 + cfg.rect.x1),
                               0.5 * (cfg.rect.y0 + cfg.rect.y1))
    for sides in cfg["tau_gamma_sets"]:
        partition = boundary_partition(grid, sides)
        ind = compute_indicate(grid, partition, tol=cfg["solver_tol"],
                               method=cfg["solver"],
                               exclusion_band=cfg["exclusion_band"])
        _, contour = reliable_region(ind, cfg["threshold"])
        tag = "-".join(sorted(sides))
        panel = {
            "sides": sorted(sides),
            "tau_center": float(ind.tau.values[cj, ci]),
            "n_polylines": len(contour.polylines),
        }
        if out is not None:
            hio.write_field_csv(out / f"tau_{tag}.csv", ind.tau)
            hio.dump_json(out / f"tau_{tag}_contour.json",
                          {"level": contour.level,
                           "polylines": contour.to_jsonable()})
            svg.render_heatmap(ind.tau, out / f"tau_{tag}.svg", contours=contour,
                               title=f"reliability exponent, measured: {tag}")
            panel["files"] = [f"tau_{tag}.csv", f"tau_{tag}_contour.json",
                              f"tau_{tag}.svg"]
        panels.append(panel)
    summary = {"config": cfg.to_dict(), "panels": panels}
    if out is not None:
        hio.dump_json(out / "tau_summary.json", summary)
    return summary


def run_sweep(cfg: ExperimentConfig, out_dir=None, threads: int = 1) -> dict:
    """Noise-level/seed sweep reusing one assembled system.

    Probes are auto-selected to span the certified exponent band (see
    evaluate.auto_probe_nodes).  Per probe: mean error across seeds at each
    level, then the log-log decay slope.  Also reports the rank correlation
    between slope and the exponent value over probes with exponent in
    [0.3, 0.9], the fitted envelope constant per (level, seed), and the
    penalty-norm trend across levels.
    """
    levels = list(cfg["eps_levels"])
    seeds = list(cfg["seeds"])
    if len(levels) < 3:
        raise ValidationError("sweep needs at least 3 eps levels")
    state = build_state(cfg, threads=threads)
    g = state.grid
    t = state.tau.tau.values

    probe_nodes = ev.auto_probe_nodes(state.tau)

    err_by_level = {lv: np.zeros(len(probe_nodes)) for lv in levels}
    c_fits = []
    reg_norms = {lv: [] for lv in levels}
    for lv in levels:
        for seed in seeds:
            data, result = _reconstruct_for(state, lv, seed)
            err = ev.pointwise_error(result.u_star, cfg.exact_solution())
            vals = np.array([err.values[j, i] for i, j in probe_nodes])
            err_by_level[lv] += vals / len(seeds)
            reg_norms[lv].append(result.reg_norm)
            if 0.0 < lv < 1.0:
                rep = ev.envelope_check(err, state.tau, lv)
                c_fits.append({"eps": lv, "seed": seed, "c_fit": rep.c_fit})

    probes = []
    for k, (i, j) in enumerate(probe_nodes):
        pairs = [(lv, max(err_by_level[lv][k], 1e-300)) for lv in levels]
        slope = ev.rate_fit(pairs)
        probes.append({
            "x": float(g.xs[i]), "y": float(g.ys[j]),
            "tau": float(t[j, i]),
            "err": float(err_by_level[levels[-1]][k]),
            "slope": slope,
        })

    in_range = [p for p in probes if 0.3 <= p["tau"] <= 0.9]
    spearman = None
    if len(in_range) >= 2:
        spearman = ev.spearman_rank([p["slope"] for p in in_range],
                                    [p["tau"] for p in in_range])
    target = min(probes, key=lambda p: abs(p["tau"] - 0.7))

    mean_reg = [float(np.mean(reg_norms[lv])) for lv in levels]
    reg_slope = float(np.polyfit(np.log(levels), np.log(mean_reg), 1)[0])

    summary = {
        "config": cfg.to_dict(),
        "probes": probes,
        "probes_in_range": len(in_range),
        "spearman_slope_tau": spearman,
        "probe_near_07": target,
        "envelope_c_fits": c_fits,
        "reg_norm_by_level": {f"{lv:g}": mean_reg[k] for k, lv in enumerate(levels)},
        "reg_norm_log_slope": reg_slope,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["x,y,tau,err,slope"]
        for p in probes:
            lines.append(",".join(f"{p[k]:.17g}" for k in ("x", "y", "tau", "err", "slope")))
        (out / "probes.csv").write_text("\n".join(lines) + "\n")
        hio.dump_json(out / "sweep.json", summary)
    return summary
