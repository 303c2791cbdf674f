"""Scenario execution and artifact emission.

Every scenario writes its results under the output directory and finishes
with a manifest.json listing each emitted file with a sha256 digest plus the
fully resolved configuration.  Result files contain no timestamps, so a rerun
with the same configuration and master seed is byte-identical; wall-clock
metadata lives only in the manifest.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import math
import os
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .collapse import born_statistics, renewal_cycle, survival_simulation
from .config import RunConfig
from .dynamics import (
    ClassicalState,
    EvolutionConfig,
    FreeHamiltonian,
    alternating_evolve,
    newtonian_reference,
    velocity_decomposition,
)
from .ensembles import KickConfig, calibrate_step, sample_gue
from .errors import TimeoutFractionExceeded
from .estimates import full_report, report_as_json, report_as_table
from .geometry import isometry_check, overlap_vs_quadrature
from .rng import derive_stream
from .statespace import Grid, PacketParams, PhysicalConstants, make_packet

CALIBRATION_STREAM_INDEX = 2**48

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STATISTICAL = 3


class _Artifacts:
    """Collects (name, text) pairs and writes them plus the manifest."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str, kind: str) -> None:
        if self.cfg.fmt != "both" and kind in ("json", "csv") and kind != self.cfg.fmt:
            return
        self.files[name] = text

    def write(self, extra_manifest: dict | None = None) -> str:
        out = self.cfg.output_dir
        os.makedirs(out, exist_ok=True)
        digests = {}
        for name, text in sorted(self.files.items()):
            path = os.path.join(out, name)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            digests[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()
        manifest = {
            "version": __version__,
            "config": self.cfg.resolved(),
            "files": digests,
            "created_utc": datetime.now(timezone.utc).isoformat(),
        }
        if extra_manifest:
            manifest.update(extra_manifest)
        path = os.path.join(out, "manifest.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return out


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _resolve_kick(params: dict, n_points: int, seed: int) -> KickConfig:
    """Kick from an explicit scale, or calibrated to the requested step length."""
    scale = params["kick_scale"]
    if params.get("eps_step", 0.0) > 0.0 and scale == 0.0:
        scale = calibrate_step(
            n_points,
            params["eps_step"],
            params["kick_dt"],
            derive_stream(seed, CALIBRATION_STREAM_INDEX),
        )
    return KickConfig(dt=params["kick_dt"], scale=scale, dimension=n_points)


# --- scenario implementations -------------------------------------------------


def _run_born(cfg: RunConfig, art: _Artifacts) -> int:
    p = cfg.params
    grid = Grid(
        n_points=p["grid_points"],
        length=p["grid_length"],
        origin=-p["grid_length"] / 2.0,
    )
    weights = np.asarray(p["weights"], dtype=float)
    if abs(weights.sum() - 1.0) > 1e-9:
        weights = weights / weights.sum()
    amplitudes = [complex(math.sqrt(w)) for w in weights]
    kick = _resolve_kick(p, grid.n_points, cfg.master_seed)
    exit_code = EXIT_OK
    try:
        report = born_statistics(
            amplitudes,
            list(p["centers"]),
            p["sigma"],
            kick,
            p["n_runs"],
            cfg.master_seed,
            grid=grid,
            n_steps_max=p["n_steps_max"],
            n_workers=cfg.n_workers,
        )
    except TimeoutFractionExceeded as exc:
        report = exc.report
        exit_code = EXIT_STATISTICAL
    body = {
        "weights": list(report.weights),
        "counts": list(report.counts),
        "n_runs": report.n_runs,
        "chi2_p": report.chi2_p,
        "n_timeouts": report.n_timeouts,
        "kick_scale": kick.scale,
        "kick_dt": kick.dt,
    }
    art.add("born_report.json", _json_text(body), "json")
    lines = [
        json.dumps(
            {
                "seed": r.seed,
                "outcome": r.outcome,
                "hitting_step": r.hitting_step,
                "timeout": r.timeout,
            },
            sort_keys=True,
        )
        for r in report.records
    ]
    art.add("runs.ndjson", "\n".join(lines) + "\n", "json")

    if p["trace_first_run"]:
        from .collapse import run_collapse, superposition_state
        from .geometry import ClassSpec

        initial = superposition_state(amplitudes, list(p["centers"]), p["sigma"], grid)
        detectors = [ClassSpec(center=c, resolution=p["sigma"]) for c in p["centers"]]
        run = run_collapse(
            initial,
            detectors,
            kick,
            p["n_steps_max"],
            derive_stream(cfg.master_seed, 0),
            record_trace=True,
            seed=0,
        )
        buf = io.StringIO()
        buf.write("step,tau,s\n")
        for step, (t, s) in enumerate(zip(run.trace_tau, run.trace_s)):
            buf.write(f"{step},{float(t)!r},{float(s)!r}\n")
        art.add("trace_run0.csv", buf.getvalue(), "csv")
    return exit_code


def _run_survival(cfg: RunConfig, art: _Artifacts) -> int:
    p = cfg.params
    report = survival_simulation(
        p["distribution"], p["n_walks"], p["n_max"], derive_stream(cfg.master_seed)
    )
    art.add(
        "survival_report.json",
        _json_text(
            {
                "step_distribution": report.step_distribution,
                "n_walks": report.n_walks,
                "max_abs_deviation": report.max_abs_deviation,
                "n_values": report.n_values.tolist(),
                "empirical_survival": report.empirical_survival.tolist(),
                "exact_survival": report.exact_survival.tolist(),
            }
        ),
        "json",
    )
    buf = io.StringIO()
    buf.write("n,empirical_survival,exact_survival\n")
    for n, emp, ex in zip(
        report.n_values, report.empirical_survival, report.exact_survival
    ):
        buf.write(f"{int(n)},{float(emp)!r},{float(ex)!r}\n")
    art.add("survival.csv", buf.getvalue(), "csv")
    return EXIT_OK


def _run_trajectory(cfg: RunConfig, art: _Artifacts) -> int:
    p = cfg.params
    grid = Grid(
        n_points=p["grid_points"],
        length=p["grid_length"],
        origin=-p["grid_length"] / 2.0,
    )
    consts = PhysicalConstants()
    ham = FreeHamiltonian(grid=grid, consts=consts)
    kick = _resolve_kick(p, grid.n_points, cfg.master_seed)
    evo = EvolutionConfig(
        dt_free=p["dt_free"], n_free_substeps=p["substeps_per_window"], kick=kick
    )
    t_final = evo.window_time * p["n_windows"]
    packet = PacketParams(center=p["start"], width=p["sigma"], momentum=p["momentum"])
    initial = make_packet(packet, grid, consts)

    taus = np.zeros((p["n_seeds"], p["n_windows"] + 1))
    first_trace = None
    for i in range(p["n_seeds"]):
        _, trace = alternating_evolve(
            initial,
            ham,
            evo,
            t_final,
            derive_stream(cfg.master_seed, i),
            n_windows=p["n_windows"],
        )
        taus[i] = trace.tau
        if i == 0:
            first_trace = trace
    times = first_trace.times
    newton = newtonian_reference(
        ClassicalState(p["start"], p["momentum"]), ham, t_final, evo.window_time
    )
    tau_mean = taus.mean(axis=0)
    tau_se = taus.std(axis=0, ddof=1) / math.sqrt(p["n_seeds"])
    tau_newton = np.interp(times, newton.times, newton.positions)

    buf = io.StringIO()
    buf.write("t,tau_mean,tau_se,tau_newton\n")
    for row in zip(times, tau_mean, tau_se, tau_newton):
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    art.add("trajectory_mean.csv", buf.getvalue(), "csv")

    buf = io.StringIO()
    buf.write("t,tau,s,norm,energy\n")
    for row in zip(
        first_trace.times,
        first_trace.tau,
        first_trace.s,
        first_trace.norm,
        first_trace.energy,
    ):
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    art.add("trace_seed0.csv", buf.getvalue(), "csv")

    dev = np.abs(tau_mean[1:] - tau_newton[1:]) / np.where(tau_se[1:] > 0, tau_se[1:], np.inf)
    art.add(
        "trajectory_report.json",
        _json_text(
            {
                "n_seeds": p["n_seeds"],
                "n_windows": p["n_windows"],
                "kick_scale": kick.scale,
                "max_deviation_over_se": float(dev.max()) if dev.size else 0.0,
                "final_tau_mean": float(tau_mean[-1]),
                "final_tau_newton": float(tau_newton[-1]),
            }
        ),
        "json",
    )
    return EXIT_OK


def _run_renewal(cfg: RunConfig, art: _Artifacts) -> int:
    p = cfg.params
    stats = renewal_cycle(
        cfg.environment,
        p["n_cycles"],
        derive_stream(cfg.master_seed),
        q=p["q"],
        dt=p["dt"] or None,
        d_a=p["d_a"] or None,
    )
    art.add(
        "renewal_report.json",
        _json_text(
            {
                "n_cycles": int(stats.return_steps.size),
                "dt": stats.dt,
                "d_a": stats.d_a,
                "q": stats.q,
                "n_truncation": stats.n_truncation,
                "truncated_mass": stats.truncated_mass,
                "n_clamped": stats.n_clamped,
                "displacement_at_q": stats.displacement_at_q,
                "rms_displacement": float(
                    np.sqrt(np.mean(stats.displacements**2))
                ),
                "final_cumulative_deviation": float(stats.cumulative_deviation[-1]),
            }
        ),
        "json",
    )
    buf = io.StringIO()
    buf.write("cycle,return_steps,cycle_time,displacement,cumulative_deviation\n")
    for i, (n, t, d, c) in enumerate(
        zip(
            stats.return_steps,
            stats.cycle_times,
            stats.displacements,
            stats.cumulative_deviation,
        )
    ):
        buf.write(f"{i},{int(n)},{float(t)!r},{float(d)!r},{float(c)!r}\n")
    art.add("cycles.csv", buf.getvalue(), "csv")
    return EXIT_OK


def _run_geometry(cfg: RunConfig, art: _Artifacts) -> int:
    p = cfg.params
    grid = Grid(
        n_points=p["grid_points"],
        length=p["grid_length"],
        origin=-p["grid_length"] / 2.0,
    )
    sigma = p["sigma"]
    buf = io.StringIO()
    report = isometry_check(
        grid, sigma, p["n_samples"], p["max_sep_sigmas"] * sigma, csv_sink=buf
    )
    art.add("isometry.csv", buf.getvalue(), "csv")

    lattice_n = p["lattice_n"]
    max_overlap_err = 0.0
    for i in range(lattice_n):
        for j in range(lattice_n):
            da = (i + 1) / lattice_n * 3.0 * sigma
            dp = (j + 1) / lattice_n * p["lattice_max_dp_sigma"] / sigma
            closed, quad = overlap_vs_quadrature(
                PacketParams(-da / 2.0, sigma, -dp / 2.0),
                PacketParams(+da / 2.0, sigma, +dp / 2.0),
                grid,
            )
            max_overlap_err = max(max_overlap_err, abs(closed - quad))
    art.add(
        "geometry_report.json",
        _json_text(
            {
                "isometry_max_abs_error": report.max_abs_error,
                "isometry_samples": report.samples,
                "small_sep_ratio": report.small_sep_ratio,
                "overlap_lattice_max_abs_error": max_overlap_err,
                "lattice_n": lattice_n,
            }
        ),
        "json",
    )
    return EXIT_OK


def _run_velocity(cfg: RunConfig, art: _Artifacts) -> int:
    p = cfg.params
    grid = Grid(
        n_points=p["grid_points"],
        length=p["grid_length"],
        origin=-p["grid_length"] / 2.0,
    )
    consts = PhysicalConstants()
    g = p["linear_coefficient"]
    rows = []
    for coeff in (0.0, g):
        potential = None if coeff == 0.0 else coeff * grid.points
        force = None if coeff == 0.0 else (lambda a, c=coeff: -c)
        ham = FreeHamiltonian(grid=grid, consts=consts, potential=potential, force_fn=force)
        for momentum in p["momenta"]:
            dec = velocity_decomposition(
                PacketParams(0.0, p["sigma"], momentum), ham
            )
            rel = abs(dec.total_numeric - dec.total_analytic) / dec.total_analytic
            rows.append((momentum, coeff, dec, rel))
    buf = io.StringIO()
    buf.write(
        "momentum,linear_coefficient,v_term,w_term,spread_term,"
        "total_analytic,total_numeric,rel_error\n"
    )
    for momentum, coeff, dec, rel in rows:
        buf.write(
            ",".join(
                repr(float(v))
                for v in (
                    momentum,
                    coeff,
                    dec.v_term,
                    dec.w_term,
                    dec.spread_term,
                    dec.total_analytic,
                    dec.total_numeric,
                    rel,
                )
            )
            + "\n"
        )
    art.add("velocity.csv", buf.getvalue(), "csv")
    art.add(
        "velocity_report.json",
        _json_text({"max_rel_error": max(r[-1] for r in rows)}),
        "json",
    )
    return EXIT_OK


def _run_estimate(cfg: RunConfig, art: _Artifacts) -> int:
    p = cfg.params
    report = full_report(cfg.environment, dt=p["dt"], q=p["q"])
    art.add("estimate_report.json", report_as_json(report), "json")
    art.add("estimate_table.txt", report_as_table(report), "csv")
    return EXIT_OK


def _run_gue_stats(cfg: RunConfig, art: _Artifacts) -> int:
    from scipy import stats as sstats

    p = cfg.params
    rng = derive_stream(cfg.master_seed)
    n = p["dimension"]
    scale = p["scale"]
    sample = sample_gue(n, scale, rng)
    eigvals = np.linalg.eigvalsh(sample.entries)
    radius = 2.0 * math.sqrt(n) * scale

    def semicircle_cdf(x):
        x = np.clip(x / radius, -1.0, 1.0)
        return 0.5 + (x * np.sqrt(1.0 - x**2) + np.arcsin(x)) / np.pi

    grid_sorted = np.sort(eigvals)
    empirical_hi = np.arange(1, n + 1) / n
    empirical_lo = np.arange(0, n) / n
    theory = semicircle_cdf(grid_sorted)
    ks = float(
        np.max(np.maximum(np.abs(theory - empirical_hi), np.abs(theory - empirical_lo)))
    )
    herm = float(np.max(np.abs(sample.entries - sample.entries.conj().T)))

    draws = p["n_moment_draws"]
    second = 0.0
    for _ in range(draws):
        small = sample_gue(8, scale, rng)
        second += float(np.mean(np.abs(small.entries[np.triu_indices(8, 1)]) ** 2))
    second /= draws

    buf = io.StringIO()
    buf.write("index,eigenvalue\n")
    for i, val in enumerate(grid_sorted):
        buf.write(f"{i},{float(val)!r}\n")
    art.add("spectrum.csv", buf.getvalue(), "csv")
    art.add(
        "gue_report.json",
        _json_text(
            {
                "dimension": n,
                "scale": scale,
                "ks_distance_semicircle": ks,
                "hermiticity_max_abs": herm,
                "offdiag_second_moment_over_scale2": second / scale**2,
                "kolmogorov_ref": float(sstats.kstwobign.ppf(0.95) / math.sqrt(n)),
            }
        ),
        "json",
    )
    return EXIT_OK


_SCENARIO_RUNNERS = {
    "born": _run_born,
    "survival": _run_survival,
    "trajectory": _run_trajectory,
    "renewal": _run_renewal,
    "geometry-check": _run_geometry,
    "velocity-decomposition": _run_velocity,
    "estimate": _run_estimate,
    "gue-stats": _run_gue_stats,
}


def run_scenario(cfg: RunConfig) -> int:
    """Execute the configured scenario; returns the process exit code."""
    art = _Artifacts(cfg)
    code = _SCENARIO_RUNNERS[cfg.scenario](cfg, art)
    art.write(extra_manifest={"exit_code": code})
    return code
