"""Figure rendering: one function per figure kind, batch PNG output.

Figures are deterministic for fixed inputs: fixed layout, no timestamps in
the PNG metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import schemas

_SAVE_KW = dict(dpi=120, metadata={"Software": "rmsim-plots"})


@dataclass(frozen=True)
class FigureSpec:
    kind: str  # born | survival | trace | trajectory
    inputs: tuple[str, ...]
    output: str
    title: str = ""
    log_y: bool = False
    detect_s: float | None = None

    def __post_init__(self):
        if self.kind not in _RENDERERS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("need at least one input file")


def _fig(title: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    if title:
        ax.set_title(title)
    return fig, ax


def _render_born(spec: FigureSpec) -> None:
    data = schemas.load_born(spec.inputs[0])
    counts = np.asarray(data["counts"], dtype=float)
    weights = np.asarray(data["weights"], dtype=float)
    total = counts.sum()
    freqs = counts / total if total > 0 else counts
    x = np.arange(counts.size)
    fig, ax = _fig(spec.title or "outcome frequencies vs squared amplitudes")
    ax.bar(x, freqs, width=0.6, color="#4878a8", label="observed frequency")
    for i, w in enumerate(weights):
        ax.hlines(w, i - 0.38, i + 0.38, colors="#c44e52", linewidth=2.0,
                  label="|c|^2 weight" if i == 0 else None)
    ax.set_xticks(x, [f"outcome {i}" for i in x])
    ax.set_ylabel("frequency")
    label = f"n_runs = {data['n_runs']}, chi2 p = {data['chi2_p']:.3g}"
    ax.annotate(label, xy=(0.02, 0.95), xycoords="axes fraction", fontsize=9)
    ax.legend(loc="upper right")
    fig.savefig(spec.output, **_SAVE_KW)
    plt.close(fig)


def _render_survival(spec: FigureSpec) -> None:
    data = schemas.load_survival(spec.inputs[0])
    n = np.asarray(data["n"])
    fig, ax = _fig(spec.title or "first-passage survival")
    ax.plot(n, data["exact_survival"], "-", color="#c44e52",
            label="exact C(2n,n)/2^(2n)")
    ax.plot(n, data["empirical_survival"], "o", ms=3.5, color="#4878a8",
            label="simulated walks")
    ax.set_xlabel("steps n")
    ax.set_ylabel("P(no passage below start)")
    if spec.log_y:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.legend()
    fig.savefig(spec.output, **_SAVE_KW)
    plt.close(fig)


def _render_trace(spec: FigureSpec) -> None:
    data = schemas.load_trace(spec.inputs[0])
    tau = np.asarray(data["tau"])
    s = np.asarray(data["s"])
    fig, ax = _fig(spec.title or "walk on the (tau, s) plane")
    ax.plot(tau, s, "-", lw=0.7, color="#4878a8")
    ax.plot(tau[0], s[0], "o", color="#55a868", label="start")
    if spec.detect_s is not None:
        ax.axhspan(min(s.min(), spec.detect_s) - 0.2, spec.detect_s,
                   color="#c44e52", alpha=0.15, label="detection band")
        ax.axhline(spec.detect_s, color="#c44e52", lw=1.0)
    ax.set_xlabel("tau (position expectation)")
    ax.set_ylabel("s = ln delta_z")
    ax.legend(loc="best")
    fig.savefig(spec.output, **_SAVE_KW)
    plt.close(fig)


def _render_trajectory(spec: FigureSpec) -> None:
    data = schemas.load_trajectory(spec.inputs[0])
    t = np.asarray(data["t"])
    mean = np.asarray(data["tau_mean"])
    se = np.asarray(data["tau_se"])
    newton = np.asarray(data["tau_newton"])
    panels = 2 if len(spec.inputs) > 1 else 1
    fig, axes = plt.subplots(
        1, panels, figsize=(6.4 * panels, 4.2), constrained_layout=True, squeeze=False
    )
    ax = axes[0][0]
    if spec.title:
        ax.set_title(spec.title)
    ax.fill_between(t, mean - 3 * se, mean + 3 * se, color="#4878a8", alpha=0.25,
                    label="mean tau +- 3 SE")
    ax.plot(t, mean, "-", color="#4878a8", label="ensemble mean tau")
    ax.plot(t, newton, "--", color="#c44e52", label="Newtonian a + p t / m")
    ax.set_xlabel("t")
    ax.set_ylabel("tau")
    ax.legend()
    if panels == 2:
        cyc = schemas.load_cycles(spec.inputs[1])
        idx = np.asarray(cyc["cycle"]) + 1.0
        cum = np.asarray(cyc["cumulative_deviation"])
        rms = np.sqrt(np.mean(cum**2 / idx))
        ax2 = axes[0][1]
        ax2.plot(idx, cum, "-", lw=0.7, color="#4878a8",
                 label="cumulative deviation")
        ax2.plot(idx, rms * np.sqrt(idx), "--", color="#c44e52",
                 label="sqrt(n) envelope")
        ax2.plot(idx, -rms * np.sqrt(idx), "--", color="#c44e52")
        ax2.set_xlabel("renewal cycle")
        ax2.set_ylabel("deviation from drift line")
        ax2.legend()
    fig.savefig(spec.output, **_SAVE_KW)
    plt.close(fig)


_RENDERERS = {
    "born": _render_born,
    "survival": _render_survival,
    "trace": _render_trace,
    "trajectory": _render_trajectory,
}


def render(spec: FigureSpec) -> str:
    """Render the figure described by spec; returns the output path."""
    _RENDERERS[spec.kind](spec)
    return spec.output
