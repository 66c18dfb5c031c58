"""One renderer per figure id, all reading validated harness CSV rows.

No statistics happen here beyond what the CSVs already contain; each
function just draws. Output is deterministic: fixed style, fixed svg
hash salt, and no embedded dates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import FIGURE_IDS, SchemaError, load_rows

STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "potfigs",
}

KIND_ORDER = ["fpsb", "spsb", "allpay", "woa", "tullock"]


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    input_csv: Path
    output_path: Path
    format: str = "png"

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise SchemaError(f"unknown figure id {self.figure_id!r}")
        if self.format not in ("png", "svg"):
            raise SchemaError(f"format must be png or svg, got {self.format!r}")


def _settings_in_order(rows):
    seen = []
    for r in rows:
        key = r.get("setting", r.get("kind"))
        if key not in seen:
            seen.append(key)
    return seen


def _fig2(rows, ax):
    edges = np.linspace(0.0, 1.0, 41)
    for setting in _settings_in_order(rows):
        values = [r["potentialness"] for r in rows
                  if r["setting"] == setting and r["potentialness"] is not None]
        ax.hist(values, bins=edges, density=True, histtype="step", lw=1.8, label=str(setting))
    ax.set_xlabel("potentialness")
    ax.set_ylabel("empirical density")
    ax.set_title("Potentialness of random games")
    ax.legend(title="setting")


def _fig3(rows, ax):
    settings = [str(r["setting"]) for r in rows]
    times = [r["mean_potentialness_seconds"] * 1e3 for r in rows]
    ax.bar(settings, times, color="tab:blue")
    ax.set_ylabel("mean time per game [ms]")
    ax.set_xlabel("setting")
    ax.set_title("Potentialness runtime with precomputed operators")
    for x, r in enumerate(rows):
        ax.annotate(f"build {r['construction_seconds']:.2g}s", (x, times[x]),
                    ha="center", va="bottom", fontsize=8)


def _fig4(rows, ax):
    for r in rows:
        ax.hlines(r["spne_fraction"], r["min_potentialness"], r["max_potentialness"], lw=2)
        ax.plot([r["mean_potentialness"]], [r["spne_fraction"]], "o", ms=7)
        ax.annotate(str(r["setting"]), (r["mean_potentialness"], r["spne_fraction"]),
                    textcoords="offset points", xytext=(4, 5), fontsize=8)
    ax.axhline(1 - math.exp(-1), ls=":", color="gray", label="1 - 1/e")
    ax.set_xlim(0, 1)
    ax.set_xlabel("potentialness")
    ax.set_ylabel("fraction of games with a strict pure NE")
    ax.set_title("Strict-NE existence across settings")
    ax.legend()


def _binned_curves(rows, ax, shaded: bool):
    for setting in _settings_in_order(rows):
        pts = [
            ((r["lo"] + r["hi"]) / 2, r["convergence_fraction"], r["convergence_stddev"])
            for r in rows
            if r["setting"] == setting and r["convergence_fraction"] is not None
        ]
        if not pts:
            continue
        x, y, sd = (np.array(v, dtype=float) for v in zip(*pts))
        ax.plot(x, y, "-o", ms=4, label=str(setting))
        if shaded:
            sd = np.nan_to_num(sd)
            ax.fill_between(x, np.clip(y - sd, 0, 1), np.clip(y + sd, 0, 1), alpha=0.2)
    ax.set_xlim(0, 1)
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("potentialness")
    ax.set_ylabel("convergence fraction")
    ax.legend(title="setting")


def _fig5(rows, ax):
    _binned_curves(rows, ax, shaded=False)
    ax.set_title("Mirror-descent convergence vs potentialness (games with a strict NE)")


def _fig9(rows, ax):
    _binned_curves(rows, ax, shaded=True)
    ax.set_title("Convergence from random starts (band: across-game stddev)")


def _fig6(rows, ax):
    value_settings = []
    for r in rows:
        if r["valuations"] not in value_settings:
            value_settings.append(r["valuations"])
    styles = ["-", "--", ":", "-."]
    colors = {k: f"C{i}" for i, k in enumerate(KIND_ORDER)}
    for kind in _settings_in_order(rows):
        for v_idx, vals in enumerate(value_settings):
            pts = [(r["n_actions"], r["potentialness"]) for r in rows
                   if r["kind"] == kind and r["valuations"] == vals
                   and r["potentialness"] is not None]
            if not pts:
                continue
            x, y = zip(*sorted(pts))
            label = f"{kind} (v={vals})" if len(value_settings) > 1 else str(kind)
            ax.plot(x, y, styles[v_idx % len(styles)],
                    color=colors.get(kind), label=label)
    ax.set_xlabel("actions per player")
    ax.set_ylabel("potentialness")
    ax.set_ylim(0, 1)
    ax.set_title("Economic games across discretizations")
    ax.legend(fontsize=7, ncols=2)


def _fig7(rows, ax):
    kinds = [k for k in KIND_ORDER if any(r["kind"] == k for r in rows)]
    kinds += [k for k in _settings_in_order(rows) if k not in kinds]
    cmap = plt.get_cmap("viridis")
    for yi, kind in enumerate(kinds):
        kind_rows = [r for r in rows if r["kind"] == kind]
        for r in kind_rows:
            if r["potentialness"] is None:
                continue
            ax.scatter([r["potentialness"]], [yi], marker="s", s=150,
                       c=[cmap(r["convergence_fraction"])], edgecolors="none")
        star_x = kind_rows[0]["original_potentialness"]
        ax.scatter([star_x], [yi], marker="*", s=220, c="red", edgecolors="black",
                   linewidths=0.5, zorder=3)
    ax.set_yticks(range(len(kinds)), kinds)
    ax.set_xlim(-0.02, 1.02)
    ax.set_xlabel("potentialness of the blended game")
    ax.set_title("Convergence across potential/harmonic blends (star: original game)")
    sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(0, 1))
    plt.colorbar(sm, ax=ax, label="convergence fraction")


def _fig8(rows, ax):
    kinds = [k for k in KIND_ORDER if any(r["kind"] == k for r in rows)]
    kinds += [k for k in _settings_in_order(rows) if k not in kinds]
    type_counts = sorted({r["n_types"] for r in rows})
    width = 0.8 / max(len(type_counts), 1)
    for vi, v in enumerate(type_counts):
        xs, ys = [], []
        for ki, kind in enumerate(kinds):
            match = [r for r in rows if r["kind"] == kind and r["n_types"] == v]
            if match:
                xs.append(ki + (vi - (len(type_counts) - 1) / 2) * width)
                ys.append(match[0]["potentialness"])
        ax.bar(xs, ys, width=width * 0.95, label=f"{v} types")
    ax.set_xticks(range(len(kinds)), kinds)
    ax.set_ylabel("potentialness")
    ax.set_ylim(0, 1)
    ax.set_title("Bayesian games: potentialness by number of types")
    ax.legend()


RENDERERS = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
    "fig9": _fig9,
}


def render(spec: FigureSpec) -> Path:
    """Validate the input CSV and write one image; raises SchemaError on bad input."""
    rows = load_rows(spec.input_csv, spec.figure_id)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        try:
            RENDERERS[spec.figure_id](rows, ax)
            fig.tight_layout()
            out = Path(spec.output_path)
            out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out, format=spec.format, metadata={"Date": None})
        finally:
            plt.close(fig)
    return out
