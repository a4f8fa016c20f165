"""Render sweep CSVs into the five standard figures.

Every figure overlays a theory curve (from the theory_capacity column) on
the measured capacity points (capacity_estimate with error bars propagated
from the hop-count stderr).  A sidecar JSON next to each image lists the
series and their point counts so pipelines can check figure structure
without image inspection.

Figure kinds:
  fig6   capacity vs n per destination rule (direct traffic), log-log
  fig7   capacity vs transmission range r(n), linear axes
  fig8   capacity vs average adjacent distance 1/sqrt(n), linear axes
  fig9   hierarchical vs direct capacity per correlation exponent, uniform rule
  fig10  hierarchical vs direct capacity per correlation exponent,
         distance-biased rule (largest beta present)
"""

import json
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .csvdata import CsvFormatError, load_rows  # noqa: E402

FIGURE_KINDS = ("fig6", "fig7", "fig8", "fig9", "fig10")


@dataclass
class FigureSpec:
    kind: str
    csv_path: str
    out_path: str
    log_x: bool = None
    log_y: bool = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")


def _cap_error(row):
    # first-order propagation of the hop stderr through 1/(ln n * hops)
    if row["mean_hops"] > 0:
        return row["capacity_estimate"] * row["stderr"] / row["mean_hops"]
    return 0.0


def _x_value(kind, row):
    if kind in ("fig6", "fig9", "fig10"):
        return float(row["n"])
    if kind == "fig7":
        return row["r_n"]
    return 1.0 / math.sqrt(row["n"])  # fig8: mean adjacent spacing order


_X_LABEL = {
    "fig6": "users n", "fig9": "users n", "fig10": "users n",
    "fig7": "transmission range r(n)",
    "fig8": "average adjacent distance ~ 1/sqrt(n)",
}


def _groups(kind, rows):
    """Group rows per figure semantics; returns {label: [rows]}."""
    out = {}
    if kind in ("fig6", "fig7", "fig8"):
        for row in rows:
            if row["level_policy"] != "direct":
                continue
            label = f"{row.rule_label}, eps={row['epsilon']:g}"
            out.setdefault(label, []).append(row)
    elif kind == "fig9":
        for row in rows:
            if row["rule"] != "uniform":
                continue
            label = f"eps={row['epsilon']:g}, {row['level_policy']}"
            out.setdefault(label, []).append(row)
    else:  # fig10
        betas = [r["beta"] for r in rows if r["rule"] == "powerlaw"]
        if not betas:
            return out
        pick = max(betas)
        for row in rows:
            if row["rule"] != "powerlaw" or row["beta"] != pick:
                continue
            label = f"beta={pick:g}, eps={row['epsilon']:g}, {row['level_policy']}"
            out.setdefault(label, []).append(row)
    return out


def render(spec):
    """Render one figure plus its sidecar JSON; returns the sidecar path."""
    rows = load_rows(spec.csv_path)
    groups = _groups(spec.kind, rows)
    if not groups:
        raise CsvFormatError(f"no rows usable for {spec.kind}")
    log_x = spec.log_x if spec.log_x is not None else spec.kind in ("fig6", "fig9", "fig10")
    log_y = spec.log_y if spec.log_y is not None else spec.kind in ("fig6", "fig9", "fig10")

    fig, ax = plt.subplots(figsize=(7, 5))
    sidecar = {"figure": spec.kind, "csv": spec.csv_path, "series": []}
    colors = plt.cm.tab20.colors
    for gi, (label, grp) in enumerate(sorted(groups.items())):
        grp = sorted(grp, key=lambda r: _x_value(spec.kind, r))
        xs = [_x_value(spec.kind, r) for r in grp]
        ys = [r["capacity_estimate"] for r in grp]
        errs = [_cap_error(r) for r in grp]
        ty = [r["theory_capacity"] for r in grp]
        color = colors[gi % len(colors)]
        ax.errorbar(xs, ys, yerr=errs, marker="o", linestyle="none",
                    markersize=4, capsize=2, color=color,
                    label=f"{label} (measured)")
        theory_style = "--" if len(grp) > 1 else "none"
        ax.plot(xs, ty, linestyle=theory_style, marker="x" if len(grp) == 1 else "",
                color=color, alpha=0.8, label=f"{label} (theory)")
        sidecar["series"].append({"name": f"{label} (measured)",
                                  "kind": "measured", "points": len(grp),
                                  "line": False})
        sidecar["series"].append({"name": f"{label} (theory)",
                                  "kind": "theory", "points": len(grp),
                                  "line": len(grp) > 1})
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(_X_LABEL[spec.kind])
    ax.set_ylabel("capacity per user")
    ax.set_title(spec.kind)
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=120)
    plt.close(fig)

    sidecar_path = spec.out_path + ".json"
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
    return sidecar_path


def render_all(csv_path, out_dir):
    """All five figures for one CSV; returns {kind: sidecar_path}."""
    import os

    out = {}
    for kind in FIGURE_KINDS:
        spec = FigureSpec(kind=kind, csv_path=csv_path,
                          out_path=os.path.join(out_dir, kind + ".png"))
        out[kind] = render(spec)
    return out
