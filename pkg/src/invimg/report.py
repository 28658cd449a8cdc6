"""Summary figures rendered next to results.csv.

Two PNGs per run: a reconstruction montage (reference, measurement when it is
image-shaped, estimate) for the first few samples, and a per-sample bar chart
of the first metric column.  Rendering is deterministic: fixed geometry, Agg
backend, and no Software metadata in the PNG.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_PNG_META = {"Software": None}  # drop the version-bearing default chunk


def _as_panel(img):
    img = np.asarray(img)
    if np.iscomplexobj(img):
        img = np.abs(img)
    return img


def render_figures(samples, recons, rows, header, out_dir):
    n_show = min(4, len(samples))
    if n_show > 0:
        fig, axes = plt.subplots(n_show, 3, figsize=(7.5, 2.5 * n_show),
                                 squeeze=False)
        for i in range(n_show):
            x, y, _ = samples[i]
            panels = [("reference", _as_panel(x)), ("measurement", _as_panel(y)),
                      ("estimate", None if recons[i] is None else _as_panel(recons[i]))]
            for ax, (title, img) in zip(axes[i], panels):
                ax.set_axis_off()
                if img is None:
                    ax.set_title(f"{title} (failed)", fontsize=8)
                    continue
                if img.ndim != 2:
                    img = np.atleast_2d(img)
                ax.imshow(img, cmap="gray", interpolation="nearest")
                if i == 0:
                    ax.set_title(title, fontsize=9)
        fig.tight_layout()
        fig.savefig(os.path.join(out_dir, "reconstructions.png"), dpi=100,
                    metadata=_PNG_META)
        plt.close(fig)

    metric_cols = [c for c in header
                   if c not in ("sample_id", "method", "wall_time_ms", "error")]
    if not metric_cols:
        return
    col = metric_cols[0]
    ids, vals = [], []
    for r in rows:
        if r["sample_id"] == "mean":
            continue
        v = r.get(col, "")
        if v not in ("", "inf", "-inf"):
            ids.append(r["sample_id"])
            vals.append(float(v))
    if not vals:
        return
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.bar(range(len(vals)), vals, color="#4878a8")
    ax.set_xticks(range(len(vals)))
    ax.set_xticklabels(ids, fontsize=8)
    ax.set_xlabel("sample")
    ax.set_ylabel(col)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "metrics.png"), dpi=100, metadata=_PNG_META)
    plt.close(fig)
