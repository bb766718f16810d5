"""Static SVG charts (matplotlib, Agg backend, deterministic output)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "multiconn"
plt.rcParams["svg.fonttype"] = "none"

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def line_panels(path, panels, title=None):
    """Write an SVG with one subplot per panel.

    Each panel is a dict with ``xlabel``, ``ylabel``, optional ``logx`` /
    ``logy`` and ``series``: a list of dicts with ``x``, ``y``, ``label``,
    ``style`` ('line' or 'markers') and an optional colour index ``c``.
    """
    fig, axes = plt.subplots(1, len(panels), figsize=(5.0 * len(panels), 3.8), squeeze=False)
    for ax, panel in zip(axes[0], panels):
        for i, s in enumerate(panel["series"]):
            color = _COLORS[s.get("c", i) % len(_COLORS)]
            if s.get("style", "line") == "markers":
                ax.plot(s["x"], s["y"], "o", ms=4, mfc="none", color=color, label=s.get("label"))
            elif s.get("style") == "step":
                ax.step(s["x"], s["y"], where="post", color=color, label=s.get("label"))
            else:
                ax.plot(s["x"], s["y"], "-", color=color, label=s.get("label"))
        if panel.get("logx"):
            ax.set_xscale("log")
        if panel.get("logy"):
            ax.set_yscale("log")
        ax.set_xlabel(panel["xlabel"])
        ax.set_ylabel(panel["ylabel"])
        if panel.get("title"):
            ax.set_title(panel["title"], fontsize=10)
        ax.grid(True, alpha=0.3)
        if any(s.get("label") for s in panel["series"]):
            ax.legend(fontsize=7)
    if title:
        fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
