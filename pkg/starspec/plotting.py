"""SVG figures of measure estimates with byte-stable output."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from starspec.models import MeasureEstimate, MeasureKind  # noqa: E402

_SVG_SALT = "starspec"


def plot_measure(
    estimate: MeasureEstimate,
    path: Path,
    overlay: MeasureEstimate | None = None,
    title: str = "",
) -> Path:
    """Bar chart of a histogram, stems for atoms, with the support [0, 2/|Γ|] marked."""
    support = estimate.support_max
    with plt.rc_context({"svg.hashsalt": _SVG_SALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        _draw(ax, estimate, "C0", "estimate")
        if overlay is not None:
            _draw(ax, overlay, "C3", "reference")
            ax.legend(loc="upper left", frameon=False)
        ax.axvspan(0.0, support, color="0.92", zorder=0)
        ax.axvline(support, color="0.4", linestyle="--", linewidth=0.8)
        ax.annotate("2/|Γ|", xy=(support, 0.0), xytext=(3, 3), textcoords="offset points")
        ax.set_xlim(-0.05 * support, 1.1 * support)
        ax.set_xlabel("s = Re(δ/α)")
        ax.set_ylabel("mass")
        if title:
            ax.set_title(title)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def _draw(ax, estimate: MeasureEstimate, color: str, label: str) -> None:
    if estimate.kind == MeasureKind.ATOMS:
        x = estimate.locations()
        ax.vlines(x, 0.0, estimate.weights(), color=color, linewidth=2.0, label=label)
        ax.plot(x, estimate.weights(), "o", color=color)
        return
    edges = np.asarray(estimate.bin_edges, dtype=float)
    ax.bar(
        edges[:-1],
        estimate.weights(),
        width=np.diff(edges),
        align="edge",
        color=color,
        alpha=0.6,
        label=label,
    )
