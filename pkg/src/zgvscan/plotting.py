"""Figure rendering for the command-line report path.

Dispersion curves as thin grey lines, located points coloured by
classification, written straight to file.  Styling is kept plain and
publication-ish; the CSV files remain the machine-readable contract.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_STYLE = {
    "zgv": dict(marker="o", color="#c62828", label="zgv", zorder=5),
    "trivial_zgv": dict(marker="s", color="#1565c0", label="trivial (k=0)", zorder=5),
    "crossing": dict(marker="x", color="#6a1b9a", label="crossing", zorder=4),
    "rejected": dict(marker=".", color="#9e9e9e", label="rejected", zorder=3),
}

plt.rcParams.update({
    "figure.figsize": (6.4, 4.2),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
})


def render_report(path, grid=None, points=(), title=None):
    """Write a PNG with the dispersion branches and/or located points."""
    fig, ax = plt.subplots()
    if grid is not None:
        ax.plot(grid.k_values, grid.omega, color="0.45", lw=0.7, zorder=2)
    seen = set()
    for p in points:
        style = dict(_STYLE.get(p.classification, _STYLE["rejected"]))
        if p.classification in seen:
            style.pop("label")
        seen.add(p.classification)
        ax.plot([p.k], [p.omega], ls="none", ms=6, **style)
    ax.set_xlabel("wavenumber k")
    ax.set_ylabel("angular frequency omega")
    if title:
        ax.set_title(title)
    if seen:
        ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
