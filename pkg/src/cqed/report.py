"""Figures from text output: one panel per display block against time."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .trajio import OutputFile, parse_output  # noqa: E402


def figure_path(output: str | Path) -> Path:
    """``run1.dat`` -> ``run1.dat.png``."""
    return Path(f"{output}.png")


def render(data: OutputFile | str, path: str | Path, title: str | None = None) -> Path:
    """Render every block (plus jump proximity and negativity columns) to ``path``.

    ``data`` is a parsed output or its raw text.
    """
    out = parse_output(data) if isinstance(data, str) else data
    if out.rows.size == 0:
        raise ValueError("no data rows to plot")
    t = out.column(1)
    panels = [(label, [(first + i, name) for i, name in enumerate(names)])
              for label, first, names in out.blocks]
    panels += [(desc.split(" (")[0], [(col, desc.split(" (")[0])])
               for col, desc in sorted(out.extras.items())]
    fig, axes = plt.subplots(len(panels), 1, sharex=True, squeeze=False,
                             figsize=(6.4, 2.2 * len(panels) + 0.6))
    for ax, (label, cols) in zip(axes[:, 0], panels):
        for col, name in cols:
            ax.plot(t, out.column(col), label=name)
        ax.set_ylabel(label)
        if len(cols) > 1:
            ax.legend(loc="best", fontsize="small")
    axes[-1, 0].set_xlabel("t")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def render_file(source: str | Path, path: str | Path | None = None) -> Path:
    source = Path(source)
    target = figure_path(source) if path is None else Path(path)
    return render(source.read_text(), target, title=source.name)
