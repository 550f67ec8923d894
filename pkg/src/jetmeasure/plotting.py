"""Figure rendering for the report paths.

Exact values stay exact everywhere else; floats appear only here, at the
moment of drawing.  The Agg backend is forced so figures render headlessly.
"""

from __future__ import annotations

import math


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def growth_figure(report, path: str) -> str:
    """Image-jet counts against the predicted dimension law, log_q scale."""
    plt = _pyplot()
    levels = sorted(report.counts)
    q = report.q
    observed = [math.log(report.counts[n], q) if report.counts[n] else 0.0 for n in levels]
    predicted = [report.predicted[n] for n in levels]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(levels, observed, "o-", label="log_q counts")
    ax.plot(levels, predicted, "s--", label=f"(n+1)d - nu  (nu={report.nu})")
    ax.set_xlabel("level n")
    ax.set_ylabel(f"log_{q}")
    ax.set_title("dimension growth of image jets")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def convergence_figure(partials, closed_form, path: str, q: int) -> str:
    """Partial sums of the integral by cutoff, both pipelines overlaid."""
    plt = _pyplot()
    cutoffs = sorted(partials)
    motivic = [float(partials[m][0]) for m in cutoffs]
    padic = [float(partials[m][1]) for m in cutoffs]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(cutoffs, motivic, "o-", label="motivic, specialized")
    ax.plot(cutoffs, padic, "x--", label="p-adic")
    if closed_form is not None:
        ax.axhline(float(closed_form), color="gray", linewidth=0.8, label="closed form")
    ax.set_xlabel("cutoff M")
    ax.set_ylabel("partial sum")
    ax.set_title(f"integral partial sums at q={q}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
