"""SVG figures for stability sweeps and simulation traces."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_FLOOR = 1e-18


def _save(fig, path):
    # fixed ids and no timestamp so repeated runs produce identical files
    with matplotlib.rc_context({"svg.hashsalt": "quatdiff", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def stability_figure(e0, ab, c, delta, path, root=None):
    """Two panels: ``a*b`` and ``c`` against ``e0``; the discriminant factor against ``e0``."""
    e0 = np.asarray(e0, dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(e0, ab, label="a b")
    ax1.plot(e0, c, "--", label="c")
    ax1.set_xlabel("e0")
    ax1.set_title("Routh-Hurwitz product")
    ax1.set_yscale("symlog", linthresh=1e-2)
    ax1.grid(True, alpha=0.3)
    ax1.legend()

    ax2.plot(e0, delta)
    ax2.axhline(0.0, color="k", lw=0.8)
    if root is not None:
        ax2.axvline(root, color="r", ls=":", label=f"root {root:.4f}")
        ax2.legend()
    ax2.set_xlabel("e0")
    ax2.set_ylabel("discriminant factor")
    ax2.set_title("1 + 5 e0 - 8 e0^2 + 4 e0^3")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def trace_figure(trace, path, title=None):
    """Attitude error and both constraint violations against time, log scale."""
    t = trace.column("t_s")
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.semilogy(t, np.maximum(trace.column("r_norm"), _FLOOR))
    ax1.set_ylabel("|q - p|")
    ax1.grid(True, which="both", alpha=0.3)
    if title:
        ax1.set_title(title)
    ax2.semilogy(t, np.maximum(trace.column("evTw_violation"), _FLOOR), label="|e_v . w|")
    ax2.semilogy(t, np.maximum(trace.column("w_constraint_violation"), _FLOOR),
                 label="|w - (e0 v - e_v x v)|")
    ax2.set_xlabel("t (s)")
    ax2.set_ylabel("constraint violation")
    ax2.grid(True, which="both", alpha=0.3)
    ax2.legend()
    fig.tight_layout()
    _save(fig, path)
