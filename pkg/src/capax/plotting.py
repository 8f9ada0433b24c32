"""Figures written alongside the CLI's CSV/JSON output."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .asymptotics import ErrorTermReport  # noqa: E402
from .surfaces import ChamberMap, SurfaceLattice  # noqa: E402

# fixed metadata so repeated renders are byte-identical
_SVG_META = {"Date": None, "Creator": None}
_PNG_META = {"Software": None}


def _save(fig, path):
    path = str(path)
    if path.endswith(".svg"):
        matplotlib.rcParams["svg.hashsalt"] = "capax"
        fig.savefig(path, metadata=_SVG_META)
    else:
        fig.savefig(path, dpi=150, metadata=_PNG_META if path.endswith(".png") else None)
    plt.close(fig)


def plot_error_terms(report: ErrorTermReport, path, title: str = "") -> None:
    ks = np.array([s[0] for s in report.samples])
    es = np.array([s[2] for s in report.samples])
    fig, ax = plt.subplots(figsize=(8.5, 4))
    ax.plot(ks, es, ".", ms=2, color="k", label=r"$e_k$")
    if report.predicted_limsup is not None:
        ax.axhline(float(report.predicted_limsup), color="C0", lw=1, label="predicted limsup")
        ax.axhline(float(report.predicted_liminf), color="C3", lw=1, label="predicted liminf")
    k0, k1 = report.k_range
    ax.axvspan(k0, k1, color="0.9", zorder=0, label="tail window")
    ax.set_xlabel(r"$k$")
    ax.set_ylabel(r"$c_k - \sqrt{2A^2 k}$")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper left", bbox_to_anchor=(1.01, 1.0), fontsize=8, frameon=False)
    fig.tight_layout()
    _save(fig, path)


def plot_chambers(cmap: ChamberMap, S: SurfaceLattice, G1, G2, path, title: str = "") -> None:
    """Rays A(t) = (1-t) G1 + t G2 drawn in the plane of (A.G1, A.G2), coloured by optimiser."""
    labels = sorted({S.label(c[2]) for c in cmap.chambers})
    colour = {lab: f"C{i}" for i, lab in enumerate(labels)}
    fig, ax = plt.subplots(figsize=(5, 5))
    seen = set()
    for s in cmap.samples:
        A = tuple((1 - s.t) * a + s.t * b for a, b in zip(G1, G2))
        x, y = float(S.dot(A, G1)), float(S.dot(A, G2))
        r = np.hypot(x, y) or 1.0
        if not s.big:
            ax.plot([0, x / r], [0, y / r], color="0.8", lw=0.6)
            continue
        lab = S.label(s.witnesses[0]) if len(s.witnesses) == 1 else "tie"
        c = colour.get(lab, "k")
        ax.plot([0, x / r], [0, y / r], color=c, lw=0.8, label=None if lab in seen else lab)
        seen.add(lab)
    for w in cmap.walls:
        if w is None:
            continue
        A = tuple((1 - w) * a + w * b for a, b in zip(G1, G2))
        x, y = float(S.dot(A, G1)), float(S.dot(A, G2))
        r = np.hypot(x, y) or 1.0
        ax.plot([0, 1.1 * x / r], [0, 1.1 * y / r], color="k", ls="--", lw=1.2)
    ax.set_aspect("equal")
    ax.set_xlabel(r"$A\cdot G_1$")
    ax.set_ylabel(r"$A\cdot G_2$")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8, frameon=False)
    fig.tight_layout()
    _save(fig, path)
