"""Minimal SVG 1.1 rendering of a 2-D prototype graph."""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

CANVAS = 800
MARGIN = 0.05
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
UNLABELED = "#a0a0a0"


class Frame:
    """Maps data coordinates into the canvas, keeping a 5% margin on every side."""

    def __init__(self, points: np.ndarray):
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        span = np.where(hi - lo > 0, hi - lo, 1.0)
        self.lo, self.span = lo, span
        self.inner = CANVAS * (1.0 - 2.0 * MARGIN)

    def __call__(self, p) -> tuple[float, float]:
        u = (np.asarray(p) - self.lo) / self.span
        x = CANVAS * MARGIN + u[0] * self.inner
        y = CANVAS * MARGIN + (1.0 - u[1]) * self.inner  # svg y grows downward
        return float(x), float(y)


def render(X, P, edges, labels=None, kept=None, title: str | None = None) -> str:
    """SVG with one circle per sample, one per kept prototype and one line per edge."""
    X = np.asarray(X, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    if X.shape[1] != 2 or P.shape[1] != 2:
        raise ValueError("only 2-D data can be plotted; export the trace instead")
    kept = np.arange(len(P)) if kept is None else np.asarray(kept)
    frame = Frame(np.vstack([X, P[kept]]) if len(kept) else X)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">',
        f'<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="white"/>',
    ]
    if title:
        out.append(f"<title>{title}</title>")
    out.append('<g id="samples" stroke="none" fill-opacity="0.6">')
    for i, x in enumerate(X):
        cx, cy = frame(x)
        color = UNLABELED if labels is None else PALETTE[int(labels[i]) % len(PALETTE)]
        out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="3" fill={quoteattr(color)}/>')
    out.append("</g>")
    out.append('<g id="edges" stroke="black" stroke-width="1.5">')
    for a, b in edges:
        x1, y1 = frame(P[a])
        x2, y2 = frame(P[b])
        out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}"/>')
    out.append("</g>")
    out.append('<g id="prototypes" fill="black" stroke="white" stroke-width="1">')
    for j in kept:
        cx, cy = frame(P[j])
        out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="6"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
