"""Trajectory plot as a standalone SVG document (no plotting dependency)."""
from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

from .simulator import Scenario, TraceReport

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
           "#17becf", "#bcbd22", "#7f7f7f")


def trajectory_svg(trace: TraceReport, scenario: Scenario, width: int = 800,
                   margin: float = 1.0, max_points: int = 2000) -> str:
    """Obstacles in grey, one polyline per robot, proximity links at the final pose.

    Long traces are subsampled to at most ``max_points`` vertices per polyline.
    """
    P = trace.positions
    pts = [P.reshape(-1, 2)] + [np.array([a.config.goal for a in scenario.agents])]
    if scenario.obstacles:
        pts.append(np.array([o.center for o in scenario.obstacles]))
    allp = np.vstack(pts)
    lo = allp.min(axis=0) - margin
    hi = allp.max(axis=0) + margin
    span = np.maximum(hi - lo, 1e-9)
    scale = width / span[0]
    height = max(1, int(round(span[1] * scale)))

    def xy(p):
        # flip y so the plot reads like a map
        return (p[0] - lo[0]) * scale, (hi[1] - p[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f"<title>{_esc(trace.name or scenario.name or 'trajectories')}</title>",
           '<rect width="100%" height="100%" fill="white"/>']
    for o in scenario.obstacles:
        x, y = xy(o.center)
        out.append(f'<circle class="obstacle" cx="{x:.2f}" cy="{y:.2f}" r="{o.radius * scale:.2f}" '
                   'fill="#555"/>')
    last = P[-1]
    for i, j in zip(*np.nonzero(np.triu(scenario.adjacency, 1))):
        (x1, y1), (x2, y2) = xy(last[i]), xy(last[j])
        out.append(f'<line class="link" x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                   'stroke="magenta" stroke-width="1" stroke-dasharray="4 3"/>')
    step = max(1, int(np.ceil(len(P) / max_points)))
    for i in range(P.shape[1]):
        c = _COLORS[i % len(_COLORS)]
        path = P[::step, i]
        if len(P) > 1 and (len(P) - 1) % step:
            path = np.vstack([path, P[-1:, i]])
        coords = " ".join("%.2f,%.2f" % xy(p) for p in path)
        out.append(f'<polyline class="agent" data-agent="{i}" points="{coords}" fill="none" '
                   f'stroke="{c}" stroke-width="1.5"/>')
        gx, gy = xy(scenario.agents[i].config.goal)
        out.append(f'<circle class="goal" cx="{gx:.2f}" cy="{gy:.2f}" r="3" fill="none" '
                   f'stroke="{c}"/>')
        sx, sy = xy(P[0, i])
        r = scenario.agents[i].config.delta * scale
        out.append(f'<circle class="start" cx="{sx:.2f}" cy="{sy:.2f}" r="{r:.2f}" fill="{c}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return quoteattr(s)[1:-1]
