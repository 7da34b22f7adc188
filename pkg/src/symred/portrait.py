"""Phase portraits on symplectic leaves.

A leaf is charted by a rectangle in two coordinates with an embedding
into the ambient 3-space (momentum sphere for the rigid body;
hyperboloid, cone, or (w1, w2) plane for the central-force cone), and
the portrait is the family of Hamiltonian level sets on the leaf,
extracted by marching squares with linear edge interpolation.
Equilibria are located by Newton refinement of coarse-grid minima of the
reduced speed and tagged center / saddle from the linearized chart flow.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .poisson import PoissonStructure, SmoothFunction

__all__ = [
    "LeafChart",
    "Polyline",
    "EquilibriumMarker",
    "ContourSet",
    "make_chart",
    "extract_contours",
    "find_equilibria",
    "emit_svg",
    "emit_csv",
    "read_contour_csv",
    "auto_levels",
    "DEFAULT_REGIONS",
]

# Plot regions (w1, w2, w3 boxes) used for the reference portraits.
DEFAULT_REGIONS = {
    "kepler": ((0.0, 12.0), (-6.0, 6.0), (0.0, 12.0)),
    "cosine": ((0.0, 12.0), (-6.0, 6.0), (0.0, 12.0)),
    "homoclinic": ((0.0, 4.0), (-2.0, 2.0), (0.0, 4.0)),
    "homoclinic_flat": ((0.0, 4.0), (-2.0, 2.0), (0.0, 4.0)),
}


@dataclass(frozen=True)
class LeafChart:
    """A rectangle of chart coordinates with an embedding onto one leaf."""

    kind: str
    domain: tuple[tuple[float, float], tuple[float, float]]
    embed: Callable[[float, float], np.ndarray]
    leaf_residual: Callable[[np.ndarray], float]
    axis_names: tuple[str, str]
    params: dict = field(default_factory=dict)

    def grid(self, nu: int, nv: int) -> tuple[np.ndarray, np.ndarray]:
        (u0, u1), (v0, v1) = self.domain
        return np.linspace(u0, u1, nu), np.linspace(v0, v1, nv)


def make_chart(kind: str, *, radius: float | None = None, casimir: float | None = None,
               domain: tuple[tuple[float, float], tuple[float, float]] | None = None,
               region: tuple | None = None) -> LeafChart:
    """Build a leaf chart.

    kind "sphere": momentum sphere |m| = radius, spherical angles
    (azimuth, polar).  kind "hyperboloid" (C > 0) and "cone" (C = 0):
    coordinates (w2, u) with w1 = sqrt(C + w2^2) e^u and
    w3 = sqrt(C + w2^2) e^-u, so the leaf constraint holds exactly by
    construction.  kind "plane": (w1, w2) with w3 = (C + w2^2) / w1,
    w1 > 0.  ``region`` (a (w1, w2, w3) box) sizes the default domain.
    """
    if kind == "sphere":
        if radius is None or radius <= 0:
            raise ValueError("sphere chart needs a positive radius")
        r = float(radius)
        dom = domain or ((0.0, 2.0 * np.pi), (0.0, np.pi))
        return LeafChart(
            kind="sphere",
            domain=dom,
            embed=lambda u, v: r * np.array(
                [np.cos(u) * np.sin(v), np.sin(u) * np.sin(v), np.cos(v)]),
            leaf_residual=lambda m: float(abs(m @ m - r * r)),
            axis_names=("azimuth", "polar"),
            params={"radius": r},
        )

    if kind in ("hyperboloid", "cone"):
        if kind == "hyperboloid":
            if casimir is None or casimir <= 0:
                raise ValueError("hyperboloid chart needs casimir > 0")
            C = float(casimir)
        else:
            C = 0.0
        if domain is None:
            if region is not None:
                (w1lo, w1hi), (w2lo, w2hi), _ = region
                umax = float(np.log(max(w1hi, 1e-6) / np.sqrt(C + 1e-12))) if C > 0 else 2.5
                if C > 0:
                    umax = max(umax, 0.5)
                domain = ((w2lo, w2hi), (-umax, umax))
            else:
                domain = ((-6.0, 6.0), (-2.5, 2.5))

        def embed(w2, u, _C=C):
            s = np.sqrt(_C + w2 * w2)
            return np.array([s * np.exp(u), w2, s * np.exp(-u)])

        return LeafChart(
            kind=kind,
            domain=domain,
            embed=embed,
            leaf_residual=lambda w, _C=C: float(abs(w[0] * w[2] - w[1] ** 2 - _C)),
            axis_names=("w2", "u"),
            params={"casimir": C},
        )

    if kind == "plane":
        if casimir is None or casimir < 0:
            raise ValueError("plane chart needs casimir >= 0")
        C = float(casimir)
        if domain is None:
            if region is not None:
                (w1lo, w1hi), (w2lo, w2hi), _ = region
                domain = ((max(w1lo, 1e-3), w1hi), (w2lo, w2hi))
            else:
                domain = ((1e-3, 12.0), (-6.0, 6.0))
        if domain[0][0] <= 0:
            raise ValueError("plane chart needs w1 > 0")
        return LeafChart(
            kind="plane",
            domain=domain,
            embed=lambda w1, w2, _C=C: np.array([w1, w2, (_C + w2 * w2) / w1]),
            leaf_residual=lambda w, _C=C: float(abs(w[0] * w[2] - w[1] ** 2 - _C)),
            axis_names=("w1", "w2"),
            params={"casimir": C},
        )

    raise ValueError(f"unknown chart kind {kind!r} (C < 0 has no leaf)")


@dataclass(frozen=True)
class Polyline:
    level: float
    points_uv: np.ndarray       # (n, 2)
    points_ambient: np.ndarray  # (n, 3)


@dataclass(frozen=True)
class EquilibriumMarker:
    uv: tuple[float, float]
    ambient: np.ndarray
    stability: str  # "center" | "saddle" | "degenerate"


@dataclass(frozen=True)
class ContourSet:
    chart: LeafChart
    levels: tuple[float, ...]
    polylines: tuple[Polyline, ...]
    markers: tuple[EquilibriumMarker, ...]
    grid_shape: tuple[int, int]

    @property
    def cell_size(self) -> tuple[float, float]:
        (u0, u1), (v0, v1) = self.chart.domain
        nu, nv = self.grid_shape
        return (u1 - u0) / (nu - 1), (v1 - v0) / (nv - 1)


def _sample(chart: LeafChart, H: SmoothFunction, nu: int, nv: int):
    us, vs = chart.grid(nu, nv)
    F = np.empty((nu, nv))
    for i, u in enumerate(us):
        for j, v in enumerate(vs):
            F[i, j] = H.value(chart.embed(u, v))
    return us, vs, F


# marching-squares case table: corner order (i,j), (i+1,j), (i+1,j+1), (i,j+1);
# edges 0 bottom, 1 right, 2 top, 3 left; entries pair crossed edges.
_CASES = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
    11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
}


def _march(us, vs, F, level):
    """Segments of the level curve as pairs of edge keys plus the edge
    interpolation points.  Ambiguous saddle cells split by the cell mean."""
    nu, nv = F.shape
    S = F - level
    S[S == 0.0] = 1e-300  # deterministic nudge off the degenerate node case
    pts: dict[tuple, tuple[float, float]] = {}
    segs: list[tuple[tuple, tuple]] = []

    def edge_point(key):
        if key in pts:
            return
        kind, i, j = key
        if kind == "h":  # between (i,j) and (i+1,j)
            a, b = S[i, j], S[i + 1, j]
            t = a / (a - b)
            pts[key] = (us[i] + t * (us[i + 1] - us[i]), vs[j])
        else:  # between (i,j) and (i,j+1)
            a, b = S[i, j], S[i, j + 1]
            t = a / (a - b)
            pts[key] = (us[i], vs[j] + t * (vs[j + 1] - vs[j]))

    for i in range(nu - 1):
        for j in range(nv - 1):
            idx = 0
            if S[i, j] > 0:
                idx |= 1
            if S[i + 1, j] > 0:
                idx |= 2
            if S[i + 1, j + 1] > 0:
                idx |= 4
            if S[i, j + 1] > 0:
                idx |= 8
            if idx in (0, 15):
                continue
            edges = {
                0: ("h", i, j),
                1: ("v", i + 1, j),
                2: ("h", i, j + 1),
                3: ("v", i, j),
            }
            if idx in (5, 10):
                center = 0.25 * (S[i, j] + S[i + 1, j] + S[i + 1, j + 1] + S[i, j + 1])
                if idx == 5:
                    pairs = [(3, 0), (1, 2)] if center > 0 else [(3, 2), (1, 0)]
                else:
                    pairs = [(0, 1), (2, 3)] if center > 0 else [(0, 3), (2, 1)]
            else:
                pairs = _CASES[idx]
            for a, b in pairs:
                ka, kb = edges[a], edges[b]
                edge_point(ka)
                edge_point(kb)
                segs.append((ka, kb))
    return pts, segs


def _join_segments(pts, segs):
    """Chain cell segments into polylines (open chains first, then loops),
    walking edge keys in deterministic scan order."""
    adj: dict[tuple, list[int]] = {}
    for idx, (a, b) in enumerate(segs):
        adj.setdefault(a, []).append(idx)
        adj.setdefault(b, []).append(idx)
    used = [False] * len(segs)

    def walk(start_key):
        chain = [start_key]
        key = start_key
        while True:
            nxt = None
            for si in adj.get(key, ()):
                if not used[si]:
                    nxt = si
                    break
            if nxt is None:
                break
            used[nxt] = True
            a, b = segs[nxt]
            key = b if a == key else a
            chain.append(key)
        return chain

    chains = []
    endpoints = sorted(k for k, lst in adj.items() if len(lst) == 1)
    for key in endpoints:
        if all(used[si] for si in adj[key]):
            continue
        chains.append(walk(key))
    for key in sorted(adj):  # remaining loops
        if any(not used[si] for si in adj[key]):
            chains.append(walk(key))
    return [np.array([pts[k] for k in chain]) for chain in chains if len(chain) > 1]


def find_equilibria(chart: LeafChart, P: PoissonStructure, H: SmoothFunction,
                    coarse: int = 48, tol: float = 1e-10) -> list[EquilibriumMarker]:
    """Equilibria of the reduced flow on the chart.

    Coarse-grid local minima of the squared speed seed a Newton iteration
    on the chart components of the field (the field is tangent to the
    leaf, so its pullback through the embedding Jacobian vanishes exactly
    at equilibria).  Stability tags come from the eigenvalues of the
    linearized chart flow: opposite-sign real pair = saddle, imaginary
    pair = center.
    """
    us, vs = chart.grid(coarse, coarse)

    def ambient_field(u, v):
        w = chart.embed(u, v)
        return P.matrix(w) @ H.grad(w)

    def embed_jac(u, v, h=1e-6):
        du = (chart.embed(u + h, v) - chart.embed(u - h, v)) / (2 * h)
        dv = (chart.embed(u, v + h) - chart.embed(u, v - h)) / (2 * h)
        return np.stack([du, dv], axis=1)  # 3 x 2

    def chart_field(z):
        Jm = embed_jac(z[0], z[1])
        f = ambient_field(z[0], z[1])
        sol, *_ = np.linalg.lstsq(Jm, f, rcond=None)
        return sol

    G1 = np.empty((coarse, coarse))
    G2 = np.empty((coarse, coarse))
    speed = np.empty((coarse, coarse))
    for i, u in enumerate(us):
        for j, v in enumerate(vs):
            g = chart_field(np.array([u, v]))
            G1[i, j], G2[i, j] = g
            speed[i, j] = g @ g

    # Seed Newton wherever both nullclines cross a cell (sign changes are
    # scale-free, unlike speed minima, which stiff equilibria can hide
    # from a coarse grid) plus interior local minima of the speed.
    # Spurious seeds are rejected by the convergence test below.
    seeds = []
    for i in range(coarse - 1):
        for j in range(coarse - 1):
            c1 = (G1[i, j], G1[i + 1, j], G1[i, j + 1], G1[i + 1, j + 1])
            c2 = (G2[i, j], G2[i + 1, j], G2[i, j + 1], G2[i + 1, j + 1])
            if min(c1) < 0 < max(c1) and min(c2) < 0 < max(c2):
                seeds.append((0.5 * (us[i] + us[i + 1]), 0.5 * (vs[j] + vs[j + 1])))
    for i in range(1, coarse - 1):
        for j in range(1, coarse - 1):
            patch = speed[i - 1: i + 2, j - 1: j + 2]
            if speed[i, j] <= patch.min():
                seeds.append((us[i], vs[j]))

    found: list[EquilibriumMarker] = []
    (u0, u1), (v0, v1) = chart.domain
    du_cell = (u1 - u0) / (coarse - 1)
    for seed in seeds:
        z = np.array(seed, dtype=float)
        ok = False
        for _ in range(40):
            g = chart_field(z)
            if np.linalg.norm(g) < tol:
                ok = True
                break
            h = 1e-6 * (1.0 + np.abs(z))
            Jg = np.empty((2, 2))
            for c in range(2):
                e = np.zeros(2)
                e[c] = h[c]
                Jg[:, c] = (chart_field(z + e) - chart_field(z - e)) / (2 * h[c])
            try:
                dz = np.linalg.solve(Jg, g)
            except np.linalg.LinAlgError:
                break
            z = z - dz
            if not (u0 - du_cell <= z[0] <= u1 + du_cell and v0 - du_cell * 10 <= z[1] <= v1 + du_cell * 10):
                break
        if not ok:
            continue
        if any(np.hypot(z[0] - m.uv[0], z[1] - m.uv[1]) < 2 * du_cell for m in found):
            continue
        # classify from the linearized chart flow
        h = 1e-5 * (1.0 + np.abs(z))
        A = np.empty((2, 2))
        for c in range(2):
            e = np.zeros(2)
            e[c] = h[c]
            A[:, c] = (chart_field(z + e) - chart_field(z - e)) / (2 * h[c])
        det = float(np.linalg.det(A))
        amag = float(np.abs(A).max())
        if det < -1e-8 * amag * amag:
            tag = "saddle"
        elif det > 1e-8 * amag * amag:
            tag = "center"
        else:
            tag = "degenerate"
        found.append(EquilibriumMarker(uv=(float(z[0]), float(z[1])),
                                       ambient=chart.embed(z[0], z[1]),
                                       stability=tag))
    return found


def extract_contours(chart: LeafChart, H: SmoothFunction, levels,
                     grid: tuple[int, int] = (512, 512),
                     structure: PoissonStructure | None = None) -> ContourSet:
    """Marching-squares level sets of H on the chart.

    Levels outside the sampled range simply produce no polylines.  When a
    Poisson structure is supplied, equilibrium markers are located and
    classified as well.
    """
    nu, nv = grid
    if nu < 2 or nv < 2:
        raise ValueError("grid must be at least 2 x 2")
    us, vs, F = _sample(chart, H, nu, nv)
    if np.ptp(F) == 0.0:
        import warnings

        warnings.warn("Hamiltonian is constant on the chart; portrait is degenerate",
                      stacklevel=2)
    polylines = []
    for lev in levels:
        pts, segs = _march(us, vs, F, float(lev))
        for arr in _join_segments(pts, segs):
            amb = np.array([chart.embed(u, v) for u, v in arr])
            polylines.append(Polyline(level=float(lev), points_uv=arr, points_ambient=amb))
    markers = tuple(find_equilibria(chart, structure, H)) if structure is not None else ()
    return ContourSet(chart=chart, levels=tuple(float(l) for l in levels),
                      polylines=tuple(polylines), markers=markers, grid_shape=(nu, nv))


def auto_levels(chart: LeafChart, H: SmoothFunction, n: int = 12,
                grid: int = 64, quantile: float = 0.98) -> list[float]:
    """n equispaced levels between the sampled minimum of H on the chart
    and the given quantile of the sampled values (the paper-style plots
    list no level values, so this is the default picker)."""
    _, _, F = _sample(chart, H, grid, grid)
    lo = float(F.min())
    hi = float(np.quantile(F, quantile))
    if hi <= lo:
        return [lo]
    pad = 1e-3 * (hi - lo)
    return list(np.linspace(lo + pad, hi, n))


# ---------------------------------------------------------------------------
# Output.

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(cs: ContourSet) -> bytes:
    """CSV rows: level, polyline_id, u, v, w1, w2, w3 (17 significant digits)."""
    buf = io.StringIO()
    buf.write("level,polyline_id,u,v,w1,w2,w3\n")
    for pid, pl in enumerate(cs.polylines):
        for (u, v), w in zip(pl.points_uv, pl.points_ambient):
            buf.write(",".join([_fmt(pl.level), str(pid), _fmt(u), _fmt(v),
                                _fmt(w[0]), _fmt(w[1]), _fmt(w[2])]) + "\n")
    return buf.getvalue().encode()


def read_contour_csv(data: bytes):
    """Inverse of :func:`emit_csv`: {polyline_id: (level, uv array, ambient array)}."""
    lines = data.decode().strip().splitlines()
    out: dict[int, list] = {}
    for line in lines[1:]:
        parts = line.split(",")
        pid = int(parts[1])
        out.setdefault(pid, []).append((float(parts[0]), [float(parts[2]), float(parts[3])],
                                        [float(p) for p in parts[4:7]]))
    result = {}
    for pid, rows in out.items():
        result[pid] = (rows[0][0], np.array([r[1] for r in rows]),
                       np.array([r[2] for r in rows]))
    return result


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f"]


def emit_svg(cs: ContourSet, width: int = 640, height: int = 480,
             stroke_width: float = 1.2, highlight_level: float | None = None) -> bytes:
    """SVG 1.1 phase portrait: one path per polyline, x/o markers for
    equilibria, axis box with chart-coordinate labels.  Output is a pure
    function of the inputs (byte-identical across runs)."""
    (u0, u1), (v0, v1) = cs.chart.domain
    ml, mr, mt, mb = 56, 16, 16, 40
    pw, ph = width - ml - mr, height - mt - mb

    def tx(u):
        return ml + (u - u0) / (u1 - u0) * pw

    def ty(v):
        return mt + (v1 - v) / (v1 - v0) * ph

    def num(x):
        return format(x, ".6g")

    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
              f'width="{width}" height="{height}" '
              f'viewBox="0 0 {width} {height}">\n')
    out.write(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" '
              'fill="white" stroke="black" stroke-width="1"/>\n')
    level_index = {lev: i for i, lev in enumerate(cs.levels)}
    for pl in cs.polylines:
        color = _PALETTE[level_index.get(pl.level, 0) % len(_PALETTE)]
        wdt = stroke_width
        if highlight_level is not None and abs(pl.level - highlight_level) <= 1e-12:
            color, wdt = "#000000", stroke_width * 2.2
        d = "M " + " L ".join(f"{num(tx(u))} {num(ty(v))}" for u, v in pl.points_uv)
        out.write(f'<path d="{d}" fill="none" stroke="{color}" '
                  f'stroke-width="{num(wdt)}"/>\n')
    for mk in cs.markers:
        x, y = tx(mk.uv[0]), ty(mk.uv[1])
        if mk.stability == "saddle":
            out.write(f'<path d="M {num(x - 5)} {num(y - 5)} L {num(x + 5)} {num(y + 5)} '
                      f'M {num(x - 5)} {num(y + 5)} L {num(x + 5)} {num(y - 5)}" '
                      'stroke="black" stroke-width="1.5" fill="none"/>\n')
        else:
            fill = "black" if mk.stability == "center" else "gray"
            out.write(f'<circle cx="{num(x)}" cy="{num(y)}" r="4" fill="{fill}"/>\n')
    uname, vname = cs.chart.axis_names
    out.write(f'<text x="{ml + pw / 2:.6g}" y="{height - 10}" font-size="14" '
              f'text-anchor="middle">{uname}</text>\n')
    out.write(f'<text x="16" y="{mt + ph / 2:.6g}" font-size="14" '
              f'text-anchor="middle" transform="rotate(-90 16 {mt + ph / 2:.6g})">{vname}</text>\n')
    for u in (u0, u1):
        out.write(f'<text x="{num(tx(u))}" y="{height - 24}" font-size="11" '
                  f'text-anchor="middle">{num(u)}</text>\n')
    for v in (v0, v1):
        out.write(f'<text x="{ml - 6}" y="{num(ty(v) + 4)}" font-size="11" '
                  f'text-anchor="end">{num(v)}</text>\n')
    out.write("</svg>\n")
    return out.getvalue().encode()
