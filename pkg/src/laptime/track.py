"""Curvature-parameterized track description and curvilinear path rates.

A track is built from X-Y centerline points: finite-difference curvature,
cumulative-chord arc length, then resampling of curvature, width, heading and
centerline position onto a uniform arc-length grid.  A counter-clockwise
circle has positive curvature.

The vehicle's position relative to the track is (s, n, chi): distance along
the centerline, lateral offset (positive to the left of the tangent), and
heading error.  The projection rates follow from the tangent angle
``theta = yaw - chi``::

    s_dot   = (X_dot cos(theta) + Y_dot sin(theta)) / (1 - n C)
    n_dot   =  Y_dot cos(theta) - X_dot sin(theta)
    chi_dot =  yaw_rate - C s_dot
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Track",
    "TrackError",
    "curvature_from_xy",
    "path_rates",
    "make_oval",
    "make_mini_circuit",
    "make_s_curve",
    "load_centerline_csv",
    "save_track_csv",
    "load_track_csv",
]

GEO_EPS = 1e-3  # curvilinear validity guard on 1 - n*C


class TrackError(ValueError):
    """Raised for degenerate centerlines or singular geometry."""


@dataclass(frozen=True)
class Track:
    """Uniform arc-length sampling of a centerline."""

    s: np.ndarray
    curvature: np.ndarray
    half_width: np.ndarray
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray  # unwrapped tangent angle
    closed: bool
    total_length: float

    def _lookup(self, values, s):
        s = np.asarray(s, dtype=float)
        if self.closed:
            s = np.mod(s, self.total_length)
            grid = np.append(self.s, self.total_length)
            vals = np.append(values, values[0])
            return np.interp(s, grid, vals)
        return np.interp(s, self.s, values)

    def curvature_at(self, s):
        return self._lookup(self.curvature, s)

    def half_width_at(self, s):
        return self._lookup(self.half_width, s)

    def heading_at(self, s):
        if self.closed:
            s = np.asarray(s, dtype=float)
            wrapped = np.mod(s, self.total_length)
            laps = np.floor_divide(s, self.total_length)
            turn = self.heading[0] + 2.0 * np.pi * np.sign(np.trapezoid(self.curvature, self.s))
            grid = np.append(self.s, self.total_length)
            vals = np.append(self.heading, turn)
            return np.interp(wrapped, grid, vals) + laps * (turn - self.heading[0])
        return np.interp(np.asarray(s, dtype=float), self.s, self.heading)

    def position_at(self, s):
        return self._lookup(self.x, s), self._lookup(self.y, s)

    def offset_position(self, s, n):
        """Map (s, n) to global X-Y; n is positive to the left of the tangent."""
        cx, cy = self.position_at(s)
        th = self.heading_at(s)
        return cx - n * np.sin(th), cy + n * np.cos(th)

    def validate(self, vehicle_half_width: float = 0.0) -> None:
        usable = np.where(np.isfinite(self.half_width), self.half_width - vehicle_half_width, 0.0)
        margin = 1.0 - usable * np.abs(self.curvature)
        if np.any(margin <= GEO_EPS):
            k = int(np.argmin(margin))
            raise TrackError(
                f"track too narrow/curved at s={self.s[k]:.1f} m: "
                f"1 - w*|C| = {margin[k]:.4f}"
            )


def _gradient(values: np.ndarray, closed: bool) -> np.ndarray:
    if closed:
        return 0.5 * (np.roll(values, -1) - np.roll(values, 1))
    return np.gradient(values)


def curvature_from_xy(
    points,
    widths=None,
    closed: bool | None = None,
    resample_step: float = 2.0,
    smooth_window: int = 0,
    rebuild_from_curvature: bool = False,
) -> Track:
    """Build a :class:`Track` from centerline X-Y samples.

    ``closed`` defaults to autodetection (first and last point coincide within
    one step).  ``smooth_window`` applies an optional moving average to the
    curvature (off by default; raw second differences amplify GPS noise).
    ``rebuild_from_curvature`` re-integrates heading and centerline from the
    final curvature samples so the stored geometry is exactly the curve the
    curvature table describes (used by the synthetic track generators, whose
    arc/straight junctions would otherwise leave curvature kinks inconsistent
    with the sampled polyline).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 5:
        raise TrackError("need at least 5 (x, y) points")
    if closed is None:
        closed = bool(np.hypot(*(pts[0] - pts[-1])) < 1e-6)
    if closed and np.hypot(*(pts[0] - pts[-1])) < 1e-6:
        pts = pts[:-1]
        if widths is not None and len(widths) == pts.shape[0] + 1:
            widths = np.asarray(widths, dtype=float)[:-1]
    seg = np.hypot(*np.diff(pts, axis=0).T)
    if np.any(seg < 1e-9):
        raise TrackError("coincident consecutive points")

    dx = _gradient(pts[:, 0], closed)
    dy = _gradient(pts[:, 1], closed)
    ddx = _gradient(dx, closed)
    ddy = _gradient(dy, closed)
    denom = np.sqrt(dx * dx + dy * dy)
    curv = (dx * ddy - ddx * dy) / (denom * denom * denom)

    chord = np.concatenate([[0.0], np.cumsum(seg)])
    total = chord[-1] + (np.hypot(*(pts[0] - pts[-1])) if closed else 0.0)
    s_raw = chord

    if widths is None:
        width = np.full(pts.shape[0], np.inf)
    else:
        width = np.asarray(widths, dtype=float)
        if width.shape != (pts.shape[0],):
            raise TrackError("widths must match the number of points")

    n_grid = max(int(round(total / resample_step)), 8)
    if closed:
        s_grid = np.linspace(0.0, total, n_grid, endpoint=False)
        grid_raw = np.append(s_raw, total)

        def _res(v):
            return np.interp(s_grid, grid_raw, np.append(v, v[0]))
    else:
        s_grid = np.linspace(0.0, total, n_grid)

        def _res(v):
            return np.interp(s_grid, s_raw, v)

    curv_g = _res(curv)
    if smooth_window > 1:
        kernel = np.ones(smooth_window) / smooth_window
        if closed:
            pad = smooth_window // 2
            ext = np.concatenate([curv_g[-pad:], curv_g, curv_g[:pad]])
            curv_g = np.convolve(ext, kernel, mode="same")[pad:-pad]
        else:
            curv_g = np.convolve(curv_g, kernel, mode="same")

    heading_raw = np.unwrap(np.arctan2(dy, dx))
    if rebuild_from_curvature:
        x_g, y_g, heading_g, curv_g = _integrate_curvature(
            curv_g, s_grid, float(total), closed,
            x0=float(pts[0, 0]), y0=float(pts[0, 1]), heading0=float(heading_raw[0]),
        )
    else:
        x_g, y_g, heading_g = _res(pts[:, 0]), _res(pts[:, 1]), _res(heading_raw)
    track = Track(
        s=s_grid,
        curvature=curv_g,
        half_width=_res(width) / 2.0 if widths is not None else np.full(n_grid, np.inf),
        x=x_g,
        y=y_g,
        heading=heading_g,
        closed=closed,
        total_length=float(total),
    )
    if closed:
        net = np.trapezoid(curv_g, s_grid) + curv_g[-1] * (total - s_grid[-1])
        if abs(abs(net) - 2.0 * np.pi) > 0.15:
            raise TrackError(f"closed track heading change {net:.3f} rad is not +-2*pi")
    return track


def _integrate_curvature(curv, s, total, closed, x0, y0, heading0):
    """Integrate a curvature profile into a self-consistent centerline.

    For closed loops the curvature is rescaled so the net turn is exactly
    +-2*pi and the residual endpoint gap is distributed linearly.
    """
    ds = np.diff(np.append(s, total)) if closed else np.gradient(s)
    if closed:
        net = float(np.sum(curv * ds))
        curv = curv * (np.sign(net) * 2.0 * np.pi / net)
        heading = heading0 + np.concatenate([[0.0], np.cumsum(curv * ds)])[:-1]
        # midpoint-rule position integration, then close the loop exactly
        h_mid = heading + 0.5 * curv * ds
        x = x0 + np.concatenate([[0.0], np.cumsum(ds * np.cos(h_mid))])[:-1]
        y = y0 + np.concatenate([[0.0], np.cumsum(ds * np.sin(h_mid))])[:-1]
        gap_x = (x[-1] + ds[-1] * np.cos(h_mid[-1])) - x0
        gap_y = (y[-1] + ds[-1] * np.sin(h_mid[-1])) - y0
        frac = s / total
        x = x - frac * gap_x
        y = y - frac * gap_y
    else:
        heading = heading0 + np.concatenate(
            [[0.0], np.cumsum(0.5 * (curv[1:] + curv[:-1]) * np.diff(s))]
        )
        x = x0 + np.concatenate([[0.0], np.cumsum(np.diff(s) * np.cos(0.5 * (heading[1:] + heading[:-1])))])
        y = y0 + np.concatenate([[0.0], np.cumsum(np.diff(s) * np.sin(0.5 * (heading[1:] + heading[:-1])))])
    return x, y, heading, curv


def path_rates(vx_global, vy_global, yaw, chi, n, curvature, eps: float = GEO_EPS):
    """Curvilinear projection rates ``(s_dot, n_dot, chi_dot)``.

    ``vx_global``/``vy_global`` are the body velocity components in the
    inertial frame; raises on the singularity ``1 - n C <= eps``.
    """
    theta = np.asarray(yaw, dtype=float) - np.asarray(chi, dtype=float)
    denom = 1.0 - np.asarray(n, dtype=float) * np.asarray(curvature, dtype=float)
    if np.any(denom <= eps):
        raise TrackError("curvilinear singularity: 1 - n*C <= eps")
    ct, st = np.cos(theta), np.sin(theta)
    s_dot = (vx_global * ct + vy_global * st) / denom
    n_dot = vy_global * ct - vx_global * st
    return s_dot, n_dot


def path_rate_chi(yaw_rate, curvature, s_dot):
    return np.asarray(yaw_rate, dtype=float) - np.asarray(curvature, dtype=float) * s_dot


# ----------------------------------------------------------------------
# synthetic track generators
# ----------------------------------------------------------------------

def _integrate_segments(segments, step: float = 1.0):
    """Integrate (length, curvature) segments into X-Y points (CCW positive)."""
    xs, ys = [0.0], [0.0]
    heading = 0.0
    for length, curv in segments:
        n = max(int(np.ceil(length / step)), 2)
        ds = length / n
        for _ in range(n):
            heading_mid = heading + 0.5 * curv * ds
            xs.append(xs[-1] + ds * np.cos(heading_mid))
            ys.append(ys[-1] + ds * np.sin(heading_mid))
            heading += curv * ds
    return np.column_stack([xs, ys]), heading


def make_oval(
    straight: float = 300.0,
    radius: float = 95.49297,
    width: float = 9.0,
    resample_step: float = 2.0,
    smooth_window: int = 15,
) -> Track:
    """Closed oval: two straights and two half circles, ~1.2 km by default.

    The default smoothing spreads each arc/straight junction over ~30 m so
    the curvature profile is optimizer-friendly (no derivative jumps)."""
    segments = [
        (straight, 0.0),
        (np.pi * radius, 1.0 / radius),
        (straight, 0.0),
        (np.pi * radius, 1.0 / radius),
    ]
    pts, _ = _integrate_segments(segments)
    pts[-1] = pts[0]  # integration closure error is below resolution
    return curvature_from_xy(
        pts,
        widths=np.full(pts.shape[0], width),
        closed=True,
        resample_step=resample_step,
        smooth_window=smooth_window,
        rebuild_from_curvature=True,
    )


def make_mini_circuit(width: float = 9.0, resample_step: float = 2.0) -> Track:
    """~1.9 km closed circuit with mixed left/right corners.

    A harmonically perturbed polar loop: closed by construction, tightest
    corner radius about 70 m, with both left- and right-handed curvature on a
    counter-clockwise lap.
    """
    t = np.linspace(0.0, 2.0 * np.pi, 1600, endpoint=False)
    rho = 280.0 * (1.0 + 0.22 * np.cos(2.0 * t) + 0.15 * np.sin(3.0 * t))
    pts = np.column_stack([rho * np.cos(t), rho * np.sin(t)])
    return curvature_from_xy(
        pts,
        widths=np.full(pts.shape[0], width),
        closed=True,
        resample_step=resample_step,
        rebuild_from_curvature=True,
    )


def make_s_curve(width: float = 9.0, resample_step: float = 2.0) -> Track:
    """Open S-shaped section: straight, left arc, right arc, straight."""
    segments = [
        (120.0, 0.0),
        (120.0, 1.0 / 80.0),
        (120.0, -1.0 / 80.0),
        (120.0, 0.0),
    ]
    pts, _ = _integrate_segments(segments)
    return curvature_from_xy(
        pts,
        widths=np.full(pts.shape[0], width),
        closed=False,
        resample_step=resample_step,
        smooth_window=10,
        rebuild_from_curvature=True,
    )


# ----------------------------------------------------------------------
# CSV interfaces
# ----------------------------------------------------------------------

def load_centerline_csv(path, resample_step: float = 2.0, closed: bool | None = None) -> Track:
    """Read an ``x,y[,width]`` CSV (header optional) and build the track."""
    rows = []
    widths = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                vals = [float(v) for v in row[:3]]
            except ValueError:
                continue  # header line
            rows.append(vals[:2])
            if len(vals) >= 3:
                widths.append(vals[2])
    if not rows:
        raise TrackError(f"no numeric x,y rows in {path}")
    w = np.asarray(widths) if len(widths) == len(rows) else None
    return curvature_from_xy(np.asarray(rows), widths=w, closed=closed, resample_step=resample_step)


def save_track_csv(track: Track, path) -> None:
    """Write the processed track as ``s,curvature,half_width,x,y,heading``."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["s", "curvature", "half_width", "x", "y", "heading"])
    for k in range(track.s.size):
        writer.writerow(
            [
                f"{track.s[k]:.6f}",
                f"{track.curvature[k]:.9g}",
                f"{track.half_width[k]:.6f}",
                f"{track.x[k]:.6f}",
                f"{track.y[k]:.6f}",
                f"{track.heading[k]:.9f}",
            ]
        )
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    if track.closed:  # marker row keeps the loader unambiguous
        with open(path, "a", newline="") as fh:
            fh.write(f"# closed=1 total_length={track.total_length:.6f}\n")


def load_track_csv(path) -> Track:
    """Load a file produced by :func:`save_track_csv`."""
    s, c, w, x, y, h = [], [], [], [], [], []
    closed = False
    total = None
    with open(path, newline="") as fh:
        for raw in fh:
            if raw.startswith("#"):
                closed = "closed=1" in raw
                for tok in raw.split():
                    if tok.startswith("total_length="):
                        total = float(tok.split("=")[1])
                continue
            row = raw.strip().split(",")
            try:
                vals = [float(v) for v in row]
            except ValueError:
                continue
            for target, v in zip((s, c, w, x, y, h), vals):
                target.append(v)
    s = np.asarray(s)
    if total is None:
        total = float(s[-1]) if s.size else 0.0
    return Track(
        s=s,
        curvature=np.asarray(c),
        half_width=np.asarray(w),
        x=np.asarray(x),
        y=np.asarray(y),
        heading=np.asarray(h),
        closed=closed,
        total_length=total,
    )
