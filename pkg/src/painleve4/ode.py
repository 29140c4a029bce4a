"""Adaptive Dormand–Prince 5(4) integration along polygonal paths in complex t."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Dormand & Prince (1980), FSAL tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

COMPLETED = "completed"
POLE = "pole-detected"
UNDERFLOW = "step-underflow"


class PoleError(ZeroDivisionError):
    """The right-hand side is singular at the requested point."""


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    reason: str = COMPLETED
    t_stop: complex | None = None
    step_errors: list = field(default_factory=list)

    @property
    def max_step_error(self) -> float:
        return max(self.step_errors, default=0.0)

    @property
    def pole_estimate(self) -> complex | None:
        """Pole location from a simple-pole model q ~ r/(t - t*): t* = t + q/q'."""
        if self.reason == COMPLETED:
            return None
        q, qp = self.y[-1, 0], self.dy[-1, 0]
        if qp == 0:
            return self.t[-1]
        return self.t[-1] + q / qp

    def __len__(self):
        return len(self.t)


def _path_vertices(path) -> list[complex]:
    pts = [complex(p) for p in path]
    if len(pts) < 2:
        raise ValueError("a path needs at least two vertices")
    return pts


def _step(rhs, t, y, k1, h, direction):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(direction * rhs(t + _C[i] * h * direction, yi))
    K = np.array(ks)
    y5 = y + h * (_B5 @ K)
    err = h * (_E @ K)
    return y5, ks[-1], err


def integrate(rhs, y0, path, tol: float = 1e-10, record: int | None = None,
              pole_threshold: float = 1e6, monitor: int = 0,
              fixed_step: float | None = None) -> Trajectory:
    """Integrate y' = rhs(t, y) along the straight segments of ``path``.

    ``record=n`` stores n+1 equally spaced samples on every segment (steps are
    clipped to hit them exactly); ``record=None`` stores every accepted step.
    Halts with "pole-detected" once |y[monitor]| exceeds ``pole_threshold`` and
    with "step-underflow" once the step drops below 1e-12 of the path length.
    The per-step error estimate is max_i |err_i| / (1 + |y_i|) <= tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    verts = _path_vertices(path)
    y = np.atleast_1d(np.asarray(y0, dtype=complex)).copy()
    t = verts[0]
    try:
        f = np.asarray(rhs(t, y), dtype=complex)
    except ZeroDivisionError as exc:
        raise PoleError(f"right-hand side singular at t0 = {t}") from exc
    if not np.all(np.isfinite(f)) or abs(y[monitor]) > pole_threshold:
        raise PoleError(f"pole at t0 = {t}")

    total = sum(abs(b - a) for a, b in zip(verts, verts[1:]))
    hmin = 1e-12 * total
    ts, ys, dys = [t], [y.copy()], [f.copy()]
    errors: list[float] = []
    h = fixed_step or (0.01 * total if total > 0 else 0.0)

    def stop(reason):
        return Trajectory(np.array(ts), np.array(ys), np.array(dys), reason, ts[-1], errors)

    for a, b in zip(verts, verts[1:]):
        length = abs(b - a)
        if length == 0:
            continue
        direction = (b - a) / length
        knots = np.linspace(0, length, record + 1)[1:] if record else [length]
        u = 0.0
        for knot in knots:
            while u < knot:
                last = h >= (knot - u) * (1 - 1e-9)
                step = knot - u if last else h
                try:
                    y_new, f_dir, err = _step(rhs, a + u * direction, y, direction * f, step, direction)
                    ok = np.all(np.isfinite(y_new))
                except ZeroDivisionError:
                    ok = False
                if ok:
                    en = float(np.max(np.abs(err) / (1 + np.abs(y))))
                else:
                    en = np.inf
                if fixed_step is None and en > tol:
                    h = step * max(0.1, 0.9 * (tol / en) ** 0.2) if np.isfinite(en) else step * 0.1
                    if h < hmin:
                        return stop(UNDERFLOW)
                    continue
                if not ok:
                    return stop(POLE)
                u = knot if last else u + step
                y = y_new
                f = f_dir / direction
                errors.append(en)
                if fixed_step is None:
                    grow = 5.0 if en == 0 else min(5.0, 0.9 * (tol / en) ** 0.2)
                    if not last or grow < 1:
                        h = step * grow
                if record is None or last:
                    ts.append(a + u * direction)
                    ys.append(y.copy())
                    dys.append(f.copy())
                if abs(y[monitor]) > pole_threshold:
                    if not (record is None or last):
                        ts.append(a + u * direction)
                        ys.append(y.copy())
                        dys.append(f.copy())
                    return stop(POLE)
    return Trajectory(np.array(ts), np.array(ys), np.array(dys), COMPLETED, ts[-1], errors)


def fd_derivative(values, h) -> np.ndarray:
    """Fourth-order finite-difference derivative of samples with uniform (complex) spacing h."""
    v = np.asarray(values)
    n = len(v)
    if n < 5:
        raise ValueError("need at least five samples")
    d = np.empty_like(v, dtype=complex)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    fwd = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    d[0] = fwd @ v[0:5]
    d[1] = np.array([-3, -10, 18, -6, 1]) / (12 * h) @ v[0:5]
    d[-1] = -(fwd @ v[::-1][0:5])
    d[-2] = -(np.array([-3, -10, 18, -6, 1]) / (12 * h) @ v[::-1][0:5])
    return d


def uniform_spacing(t) -> complex:
    """Common spacing of a uniformly sampled straight path, or ValueError."""
    t = np.asarray(t)
    dt = np.diff(t)
    h = dt.mean()
    if np.max(np.abs(dt - h)) > 1e-9 * max(abs(h), 1e-300):
        raise ValueError("samples are not uniformly spaced along a straight path")
    return h
