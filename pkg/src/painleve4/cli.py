"""Command line front end: integrate, verify, backlund, classify.

Exit codes: 0 all checks pass, 1 failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import backlund as bk
from . import monodromy as mono
from . import noumi_yamada as ny
from .isomonodromy import (LaxPairData, flow_rhs, lax_residual, piv_fd_residual, piv_system,
                           reducible_lax_residual, riccati_rhs)
from .ode import COMPLETED, PoleError, integrate
from .rank2_moduli import ThetaParams

SCHEMA = 1
CSV_FMT = "%.16e"


class UsageError(Exception):
    pass


# --- parsing helpers --------------------------------------------------------

def _num(s: str):
    s = s.strip().replace("i", "j")
    try:
        v = complex(s)
    except ValueError as exc:
        raise UsageError(f"not a number: {s!r}") from exc
    return v.real if v.imag == 0 else v


def _nums(s: str, n: int | None = None) -> list:
    vals = [_num(p) for p in s.split(",")]
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma-separated values, got {s!r}")
    return vals


def _path(s: str) -> list[complex]:
    pts = [complex(_num(p)) for p in s.split(":")]
    if len(pts) < 2:
        raise UsageError("--t needs at least two vertices, e.g. 0:1")
    return pts


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)] if v.imag else float(v.real)
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(report: dict) -> str:
    return json.dumps(_jsonable({"schema": SCHEMA, **report}), sort_keys=True, indent=2) + "\n"


def _csv(columns: dict[str, np.ndarray], footer: dict) -> str:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    buf = io.StringIO()
    buf.write(",".join(names) + "\n")
    np.savetxt(buf, data, fmt=CSV_FMT, delimiter=",")
    buf.write("# " + " ".join(f"{k}={_fmt(v)}" for k, v in footer.items()) + "\n")
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return CSV_FMT % v
    if isinstance(v, complex):
        return f"({CSV_FMT % v.real},{CSV_FMT % v.imag})"
    return str(v)


def _split(name: str, z) -> dict:
    z = np.asarray(z, dtype=complex)
    return {f"{name}_re": z.real, f"{name}_im": z.imag}


def _segment_residual(t, steps: int, fn) -> float:
    """Max of fn over each recorded segment of ``steps`` + 1 uniform samples."""
    best = np.nan
    for i0 in range(0, len(t) - 1, steps):
        s = slice(i0, min(i0 + steps + 1, len(t)))
        if s.stop - s.start < 5:
            continue
        try:
            r = float(np.max(fn(s)))
        except ValueError:  # truncated non-uniform tail
            continue
        best = r if np.isnan(best) else max(best, r)
    return best


# --- integrate --------------------------------------------------------------

def cmd_integrate(a) -> int:
    if a.tol <= 0:
        raise UsageError("--tol must be positive")
    path = _path(a.t)
    if a.system == "piv":
        p = ThetaParams(_num(a.theta0), _num(a.thetainf))
        y0 = [_num(a.q0), _num(a.qp0)]
        rhs = piv_system(p)
    else:
        e = ny.EpsTriple(*_nums(a.eps, 3))
        y0 = _nums(a.f, 3)
        if abs(sum(y0) - path[0]) > 1e-12 * max(1.0, abs(path[0])):
            raise UsageError("the path must start at t = f0 + f1 + f2")
        rhs = ny.ny_system(e)
    try:
        tr = integrate(rhs, y0, path, tol=a.tol, record=a.steps)
    except PoleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    footer = {"reason": tr.reason, "max_step_error": tr.max_step_error}
    if tr.reason != COMPLETED:
        footer["pole_estimate"] = complex(tr.pole_estimate)
    cols = _split("t", tr.t)
    if a.system == "piv":
        cols.update(_split("q", tr.y[:, 0]))
        cols.update(_split("qp", tr.y[:, 1]))
        footer["piv_residual"] = _segment_residual(
            tr.t, a.steps, lambda s: piv_fd_residual(tr.t[s], tr.y[s, 0], tr.y[s, 1], p))
    else:
        for k in range(3):
            cols.update(_split(f"f{k}", tr.y[:, k]))
        footer["fsum_drift"] = float(np.max(np.abs(tr.y.sum(axis=1) - tr.t)))
    if a.format == "json":
        _emit(_json({"command": "integrate", "system": a.system, "columns": cols, **footer}), a.out)
    else:
        _emit(_csv(cols, footer), a.out)
    return 0 if tr.reason == COMPLETED else 1


# --- verify -----------------------------------------------------------------

def _cplx(rng, scale=1.0):
    return complex(rng.normal(0, scale), rng.normal(0, scale))


def _q(rng):
    while True:
        q = _cplx(rng)
        if abs(q) >= 0.1:
            return q


def _draw_lax(rng):
    return (_q(rng), _cplx(rng), _cplx(rng), _cplx(rng), _cplx(rng))


def _run_lax(s):
    q, a0, t, th0, thi = s
    p = ThetaParams(th0, thi)
    return lax_residual(LaxPairData(q, a0, t, p), *flow_rhs(t, (q, a0), p)).max_abs()


def _draw_ny(rng):
    return (_cplx(rng), _cplx(rng), _cplx(rng), _cplx(rng), _cplx(rng))


def _run_ny(s):
    f0, f1, f2, e1, e2 = s
    return ny.ny_lax_residual(ny.NYState.from_f(f0, f1, f2), ny.EpsTriple.from_pair(e1, e2)).max_abs()


def _draw_reducible(rng):
    return (_cplx(rng), _cplx(rng), _cplx(rng), 1 if rng.random() < 0.5 else -1)


def _run_reducible(s):
    q, t, d, sign = s
    return reducible_lax_residual(q, riccati_rhs(t, q, d, sign), t, d, sign).max_abs()


def _run_lattice(t):
    return ny.verify_h_basis_change(t)


def _draw_x(rng):
    return tuple(_cplx(rng) for _ in range(4))


def _run_charpoly(x):
    return mono.charpoly_deviation(mono.Rank3Stokes(*x))


def _run_missing(s):
    p = ThetaParams(*s)
    want = ny.theta_from_eps(ny.eps_cycle(ny.eps_from_theta(p)))
    got = bk.missing_generator(p)
    return max(abs(got.theta0 - want.theta0), abs(got.thetainf - want.thetainf))


SAMPLED = {
    "lax": (_draw_lax, _run_lax, 100, 1e-12),
    "ny-lax": (_draw_ny, _run_ny, 100, 1e-12),
    "reducible": (_draw_reducible, _run_reducible, 100, 1e-12),
    "lattice": (_cplx, _run_lattice, 20, 1e-12),
    "charpoly": (_draw_x, _run_charpoly, 1000, 1e-12),
    "missing-generator": (lambda r: (_cplx(r), _cplx(r)), _run_missing, 100, 1e-12),
}


def _sampled_report(name, a) -> dict:
    draw, run, n_default, tol_default = SAMPLED[name]
    n = a.samples if a.samples is not None else n_default
    tol = a.tol if a.tol is not None else tol_default
    rng = np.random.default_rng(a.seed)
    samples = [draw(rng) for _ in range(n)]
    with ThreadPoolExecutor(max_workers=a.workers) as pool:
        res = list(pool.map(run, samples))
    worst = max(res, default=0.0)
    return {"check": name, "samples": n, "seed": a.seed, "tol": tol,
            "max_residual": worst, "pass": bool(worst < tol)}


def cmd_verify(a) -> int:
    if a.tol is not None and a.tol <= 0:
        raise UsageError("--tol must be positive")
    if a.check in SAMPLED:
        rep = _sampled_report(a.check, a)
    elif a.check == "stokes-directions":
        tol = a.tol if a.tol is not None else 1e-12
        dev = mono.direction_table_deviation()
        rows = [{"k": k, "l": l, "phi": phi, "d": d} for k, l, phi, d in mono.singular_directions()]
        rep = {"check": a.check, "rows": rows, "max_residual": dev, "tol": tol, "pass": dev < tol}
    elif a.check == "group":
        if a.action == "sigma":
            s = bk.sigma_group_summary()
            rep = {"check": "group", "action": "sigma", **s,
                   "pass": s["order"] == 16 and s["commutative"]}
        else:
            words = bk.find_shift_words()
            rep = {"check": "group", "action": "tilde",
                   "shift_words": {f"{k[0]},{k[1]}": "".join(map(str, v)) if v else None
                                   for k, v in words.items()},
                   "pass": all(v is not None for v in words.values())}
    else:
        raise UsageError(f"unknown check {a.check!r}")
    _emit(_json(rep), a.out)
    return 0 if rep["pass"] else 1


# --- backlund ---------------------------------------------------------------

def _read_trajectory(path: str):
    data = np.loadtxt(path, delimiter=",", comments="#", skiprows=1, ndmin=2)
    return (data[:, 0] + 1j * data[:, 1], data[:, 2] + 1j * data[:, 3], data[:, 4] + 1j * data[:, 5])


def cmd_backlund(a) -> int:
    p = ThetaParams(_num(a.theta0), _num(a.thetainf))
    try:
        word = bk.parse_word(a.word)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if a.input:
        t, q, qp = _read_trajectory(a.input)
    else:
        try:
            tr = integrate(piv_system(p), [_num(a.q0), _num(a.qp0)], _path(a.t), tol=a.tol,
                           record=a.steps)
        except PoleError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        t, q, qp = tr.t, tr.y[:, 0], tr.y[:, 1]
    T, Q, QP = [], [], []
    target = p
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            for ti, qi, qpi in zip(t, q, qp):
                tt, qq, qqp, target = bk.solution_map(word, ti, qi, qpi, p, margin=a.margin)
                T.append(tt)
                Q.append(qq)
                QP.append(qqp)
    except bk.SingularLocusError as exc:
        print(f"error: singular locus, leaf identity value {_fmt(complex(exc.leaf_value))}",
              file=sys.stderr)
        return 1
    if caught:
        print(f"warning: {caught[0].message}", file=sys.stderr)
    T, Q, QP = (np.array(v, dtype=complex) for v in (T, Q, QP))
    res = np.full(len(T), np.nan)
    if len(T) >= 5:
        try:
            res = piv_fd_residual(T, Q, QP, target)
        except ValueError:
            pass
    cols = {**_split("t", T), **_split("q", Q), **_split("qp", QP), "piv_residual": res}
    footer = {"word": a.word or "id", "theta0": complex(target.theta0),
              "thetainf": complex(target.thetainf),
              "max_residual": float(np.nanmax(res)) if np.any(np.isfinite(res)) else float("nan")}
    _emit(_csv(cols, footer), a.out)
    return 0


# --- classify ---------------------------------------------------------------

def cmd_classify(a) -> int:
    X = mono.Rank3Stokes(*_nums(a.x, 4))
    info = mono.fiber_singularity(X)
    cp = mono.rank3_charpoly(X)
    rep = {"command": "classify", "x": list(X.x), "e1": cp.e1, "e2": cp.e2,
           "kind": info.kind, "jacobian_rank": info.jacobian_rank,
           "eigenvalues": list(info.eigenvalues),
           "geometric_multiplicities": list(info.geometric_multiplicities),
           "jordan_blocks": info.jordan_blocks, "indeterminate": info.indeterminate}
    if a.mu:
        try:
            fam = mono.invariant_flags(X, _nums(a.mu, 3))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rep["flags"] = {"component": fam.component, "representatives": len(fam.flags),
                        "right_dim": fam.right_dim, "left_dim": fam.left_dim,
                        "pairing_rank": fam.pairing_rank}
    _emit(_json(rep), a.out)
    return 0


# --- entry ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="painleve4", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    it = sub.add_parser("integrate", help="integrate PIV or the symmetric system")
    it.add_argument("system", choices=["piv", "ny"])
    it.add_argument("--theta0", default="1")
    it.add_argument("--thetainf", default="0")
    it.add_argument("--q0", default="1")
    it.add_argument("--qp0", default="0")
    it.add_argument("--eps", default="0,0,0")
    it.add_argument("--f", default="1,1,1")
    it.add_argument("--t", default="0:1", help="polygonal path v0:v1:..., complex allowed")
    it.add_argument("--steps", type=int, default=100, help="samples per segment")
    it.add_argument("--tol", type=float, default=1e-10)
    it.add_argument("--format", choices=["csv", "json"], default="csv")
    it.add_argument("--seed", type=int, default=0)
    it.add_argument("--out")
    it.set_defaults(func=cmd_integrate)

    ve = sub.add_parser("verify", help="run a library identity check")
    ve.add_argument("check", choices=sorted([*SAMPLED, "stokes-directions", "group"]))
    ve.add_argument("--samples", type=int)
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--tol", type=float)
    ve.add_argument("--action", choices=["sigma", "tilde"], default="sigma")
    ve.add_argument("--workers", type=int, default=4)
    ve.add_argument("--out")
    ve.set_defaults(func=cmd_verify)

    bl = sub.add_parser("backlund", help="push a PIV trajectory through a group word")
    bl.add_argument("--word", default="2", help="generators 1-3, rightmost acts first")
    bl.add_argument("--theta0", default="1")
    bl.add_argument("--thetainf", default="0")
    bl.add_argument("--q0", default="1")
    bl.add_argument("--qp0", default="0")
    bl.add_argument("--t", default="0:1")
    bl.add_argument("--steps", type=int, default=100)
    bl.add_argument("--tol", type=float, default=1e-10)
    bl.add_argument("--margin", type=float, default=0.0)
    bl.add_argument("--input", help="trajectory CSV written by integrate piv")
    bl.add_argument("--out")
    bl.set_defaults(func=cmd_backlund)

    cl = sub.add_parser("classify", help="singularity and flag data of x = (x1..x4)")
    cl.add_argument("--x", required=True)
    cl.add_argument("--mu")
    cl.add_argument("--out")
    cl.set_defaults(func=cmd_classify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        return a.func(a)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
