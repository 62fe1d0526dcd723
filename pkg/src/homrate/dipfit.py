"""HOM dip curves and the parabolic fit that turns them into a rate.

A sweep samples P₁,₁[ψ(f), ψ(f + δf)] on a grid of δf. Close to the bottom
of the dip P₁,₁ ≈ a + b·δf + (c/2)·δf², so the fitted curvature ``c`` is
an estimate of R_f. The quartic part of the dip biases wide windows low;
the fit reports an estimate of that bias derived from its own residual.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .overlap import p11_pure
from .quadrature import QuadratureSpec
from .wavepacket import GaussianWavePacket, ParaxialWarning, apply_dof, dof_kind

CSV_HEADER = ("delta_f", "p11", "err")
MIN_SWEEP_POINTS = 11
MIN_FIT_POINTS = 5
#: auto window is WINDOW_FACTOR / sqrt(R)
WINDOW_FACTOR = 0.1
#: relative curvature bias above which a fit is flagged as too wide
BIAS_FLAG = 0.01

_COND_LIMIT = 1e8


@dataclass(frozen=True, eq=False)
class DipCurve:
    """Sampled (δf, P₁,₁, error) triples plus the parabolic fit, once done.

    Points where the shifted packet was invalid carry ``p11 = nan`` and the
    reason in ``messages``; they are skipped by the fit.
    """

    f_kind: str
    delta_f: np.ndarray
    p11: np.ndarray
    err: np.ndarray
    messages: tuple = ()
    engine: str = ""
    fit_window: float | None = None
    a: float | None = None
    b: float | None = None
    curvature: float | None = None
    fit_residual: float | None = None
    bias_bound: float | None = None
    flags: tuple = field(default=())

    def __post_init__(self):
        x = np.asarray(self.delta_f, dtype=float)
        y = np.asarray(self.p11, dtype=float)
        e = np.asarray(self.err, dtype=float)
        if not x.shape == y.shape == e.shape or x.ndim != 1:
            raise ValueError("delta_f, p11 and err must be 1D arrays of equal length")
        msgs = tuple(self.messages) or ("",) * x.size
        if len(msgs) != x.size:
            raise ValueError("messages must match the number of samples")
        order = np.argsort(x, kind="stable")
        if np.any(np.diff(x[order]) == 0):
            raise ValueError("duplicate delta_f samples")
        ok = np.isfinite(y)
        if np.any((y[ok] < 0) | (y[ok] > 0.5)):
            raise ValueError("p11 samples must lie in [0, 1/2]")
        for name, arr in (("delta_f", x[order]), ("p11", y[order]), ("err", e[order])):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "messages", tuple(msgs[i] for i in order))

    @property
    def samples(self) -> list[tuple[float, float, float]]:
        return list(zip(self.delta_f.tolist(), self.p11.tolist(), self.err.tolist()))

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.p11)


def sweep(wp: GaussianWavePacket, f, lo: float, hi: float, n_points: int = 101,
          engine: str = "analytic", quad: QuadratureSpec | None = None) -> DipCurve:
    """P₁,₁[ψ, ψ(f + δf)] on ``n_points`` equally spaced δf in [lo, hi].

    Shifts that leave the valid parameter domain (for instance a width
    crossing zero) or the validity range of the engine are recorded per
    point instead of aborting the sweep.
    """
    kind = dof_kind(f)
    if not lo < 0 < hi:
        raise ValueError(f"sweep range must satisfy lo < 0 < hi, got [{lo}, {hi}]")
    if int(n_points) != n_points or n_points < MIN_SWEEP_POINTS:
        raise ValueError(f"n_points must be an integer >= {MIN_SWEEP_POINTS}")
    grid = np.linspace(lo, hi, int(n_points))
    p11 = np.full(grid.size, np.nan)
    err = np.full(grid.size, np.nan)
    messages = [""] * grid.size
    paraxial = []
    for i, d in enumerate(grid):
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", ParaxialWarning)
                shifted = apply_dof(wp, kind, d)
        except ValueError as exc:
            messages[i] = f"domain: {exc}"
            continue
        if any(issubclass(w.category, ParaxialWarning) for w in caught):
            paraxial.append(float(d))
        try:
            c = p11_pure(wp, shifted, engine, quad)
        except ValueError as exc:
            messages[i] = f"engine: {exc}"
            continue
        p11[i], err[i] = c.probability, c.error_estimate
    if paraxial:
        warnings.warn(f"{len(paraxial)} sweep points leave the paraxial regime "
                      f"(delta_f from {min(paraxial):.6g} to {max(paraxial):.6g})",
                      ParaxialWarning, stacklevel=2)
    return DipCurve(kind, grid, p11, err, tuple(messages), engine)


def _pilot_curvature(x: np.ndarray, y: np.ndarray) -> float:
    # second divided difference at the sample closest to δf = 0
    i = int(np.clip(np.argmin(np.abs(x)), 1, x.size - 2))
    x0, x1, x2 = x[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    return 2.0 * ((y2 - y1) / (x2 - x1) - (y1 - y0) / (x1 - x0)) / (x2 - x0)


def _design(x, window, even_only, cubic=False):
    u = x / window
    cols = [np.ones_like(u)] if even_only else [np.ones_like(u), u]
    cols.append(0.5 * u * u)
    if cubic and not even_only:
        cols.append(u ** 3)
    return np.column_stack(cols)


def _solve(x, y, sw, window, even_only, cubic=False):
    design = _design(x, window, even_only, cubic)
    lhs = design * sw[:, None]
    cond = np.linalg.cond(lhs)
    if cond > _COND_LIMIT:
        raise ValueError(f"ill-conditioned parabola fit (condition number {cond:.2e})")
    coef, *_ = np.linalg.lstsq(lhs, y * sw, rcond=None)
    return coef, design


def _rms(v) -> float:
    return float(np.sqrt(np.mean(v ** 2)))


def _fit_window(x, y, e, window, even_only):
    # relative slack keeps grid points on the window edge symmetric
    inside = np.abs(x) <= window * (1.0 + 1e-9)
    n_inside = int(np.count_nonzero(inside))
    if n_inside < MIN_FIT_POINTS:
        raise ValueError(
            f"only {n_inside} samples inside |delta_f| <= {window:.6g}; "
            f"at least {MIN_FIT_POINTS} are needed")
    xw, yw = x[inside], y[inside]
    ew = e[inside]
    finite = ew[np.isfinite(ew)]
    floor = max(float(np.max(finite)) if finite.size else 0.0, np.finfo(float).eps) * 1e-3
    sw = 1.0 / np.maximum(np.where(np.isfinite(ew), ew, floor), floor)
    sw = sw / np.max(sw)
    coef, design = _solve(xw, yw, sw, window, even_only)
    rms = _rms(yw - design @ coef)

    # Quartic bias of c: estimate the quartic content from the residual of a
    # fit that also absorbs the odd cubic part (which does not bias c), then
    # scale by how the plain fit maps a pure quartic onto c.
    q = (xw / window) ** 4
    qcoef, _ = _solve(xw, q, sw, window, even_only)
    bias = 0.0
    if n_inside > design.shape[1] + 1:
        ycoef, ext = _solve(xw, yw, sw, window, even_only, cubic=True)
        qext, _ = _solve(xw, q, sw, window, even_only, cubic=True)
        q_rms = _rms(q - ext @ qext)
        bias = abs(qcoef[-1]) * _rms(yw - ext @ ycoef) / q_rms / window ** 2

    a = float(coef[0])
    b = 0.0 if even_only else float(coef[1] / window)
    c = float(coef[-1] / window ** 2)
    return a, b, c, rms, float(bias)


def fit_parabola(curve: DipCurve, window: float | None = None,
                 even_only: bool = False) -> DipCurve:
    """Weighted least-squares fit of P₁,₁ ≈ a + b·δf + (c/2)·δf² on |δf| <= window.

    Without ``window`` a pilot curvature from the three samples around
    δf = 0 sets window = 0.1/sqrt(R̂), which is refined once with the fitted
    curvature. ``even_only`` drops the linear term. Weights are the inverse
    sample errors. The returned curve carries a, b, curvature (the R_f
    estimate), the RMS residual and a bound on the quartic bias of the
    curvature; ``flags`` may contain ``wide_window`` (bias above 1 % of the
    curvature) and ``off_center`` (parabola minimum outside the window).
    """
    ok = curve.valid
    x, y, e = curve.delta_f[ok], curve.p11[ok], curve.err[ok]
    if x.size < MIN_FIT_POINTS:
        raise ValueError(f"need at least {MIN_FIT_POINTS} valid samples, got {x.size}")
    if window is None:
        pilot = _pilot_curvature(x, y)
        if not pilot > 0:
            raise ValueError("pilot curvature is not positive; pass an explicit window")
        window = WINDOW_FACTOR / math.sqrt(pilot)
        c = _fit_window(x, y, e, window, even_only)[2]
        if not c > 0:
            raise ValueError("fitted curvature is not positive; pass an explicit window")
        window = WINDOW_FACTOR / math.sqrt(c)
    elif not window > 0:
        raise ValueError("window must be positive")
    a, b, c, rms, bias = _fit_window(x, y, e, float(window), even_only)

    flags = []
    if bias > BIAS_FLAG * abs(c):
        flags.append("wide_window")
    if c != 0 and abs(b / c) > window:
        flags.append("off_center")
    return replace(curve, fit_window=float(window), a=a, b=b, curvature=c,
                   fit_residual=rms, bias_bound=bias, flags=tuple(flags))


def fit_summary(curve: DipCurve) -> dict:
    """JSON-ready summary of a fitted curve."""
    if curve.curvature is None:
        raise ValueError("curve has not been fitted")
    return {
        "f_kind": curve.f_kind,
        "window": curve.fit_window,
        "a": curve.a,
        "b": curve.b,
        "curvature": curve.curvature,
        "residual": curve.fit_residual,
        "bias_bound": curve.bias_bound,
        "flags": list(curve.flags),
    }


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(curve: DipCurve, stream) -> None:
    """Write ``delta_f,p11,err`` rows; failed points put their reason in ``err``."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for x, y, e, msg in zip(curve.delta_f, curve.p11, curve.err, curve.messages):
        if msg:
            writer.writerow([_fmt(x), "nan", msg])
        else:
            writer.writerow([_fmt(x), _fmt(y), _fmt(e)])


def curve_to_csv(curve: DipCurve) -> str:
    buf = io.StringIO()
    write_csv(curve, buf)
    return buf.getvalue()


def read_csv(stream, f_kind: str = "") -> DipCurve:
    """Inverse of :func:`write_csv`."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
        raise ValueError(f"CSV header must be {','.join(CSV_HEADER)}, got {header}")
    xs, ys, es, msgs = [], [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 columns, got {len(row)}")
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            raise ValueError(f"line {lineno}: delta_f and p11 must be numbers") from None
        try:
            e, msg = float(row[2]), ""
        except ValueError:
            e, msg = float("nan"), row[2] or "error"
        if msg:
            y = float("nan")
        xs.append(x)
        ys.append(y)
        es.append(e)
        msgs.append(msg)
    if not xs:
        raise ValueError("CSV contains no samples")
    return DipCurve(f_kind, np.array(xs), np.array(ys), np.array(es), tuple(msgs))
