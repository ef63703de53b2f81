"""Central-difference Christoffel / Riemann / Ricci pipeline.

Metric derivatives are taken by central differences with one Richardson
step. When ``dps`` is given the metric is sampled and the curvature
assembled in mpmath at that precision, which keeps the cancellations
accurate for metrics with very small warp factors.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np

Evaluator = Callable[[np.ndarray], np.ndarray]

# mpmath precision is process-global, so high-precision runs are serialized
_MP_LOCK = threading.Lock()


@dataclass(frozen=True)
class MetricField:
    """Metric as a callable on coordinate vectors.

    The evaluator must also accept object arrays of ``mpmath.mpf`` when
    the field is used with ``dps``.
    """

    evaluator: Evaluator
    step: float = 1e-3
    dim: int = 4

    def __call__(self, x) -> np.ndarray:
        return self.evaluator(x)


@dataclass
class CurvatureReport:
    metric: np.ndarray
    christoffel: np.ndarray  # [a, b, c] = Gamma^a_{bc}
    riemann: np.ndarray  # [a, b, c, d] = R^a_{bcd}
    ricci: np.ndarray
    scalar: float
    sectional: np.ndarray  # [i, j] = K(d_i, d_j)
    bianchi_residual: float
    ricci_asymmetry: float


def _stencil_derivatives(field: MetricField, x, h):
    n = field.dim
    g0 = field(x)
    dg = [[None] * n for _ in range(n)]
    ddg = [[None] * n for _ in range(n)]
    e = np.eye(n, dtype=int)
    plus = [field(x + h * e[i]) for i in range(n)]
    minus = [field(x - h * e[i]) for i in range(n)]
    for i in range(n):
        dg[i] = (plus[i] - minus[i]) / (2 * h)
        ddg[i][i] = (plus[i] - 2 * g0 + minus[i]) / (h * h)
    for i in range(n):
        for j in range(i + 1, n):
            pp = field(x + h * e[i] + h * e[j])
            pm = field(x + h * e[i] - h * e[j])
            mp_ = field(x - h * e[i] + h * e[j])
            mm = field(x - h * e[i] - h * e[j])
            ddg[i][j] = ddg[j][i] = (pp - pm - mp_ + mm) / (4 * h * h)
    return g0, dg, ddg


def _inverse(g: np.ndarray) -> np.ndarray:
    if g.dtype == object:
        try:
            inv = mpmath.matrix(g.tolist()) ** -1
        except ZeroDivisionError as exc:
            raise np.linalg.LinAlgError("singular metric at evaluation point") from exc
        n = g.shape[0]
        return np.array([[inv[i, k] for k in range(n)] for i in range(n)], dtype=object)
    try:
        return np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular metric at evaluation point") from exc


def metric_derivatives(field: MetricField, x, step: float | None = None, dps: int | None = None):
    """Return (g, dg, ddg) with dg[k,i,j] = d_k g_ij and ddg[k,l,i,j].

    With ``dps`` the arrays hold mpmath numbers; call inside
    ``mpmath.workdps(dps)`` to keep that precision downstream.
    """
    h = field.step if step is None else step
    if dps is None:
        xs = np.asarray(x, dtype=float)
    else:
        xs = np.array([mpmath.mpf(v) for v in np.asarray(x, dtype=object)], dtype=object)
        h = mpmath.mpf(h)
    g, d1, dd1 = _stencil_derivatives(field, xs, h)
    _, d2, dd2 = _stencil_derivatives(field, xs, h / 2)
    dg = (4 * np.array(d2) - np.array(d1)) / 3
    ddg = (4 * np.array(dd2) - np.array(dd1)) / 3
    return np.asarray(g), dg, ddg


def curvature_from_derivatives(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> CurvatureReport:
    """Assemble curvature; works on float arrays and on mpmath object arrays."""
    ginv = _inverse(g)
    # lowered Christoffels [d, b, c] and their derivatives [e, d, b, c]
    low = (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg) / 2
    dlow = (np.einsum("ebdc->edbc", ddg) + np.einsum("ecdb->edbc", ddg) - ddg) / 2
    gam = np.einsum("ad,dbc->abc", ginv, low)
    dginv = -np.einsum("ap,epq,qd->ead", ginv, dg, ginv)
    dgam = np.einsum("ead,dbc->eabc", dginv, low) + np.einsum("ad,edbc->eabc", ginv, dlow)
    riem = (
        np.einsum("cadb->abcd", dgam)
        - np.einsum("dacb->abcd", dgam)
        + np.einsum("ace,edb->abcd", gam, gam)
        - np.einsum("ade,ecb->abcd", gam, gam)
    )
    ric = np.einsum("abad->bd", riem)
    scalar = np.einsum("bd,bd->", ginv, ric)
    lower = np.einsum("ae,ebcd->abcd", g, riem)
    n = g.shape[0]
    sect = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                sect[i, j] = float(lower[i, j, i, j] / (g[i, i] * g[j, j] - g[i, j] ** 2))
    bianchi = riem + np.einsum("acdb->abcd", riem) + np.einsum("adbc->abcd", riem)
    as_f = lambda a: np.asarray(a).astype(float)
    return CurvatureReport(
        metric=as_f(g),
        christoffel=as_f(gam),
        riemann=as_f(riem),
        ricci=as_f(ric),
        scalar=float(scalar),
        sectional=sect,
        bianchi_residual=float(np.max(np.abs(as_f(bianchi)))),
        ricci_asymmetry=float(np.max(np.abs(as_f(ric - ric.T)))),
    )


def curvature_report(field: MetricField, point, step: float | None = None, dps: int | None = None) -> CurvatureReport:
    if dps is None:
        return curvature_from_derivatives(*metric_derivatives(field, point, step))
    with _MP_LOCK, mpmath.workdps(dps):
        return curvature_from_derivatives(*metric_derivatives(field, point, step, dps))


def lie_derivative_metric(field: MetricField, vector: Callable[[np.ndarray], np.ndarray], point, step: float | None = None) -> np.ndarray:
    """(L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k."""
    h = field.step if step is None else step
    x = np.asarray(point, dtype=float)
    n = field.dim
    g = field(x)
    X = np.asarray(vector(x), dtype=float)
    if not np.any(X):
        dX = np.zeros((n, n))
    else:
        dX = np.empty((n, n))  # [i, k] = d_i X^k
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            dX[i] = (np.asarray(vector(x + e)) - np.asarray(vector(x - e))) / (2 * h)
    _, dg, _ = metric_derivatives(field, x, h)
    return (
        np.einsum("k,kij->ij", X, dg)
        + np.einsum("kj,ik->ij", g, dX)
        + np.einsum("ik,jk->ij", g, dX)
    )
