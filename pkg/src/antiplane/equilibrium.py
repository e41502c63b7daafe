"""Full 3D equilibrium checks for a computed anti-plane solution.

The three components of div sigma are evaluated under the pressure ansatz
p = c x3 + pbar(x1, x2).  Nothing else depends on x3, so the axial derivative
acts analytically: the x3 equation picks up -c and the two in-plane equations
pick up +c g_alpha, and no 3D grid is ever built.

The x3 equation is div tau - c at interior nodes, with the same compact
stencil the energy gradient uses.  The in-plane equations hold for some pbar
iff their pressure-free forcing is a discrete gradient field; that is tested
by a scalar curl on 2x2 node patches, which equals the trapezoid loop
circulation around each patch divided by h^2.  Zero curl therefore makes the
trapezoid path integration of pbar exact and path independent, and the
mismatch between the two independent integration paths (the closure error)
is itself the compatibility diagnostic.

Verdicts about whether a residual is discretization error or a genuine
obstruction come from a two-grid refinement study, not from absolute
thresholds: halving h should shrink a compatible residual at first order or
better.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import (
    Domain,
    cell_dx_at_interior,
    cell_dy_at_interior,
    cell_mean_at_interior,
    gradient_field,
    integral_l2,
    interior_divergence,
)
from .materials import MaterialModel

__all__ = [
    "PressureAnsatz",
    "EquilibriumReport",
    "SweepPoint",
    "full_residual",
    "pressure_compatibility",
    "c_sweep",
    "in_plane_forcing",
    "scalar_curl_interior",
    "reconstruct_potential",
]

# verdict slopes for the two-grid study
_SLOPE_CONSISTENT = 0.9
_SLOPE_INCOMPATIBLE = 0.2
_ROUNDOFF_FACTOR = 1e-10


@dataclass(frozen=True)
class PressureAnsatz:
    """p = c x3 + pbar(x1, x2); pbar is cell-centred, absent means zero."""

    c: float = 0.0
    pbar: np.ndarray | None = None


@dataclass
class EquilibriumReport:
    """Residual norms of the three equilibrium equations plus the pressure
    compatibility diagnostics.  Norms are integral-scaled L2 over the nodes
    or cells where each field lives."""

    res_x1: float
    res_x2: float
    res_x3: float
    curl_residual: float | None = None
    pbar_closure_error: float | None = None
    verdict: str | None = None
    refinement_slope: float | None = None
    pbar: np.ndarray | None = None
    curl_residual_fine: float | None = None


@dataclass(frozen=True)
class SweepPoint:
    c: float
    res_x3: float
    curl_residual: float


def _cell_stress_parts(u, domain, model):
    """Cell-centred pressure-free stress: in-plane block (s11, s12, s22),
    strains (g1, g2) and the shear components (tau1, tau2)."""
    g1, g2 = gradient_field(u, domain)
    s = 3.0 + g1 * g1 + g2 * g2
    w1, w2 = model.partials(s, s)
    w1 = w1 + np.zeros_like(g1)
    w2 = w2 + np.zeros_like(g1)
    s11 = 2.0 * w1 + 2.0 * w2 * (2.0 + g2 * g2)
    s12 = -2.0 * w2 * g1 * g2
    s22 = 2.0 * w1 + 2.0 * w2 * (2.0 + g1 * g1)
    k = 2.0 * (w1 + w2)
    return s11, s12, s22, g1, g2, k * g1, k * g2


def _cell_derivative(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Cell-centred derivative along one axis: central differences inside,
    second-order one-sided at the first and last cell rows (first-order when
    only two cells exist)."""
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    n = f.shape[0]
    if n >= 3:
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
        out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    elif n == 2:
        out[0] = out[1] = (f[1] - f[0]) / h
    else:
        out[0] = 0.0
    return np.moveaxis(out, 0, axis)


def in_plane_forcing(u, domain, model, c: float):
    """Cell-centred forcing (G1, G2) of the two in-plane equations.

    The equations read d(pbar)/dx_alpha = G_alpha, with G built from the
    pressure-free stress divergence plus the axial-pressure strain term:
    G_alpha = d_beta s_{alpha beta} + c g_alpha.
    """
    s11, s12, s22, g1, g2, _, _ = _cell_stress_parts(u, domain, model)
    h = domain.h
    G1 = _cell_derivative(s11, 1, h) + _cell_derivative(s12, 0, h) + c * g1
    G2 = _cell_derivative(s12, 1, h) + _cell_derivative(s22, 0, h) + c * g2
    return G1, G2


def scalar_curl_interior(G1: np.ndarray, G2: np.ndarray, h: float) -> np.ndarray:
    """d1 G2 - d2 G1 on interior nodes via compact 2x2 stencils.

    Equals the trapezoid circulation of (G1, G2) around each 2x2 cell patch
    divided by h^2, so it vanishes identically on discrete gradient fields.
    """
    return cell_dx_at_interior(G2, h) - cell_dy_at_interior(G1, h)


def reconstruct_potential(G1: np.ndarray, G2: np.ndarray, h: float) -> tuple[np.ndarray, float]:
    """Trapezoid path integration of a cell-centred gradient field.

    Row-major path: along the first cell row with G1, then down each column
    with G2; the closure error is the max mismatch against the transposed
    path (down the first column, then along rows).  Pinned to zero at the
    first cell.
    """
    p = np.zeros_like(G1)
    p[0, 1:] = np.cumsum(0.5 * h * (G1[0, :-1] + G1[0, 1:]))
    p[1:, :] = p[0, :] + np.cumsum(0.5 * h * (G2[:-1, :] + G2[1:, :]), axis=0)

    q = np.zeros_like(G1)
    q[1:, 0] = np.cumsum(0.5 * h * (G2[:-1, 0] + G2[1:, 0]))
    q[:, 1:] = q[:, [0]] + np.cumsum(0.5 * h * (G1[:, :-1] + G1[:, 1:]), axis=1)

    return p, float(np.max(np.abs(p - q)))


def full_residual(
    u: np.ndarray,
    domain: Domain,
    model: MaterialModel,
    ansatz: PressureAnsatz | None = None,
) -> EquilibriumReport:
    """Residual norms of all three equations of div sigma = 0 (norms only).

    In-plane divergences are taken with the compact cell-to-node stencils, so
    res_x3 is exactly the norm of (interior div tau - c).
    """
    ansatz = ansatz or PressureAnsatz()
    u = domain.require_field(u)
    s11, s12, s22, g1, g2, tau1, tau2 = _cell_stress_parts(u, domain, model)
    if ansatz.pbar is None:
        pbar = np.zeros_like(s11)
    else:
        pbar = np.asarray(ansatz.pbar, dtype=float)
        if pbar.shape != s11.shape:
            raise ValueError(f"pbar shape {pbar.shape} does not match cell grid {s11.shape}")
    c = float(ansatz.c)
    h = domain.h

    r1 = (
        cell_dx_at_interior(s11 - pbar, h)
        + cell_dy_at_interior(s12, h)
        + c * cell_mean_at_interior(g1)
    )
    r2 = (
        cell_dx_at_interior(s12, h)
        + cell_dy_at_interior(s22 - pbar, h)
        + c * cell_mean_at_interior(g2)
    )
    r3 = cell_dx_at_interior(tau1, h) + cell_dy_at_interior(tau2, h) - c

    area = domain.area
    return EquilibriumReport(
        res_x1=integral_l2(r1, area),
        res_x2=integral_l2(r2, area),
        res_x3=integral_l2(r3, area),
    )


def _forcing_scale(G1, G2) -> float:
    return max(float(np.max(np.abs(G1))), float(np.max(np.abs(G2))), 1.0)


def _classify(curl_coarse, tiny_coarse, curl_fine, tiny_fine):
    """Verdict from the two-grid curl residuals; None entries mean no study."""
    if curl_fine is None:
        if curl_coarse <= tiny_coarse:
            return "consistent", None
        return "inconclusive", None
    if curl_coarse <= tiny_coarse and curl_fine <= tiny_fine:
        return "consistent", None
    if curl_fine <= tiny_fine < curl_coarse:
        return "consistent", None  # vanished under refinement
    slope = float(np.log2(curl_coarse / curl_fine))
    if slope >= _SLOPE_CONSISTENT:
        return "consistent", slope
    if slope <= _SLOPE_INCOMPATIBLE and curl_fine > 10.0 * tiny_fine:
        return "incompatible", slope
    return "inconclusive", slope


def pressure_compatibility(
    u: np.ndarray,
    domain: Domain,
    model: MaterialModel,
    c: float = 0.0,
    fine: tuple[np.ndarray, Domain] | None = None,
) -> EquilibriumReport:
    """Decide whether some pbar(x1, x2) balances the two in-plane equations.

    Computes the curl residual of the in-plane forcing, reconstructs pbar by
    path integration, and reports the residual norms under the reconstructed
    ansatz.  ``fine`` is an equilibrium solution on the once-refined domain
    (see Domain.refined); with it the verdict follows the observed refinement
    slope, without it only a roundoff-level curl can certify consistency and
    "incompatible" is never returned.
    """
    u = domain.require_field(u)
    G1, G2 = in_plane_forcing(u, domain, model, c)
    curl = scalar_curl_interior(G1, G2, domain.h)
    curl_norm = integral_l2(curl, domain.area)
    tiny = _ROUNDOFF_FACTOR * _forcing_scale(G1, G2)

    pbar, closure = reconstruct_potential(G1, G2, domain.h)

    curl_fine_norm = None
    tiny_fine = None
    if fine is not None:
        u_fine, domain_fine = fine
        F1, F2 = in_plane_forcing(domain_fine.require_field(u_fine), domain_fine, model, c)
        curl_fine_norm = integral_l2(scalar_curl_interior(F1, F2, domain_fine.h), domain_fine.area)
        tiny_fine = _ROUNDOFF_FACTOR * _forcing_scale(F1, F2)

    verdict, slope = _classify(curl_norm, tiny, curl_fine_norm, tiny_fine)

    report = full_residual(u, domain, model, PressureAnsatz(c=c, pbar=pbar))
    report.curl_residual = curl_norm
    report.pbar_closure_error = closure
    report.verdict = verdict
    report.refinement_slope = slope
    report.pbar = pbar
    report.curl_residual_fine = curl_fine_norm
    return report


def c_sweep(
    u: np.ndarray,
    domain: Domain,
    model: MaterialModel,
    c_values,
) -> list[SweepPoint]:
    """res_x3 and the in-plane curl residual as functions of the axial
    pressure gradient c.  Exposes whether any c != 0 improves consistency."""
    u = domain.require_field(u)
    div = interior_divergence(u, domain, model)
    G1_0, G2_0 = in_plane_forcing(u, domain, model, 0.0)
    g1, g2 = gradient_field(u, domain)
    curl_0 = scalar_curl_interior(G1_0, G2_0, domain.h)
    curl_g = scalar_curl_interior(g1, g2, domain.h)

    area = domain.area
    points = []
    for c in c_values:
        c = float(c)
        res_x3 = integral_l2(div - c, area)
        curl = integral_l2(curl_0 + c * curl_g, area)
        points.append(SweepPoint(c=c, res_x3=res_x3, curl_residual=curl))
    return points
