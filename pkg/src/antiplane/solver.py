"""Energy minimization for the discrete anti-plane potential.

Nonlinear conjugate gradients (Polak-Ribiere with nonnegativity clipping and
restart on non-descent directions) under Armijo backtracking.  The double-well
family has indefinite Hessians away from its wells, so Newton is used only as
a polish after convergence: up to five steps with the assembled sparse
Hessian, kept only when they reduce the gradient norm.

Nonconvex energies admit several local minimizers; seeded randomized restarts
enumerate candidates and the lowest-energy result wins, ties resolved toward
the lowest restart index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import (
    Domain,
    gradient_field,
    initial_field,
    integral_l2,
    interior_divergence,
    potential_gradient,
    total_potential,
)
from .materials import MaterialModel

__all__ = [
    "SolveConfig",
    "SolveReport",
    "DivergenceError",
    "PathStep",
    "minimize",
    "solve_path",
    "assemble_hessian",
    "el_consistency",
]

_HISTORY_CAP = 4096
_POLISH_STEPS = 5
_TIE_TOL = 1e-12
_MIN_STEP = 1e-20


class DivergenceError(RuntimeError):
    """Non-finite energy or gradient; carries the last finite iterate."""

    def __init__(self, message: str, last_field: np.ndarray, scale: float | None = None):
        super().__init__(message)
        self.last_field = last_field
        self.scale = scale


@dataclass(frozen=True)
class SolveConfig:
    grad_tol: float = 1e-8
    max_iters: int = 20000
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    restarts: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtrack must lie in (0, 1)")
        if not self.grad_tol > 0.0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    final_energy: float
    final_grad_norm: float
    restart_index: int
    energy_history: list[float] = field(default_factory=list)
    restart_energies: list[float] = field(default_factory=list)
    # grid constant: el_residual interior norm <= el_norm_factor * final_grad_norm
    el_norm_factor: float = 0.0


class PathStep(NamedTuple):
    scale: float
    u: np.ndarray
    report: SolveReport


def _el_norm_factor(domain: Domain) -> float:
    n_int = (domain.nx - 2) * (domain.ny - 2)
    if n_int == 0:
        return 0.0
    return float(np.sqrt(domain.area / n_int) / domain.h**2)


def assemble_hessian(u: np.ndarray, domain: Domain, model: MaterialModel) -> sp.csr_matrix:
    """Sparse Hessian of the discrete potential over all nodes.

    Per cell the strain map has constant coefficients, so the block is
    (s_a s_b weighted by the 2x2 tangent of tau at the cell strain) / 4,
    independent of h.
    """
    g1, g2 = gradient_field(u, domain)
    gsq = g1 * g1 + g2 * g2
    s = 3.0 + gsq
    w1, w2 = model.partials(s, s)
    w11, w12, w22 = model.second_partials(s, s)
    k = 2.0 * (w1 + w2) + np.zeros_like(g1)
    kp = 2.0 * (w11 + 2.0 * w12 + w22) + np.zeros_like(g1)

    m11 = k + 2.0 * kp * g1 * g1
    m12 = 2.0 * kp * g1 * g2
    m22 = k + 2.0 * kp * g2 * g2

    ny, nx = domain.ny, domain.nx
    ii, jj = np.meshgrid(np.arange(ny - 1), np.arange(nx - 1), indexing="ij")
    sw = (ii * nx + jj).ravel()
    corners = np.stack([sw, sw + 1, sw + nx, sw + nx + 1], axis=1)  # SW SE NW NE

    s1 = np.array([-1.0, 1.0, -1.0, 1.0])
    s2 = np.array([-1.0, -1.0, 1.0, 1.0])

    m11 = m11.ravel()
    m12 = m12.ravel()
    m22 = m22.ravel()
    ncell = m11.size
    rows = np.empty(ncell * 16, dtype=np.int64)
    cols = np.empty(ncell * 16, dtype=np.int64)
    data = np.empty(ncell * 16)
    pos = 0
    for a in range(4):
        for b in range(4):
            coeff = 0.25 * (
                m11 * s1[a] * s1[b]
                + m12 * (s1[a] * s2[b] + s2[a] * s1[b])
                + m22 * s2[a] * s2[b]
            )
            rows[pos : pos + ncell] = corners[:, a]
            cols[pos : pos + ncell] = corners[:, b]
            data[pos : pos + ncell] = coeff
            pos += ncell
    n = ny * nx
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def _line_search(u, free, direction, energy, slope, domain, model, cfg, alpha0):
    """Backtracking Armijo search along a descent direction.

    Returns (alpha, trial field, trial energy) or None when no step down to
    the minimum length passes the sufficient-decrease test.
    """
    alpha = alpha0
    while alpha > _MIN_STEP:
        trial = u.copy()
        trial[free] += alpha * direction
        e_trial = total_potential(trial, domain, model)
        if np.isfinite(e_trial) and e_trial <= energy + cfg.armijo_c * alpha * slope:
            return alpha, trial, e_trial
        alpha *= cfg.backtrack
    return None


def _newton_polish(u, domain, model, cfg):
    """Up to five Newton steps; returns (field, grad_norm) of the best iterate."""
    free = domain.free_mask
    free_idx = np.flatnonzero(free.ravel())
    best_u = u
    best_norm = float(np.linalg.norm(potential_gradient(u, domain, model)[free]))
    cur = u
    for _ in range(_POLISH_STEPS):
        g = potential_gradient(cur, domain, model)[free]
        gnorm = float(np.linalg.norm(g))
        if gnorm < best_norm:
            best_u, best_norm = cur, gnorm
        if gnorm == 0.0:
            break
        H = assemble_hessian(cur, domain, model)
        Hff = H[free_idx, :][:, free_idx]
        try:
            step = spla.spsolve(Hff.tocsc(), -g)
        except RuntimeError:
            break
        if not np.all(np.isfinite(step)):
            break
        slope = float(np.dot(step, g))
        if slope >= 0.0:
            break
        energy = total_potential(cur, domain, model)
        accepted = None
        alpha = 1.0
        while alpha > 1e-10:
            trial = cur.copy()
            trial[free] += alpha * step
            tnorm = float(np.linalg.norm(potential_gradient(trial, domain, model)[free]))
            e_trial = total_potential(trial, domain, model)
            armijo_ok = np.isfinite(e_trial) and e_trial <= energy + cfg.armijo_c * alpha * slope
            if tnorm < gnorm or armijo_ok:
                accepted = trial
                break
            alpha *= cfg.backtrack
        if accepted is None:
            break
        cur = accepted
    g = potential_gradient(cur, domain, model)[free]
    gnorm = float(np.linalg.norm(g))
    if gnorm < best_norm:
        best_u, best_norm = cur, gnorm
    return best_u, best_norm


def _ncg(u0, domain, model, cfg):
    """One conjugate-gradient run from u0.  Returns (field, stats dict)."""
    free = domain.free_mask
    u = domain.apply_dirichlet(u0)
    energy = total_potential(u, domain, model)
    if not np.isfinite(energy):
        raise DivergenceError("non-finite energy at the initial iterate", u)

    g = potential_gradient(u, domain, model)[free]
    if not np.all(np.isfinite(g)):
        raise DivergenceError("non-finite gradient at the initial iterate", u)
    gnorm = float(np.linalg.norm(g))

    history = [energy]
    direction = -g
    alpha_prev = 1.0
    iterations = 0
    converged = gnorm <= cfg.grad_tol

    while not converged and iterations < cfg.max_iters:
        slope = float(np.dot(g, direction))
        if slope >= 0.0:
            direction = -g
            slope = -gnorm * gnorm
        result = _line_search(
            u, free, direction, energy, slope, domain, model, cfg,
            alpha0=min(1.0, alpha_prev / cfg.backtrack),
        )
        if result is None:
            break  # step length underflow: stuck at numerical resolution
        alpha, u, energy = result
        alpha_prev = alpha
        iterations += 1
        if len(history) < _HISTORY_CAP:
            history.append(energy)

        g_new = potential_gradient(u, domain, model)[free]
        if not np.all(np.isfinite(g_new)):
            raise DivergenceError("non-finite gradient encountered", u)
        beta = max(0.0, float(np.dot(g_new, g_new - g)) / max(gnorm * gnorm, 1e-300))
        direction = -g_new + beta * direction
        g = g_new
        gnorm = float(np.linalg.norm(g))
        converged = gnorm <= cfg.grad_tol

    if converged:
        u, gnorm = _newton_polish(u, domain, model, cfg)
        energy = total_potential(u, domain, model)

    return u, {
        "converged": converged,
        "iterations": iterations,
        "final_energy": float(energy),
        "final_grad_norm": gnorm,
        "energy_history": history,
    }


def minimize(
    u0: np.ndarray,
    domain: Domain,
    model: MaterialModel,
    cfg: SolveConfig | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Minimize the discrete potential over fields with the given Dirichlet data.

    Restart 0 starts from u0; further restarts perturb u0 by seeded uniform
    noise of amplitude 0.1 * max(1, Dirichlet range) on the free nodes.  The
    lowest-energy result is returned (ties go to the lowest restart index).
    """
    cfg = cfg or SolveConfig()
    u0 = domain.apply_dirichlet(u0)
    amplitude = 0.1 * max(1.0, domain.dirichlet_range())
    free = domain.free_mask

    best = None
    restart_energies: list[float] = []
    for k in range(cfg.restarts):
        start = u0
        if k > 0:
            rng = np.random.default_rng([cfg.seed, k])
            start = u0.copy()
            start[free] += rng.uniform(-amplitude, amplitude, size=int(free.sum()))
        u, stats = _ncg(start, domain, model, cfg)
        restart_energies.append(stats["final_energy"])
        if best is None or stats["final_energy"] < best[1]["final_energy"] - _TIE_TOL:
            best = (u, stats, k)

    u, stats, k = best
    report = SolveReport(
        converged=stats["converged"],
        iterations=stats["iterations"],
        final_energy=stats["final_energy"],
        final_grad_norm=stats["final_grad_norm"],
        restart_index=k,
        energy_history=stats["energy_history"],
        restart_energies=restart_energies,
        el_norm_factor=_el_norm_factor(domain),
    )
    return u, report


def solve_path(
    domain: Domain,
    model: MaterialModel,
    t_scales,
    cfg: SolveConfig | None = None,
    u0: np.ndarray | None = None,
) -> list[PathStep]:
    """Continuation over traction scales, warm-starting each solve.

    Divergence at any scale is re-raised with the failing scale attached.
    """
    cfg = cfg or SolveConfig()
    scales = [float(s) for s in t_scales]
    if not all(np.isfinite(scales)):
        raise ValueError("traction scales must be finite")
    current = initial_field(domain) if u0 is None else domain.apply_dirichlet(u0)
    steps: list[PathStep] = []
    for s in scales:
        d_s = domain.with_traction_scaled(s)
        try:
            u, report = minimize(current, d_s, model, cfg)
        except DivergenceError as err:
            raise DivergenceError(str(err), err.last_field, scale=s) from err
        steps.append(PathStep(scale=s, u=u, report=report))
        current = u
    return steps


def el_consistency(u: np.ndarray, domain: Domain, model: MaterialModel) -> tuple[float, float]:
    """(interior residual norm, gradient norm) for a field; the first is
    bounded by el_norm_factor times the second at any iterate."""
    div = interior_divergence(u, domain, model)
    interior = integral_l2(div, domain.area)
    g = potential_gradient(u, domain, model)[domain.free_mask]
    return interior, float(np.linalg.norm(g))
