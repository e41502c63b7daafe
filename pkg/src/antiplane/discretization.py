"""Rectangular-grid discretization of the anti-plane energy functional.

Nodes are indexed ``u[i, j]`` with coordinates x1 = j*h, x2 = i*h; fields are
plain (ny, nx) float arrays in that layout.  Strains are evaluated at cell
centres from the bilinear interpolant (equivalently, 2x2 elements with
one-point quadrature), which makes the assembled nodal gradient the exact
derivative of the discrete energy; the solver's line search depends on that
compatibility.

The compact 2x2 stencils that take cell fields to interior nodes are shared
with the equilibrium checks: the divergence they produce at an interior node
equals minus the energy gradient there divided by h^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple

import numpy as np

from .materials import MaterialModel

__all__ = [
    "EdgeCondition",
    "Domain",
    "CellGradient",
    "initial_field",
    "field_from_function",
    "gradient_field",
    "total_potential",
    "potential_gradient",
    "el_residual",
    "interior_divergence",
    "shear_stress_cells",
    "cell_dx_at_interior",
    "cell_dy_at_interior",
    "cell_mean_at_interior",
    "cells_to_nodes_mean",
    "integral_l2",
    "write_field_csv",
    "read_field_csv",
]

EDGE_NAMES = ("left", "right", "bottom", "top")

_EDGE_NORMALS = {
    "left": (-1.0, 0.0),
    "right": (1.0, 0.0),
    "bottom": (0.0, -1.0),
    "top": (0.0, 1.0),
}


@dataclass(frozen=True)
class EdgeCondition:
    """Boundary condition on one edge: prescribed value or shear traction.

    ``value`` is a constant or a callable of node coordinates (x1, x2).
    """

    kind: str
    value: float | Callable = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "traction"):
            raise ValueError(f"edge kind must be 'dirichlet' or 'traction', got {self.kind!r}")

    def evaluate(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        if callable(self.value):
            v = self.value(x1, x2)
        else:
            v = self.value
        return np.broadcast_to(np.asarray(v, dtype=float), x1.shape).copy()

    def scaled(self, factor: float) -> "EdgeCondition":
        base = self.value
        if callable(base):
            return EdgeCondition(self.kind, lambda x1, x2, _f=base: factor * _f(x1, x2))
        return EdgeCondition(self.kind, factor * float(base))


class Domain:
    """Uniform rectangular node grid with per-edge boundary conditions.

    Every boundary node carries exactly one condition kind; a corner shared
    by a Dirichlet edge and a traction edge is Dirichlet.  At least one
    Dirichlet node is required (it removes the constant-shift nullspace).
    Traction nodes carry trapezoidal boundary weights: h on the edge, h/2 at
    the four geometric corners.
    """

    def __init__(self, nx: int, ny: int, h: float, edges: Mapping[str, EdgeCondition]):
        if not (isinstance(nx, (int, np.integer)) and isinstance(ny, (int, np.integer))):
            raise ValueError("node counts nx, ny must be integers")
        if nx < 3 or ny < 3:
            raise ValueError("node counts nx, ny must be at least 3")
        if not (np.isfinite(h) and h > 0.0):
            raise ValueError("grid spacing h must be positive")
        missing = set(EDGE_NAMES) - set(edges)
        extra = set(edges) - set(EDGE_NAMES)
        if missing or extra:
            raise ValueError(
                f"edges must specify exactly {EDGE_NAMES}; missing {sorted(missing)}, extra {sorted(extra)}"
            )

        self.nx = int(nx)
        self.ny = int(ny)
        self.h = float(h)
        self.edges = {name: edges[name] for name in EDGE_NAMES}

        x = np.arange(self.nx) * self.h
        y = np.arange(self.ny) * self.h
        self._x1, self._x2 = np.meshgrid(x, y)

        shape = (self.ny, self.nx)
        self.dirichlet_mask = np.zeros(shape, dtype=bool)
        self.dirichlet_values = np.zeros(shape)
        self.traction_mask = np.zeros(shape, dtype=bool)
        self.traction_values = np.zeros(shape)
        self.normals = np.zeros(shape + (2,))

        index = {
            "left": (slice(None), 0),
            "right": (slice(None), self.nx - 1),
            "bottom": (0, slice(None)),
            "top": (self.ny - 1, slice(None)),
        }
        # traction edges first, Dirichlet edges override at shared corners
        for pass_kind in ("traction", "dirichlet"):
            for name in EDGE_NAMES:
                cond = self.edges[name]
                if cond.kind != pass_kind:
                    continue
                sl = index[name]
                vals = cond.evaluate(self._x1[sl], self._x2[sl])
                if pass_kind == "traction":
                    self.traction_mask[sl] = True
                    self.traction_values[sl] = vals
                else:
                    self.dirichlet_mask[sl] = True
                    self.dirichlet_values[sl] = vals
                    self.traction_mask[sl] = False
                self.normals[sl] = _EDGE_NORMALS[name]

        corners = ((0, 0), (0, self.nx - 1), (self.ny - 1, 0), (self.ny - 1, self.nx - 1))
        inv_sqrt2 = 1.0 / np.sqrt(2.0)
        for i, j in corners:
            n1 = -inv_sqrt2 if j == 0 else inv_sqrt2
            n2 = -inv_sqrt2 if i == 0 else inv_sqrt2
            self.normals[i, j] = (n1, n2)

        if not self.dirichlet_mask.any():
            raise ValueError("at least one edge must be Dirichlet")

        self.traction_weights = np.zeros(shape)
        self.traction_weights[self.traction_mask] = self.h
        for i, j in corners:
            if self.traction_mask[i, j]:
                self.traction_weights[i, j] = 0.5 * self.h

    # geometry

    @property
    def lx(self) -> float:
        return (self.nx - 1) * self.h

    @property
    def ly(self) -> float:
        return (self.ny - 1) * self.h

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @property
    def free_mask(self) -> np.ndarray:
        return ~self.dirichlet_mask

    def node_coords(self) -> tuple[np.ndarray, np.ndarray]:
        return self._x1, self._x2

    def cell_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centre coordinates, shape (ny - 1, nx - 1)."""
        x = (np.arange(self.nx - 1) + 0.5) * self.h
        y = (np.arange(self.ny - 1) + 0.5) * self.h
        return np.meshgrid(x, y)

    def dirichlet_range(self) -> float:
        vals = self.dirichlet_values[self.dirichlet_mask]
        return float(vals.max() - vals.min())

    # field plumbing

    def require_field(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.ny, self.nx):
            raise ValueError(f"field shape {u.shape} does not match grid ({self.ny}, {self.nx})")
        return u

    def apply_dirichlet(self, u: np.ndarray) -> np.ndarray:
        out = self.require_field(u).copy()
        out[self.dirichlet_mask] = self.dirichlet_values[self.dirichlet_mask]
        return out

    # derived domains

    def refined(self) -> "Domain":
        """Same rectangle with spacing halved: (2 nx - 1, 2 ny - 1) nodes."""
        return Domain(2 * self.nx - 1, 2 * self.ny - 1, 0.5 * self.h, self.edges)

    def with_traction_scaled(self, factor: float) -> "Domain":
        edges = {
            name: cond.scaled(factor) if cond.kind == "traction" else cond
            for name, cond in self.edges.items()
        }
        return Domain(self.nx, self.ny, self.h, edges)


def initial_field(domain: Domain) -> np.ndarray:
    """Zero field with the Dirichlet data applied."""
    return domain.apply_dirichlet(np.zeros((domain.ny, domain.nx)))


def field_from_function(domain: Domain, fn: Callable) -> np.ndarray:
    x1, x2 = domain.node_coords()
    return np.asarray(fn(x1, x2), dtype=float) + np.zeros_like(x1)


class CellGradient(NamedTuple):
    """Cell-centred strain components, each shaped (ny - 1, nx - 1)."""

    g1: np.ndarray
    g2: np.ndarray

    @property
    def magnitude_squared(self) -> np.ndarray:
        return self.g1 * self.g1 + self.g2 * self.g2


def gradient_field(u: np.ndarray, domain: Domain) -> CellGradient:
    """Cell-centred gradient of the bilinear interpolant of u.

    Exact for linear fields everywhere and for bilinear fields at centres.
    """
    u = domain.require_field(u)
    two_h = 2.0 * domain.h
    g1 = (u[1:, 1:] + u[:-1, 1:] - u[1:, :-1] - u[:-1, :-1]) / two_h
    g2 = (u[1:, 1:] + u[1:, :-1] - u[:-1, 1:] - u[:-1, :-1]) / two_h
    return CellGradient(g1, g2)


def shear_stress_cells(u: np.ndarray, domain: Domain, model: MaterialModel) -> CellGradient:
    """Cell-centred shear stress components tau_alpha = 2 (W1 + W2) g_alpha."""
    g1, g2 = gradient_field(u, domain)
    s = 3.0 + g1 * g1 + g2 * g2
    w1, w2 = model.partials(s, s)
    k = 2.0 * (w1 + w2)
    return CellGradient(k * g1, k * g2)


def total_potential(u: np.ndarray, domain: Domain, model: MaterialModel) -> float:
    """Stored energy minus traction work:

        Pi(u) = sum_cells What(|grad u|) h^2 - sum_traction_nodes t u w.
    """
    u = domain.require_field(u)
    grad = gradient_field(u, domain)
    s = 3.0 + grad.magnitude_squared
    stored = float(np.sum(model.energy(s, s))) * domain.h**2
    tm = domain.traction_mask
    load = float(np.sum(domain.traction_weights[tm] * domain.traction_values[tm] * u[tm]))
    return stored - load


def potential_gradient(u: np.ndarray, domain: Domain, model: MaterialModel) -> np.ndarray:
    """Exact nodal gradient of the discrete potential; zero at Dirichlet nodes."""
    u = domain.require_field(u)
    tau1, tau2 = shear_stress_cells(u, domain, model)
    c = 0.5 * domain.h  # h^2 / (2h)
    out = np.zeros_like(u)
    out[:-1, :-1] += c * (-tau1 - tau2)  # cell SW corner
    out[:-1, 1:] += c * (tau1 - tau2)  # SE
    out[1:, :-1] += c * (-tau1 + tau2)  # NW
    out[1:, 1:] += c * (tau1 + tau2)  # NE
    tm = domain.traction_mask
    out[tm] -= domain.traction_weights[tm] * domain.traction_values[tm]
    out[domain.dirichlet_mask] = 0.0
    return out


# compact 2x2 stencils: cell fields -> interior nodes, shape (ny-2, nx-2)


def cell_dx_at_interior(f: np.ndarray, h: float) -> np.ndarray:
    """x1-derivative of a cell field at interior nodes (transverse average)."""
    return (f[:-1, 1:] + f[1:, 1:] - f[:-1, :-1] - f[1:, :-1]) / (2.0 * h)


def cell_dy_at_interior(f: np.ndarray, h: float) -> np.ndarray:
    """x2-derivative of a cell field at interior nodes (transverse average)."""
    return (f[1:, :-1] + f[1:, 1:] - f[:-1, :-1] - f[:-1, 1:]) / (2.0 * h)


def cell_mean_at_interior(f: np.ndarray) -> np.ndarray:
    """2x2 average of a cell field at interior nodes."""
    return 0.25 * (f[:-1, :-1] + f[:-1, 1:] + f[1:, :-1] + f[1:, 1:])


def cells_to_nodes_mean(f: np.ndarray) -> np.ndarray:
    """Average adjacent cells onto every node (4, 2 or 1 cells per node)."""
    ny, nx = f.shape[0] + 1, f.shape[1] + 1
    acc = np.zeros((ny, nx))
    cnt = np.zeros((ny, nx))
    for sl in ((slice(None, -1), slice(None, -1)), (slice(None, -1), slice(1, None)),
               (slice(1, None), slice(None, -1)), (slice(1, None), slice(1, None))):
        acc[sl] += f
        cnt[sl] += 1.0
    return acc / cnt


def integral_l2(values: np.ndarray, measure: float) -> float:
    """RMS of a sampled field scaled to a quadrature over a region of the
    given measure: sqrt(measure * mean(values^2)).  Constant fields map to
    |const| * sqrt(measure) exactly."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.sqrt(measure * np.mean(v * v)))


def interior_divergence(u: np.ndarray, domain: Domain, model: MaterialModel) -> np.ndarray:
    """div tau at interior nodes from the cell-centred stress.

    Equals minus potential_gradient / h^2 at interior nodes (identical
    stencil); exact for quadratic u with constant-modulus models.
    """
    tau1, tau2 = shear_stress_cells(u, domain, model)
    return cell_dx_at_interior(tau1, domain.h) + cell_dy_at_interior(tau2, domain.h)


def el_residual(u: np.ndarray, domain: Domain, model: MaterialModel) -> tuple[float, float]:
    """Strong-form residual norms (interior, traction boundary).

    interior: L2 norm of div tau at interior nodes; traction: L2 norm of
    n . tau - t at traction nodes, weighted by the boundary quadrature.
    """
    u = domain.require_field(u)
    div = interior_divergence(u, domain, model)
    interior_norm = integral_l2(div, domain.area)

    tau1, tau2 = shear_stress_cells(u, domain, model)
    t1n = cells_to_nodes_mean(tau1)
    t2n = cells_to_nodes_mean(tau2)
    tm = domain.traction_mask
    flux = (
        domain.normals[..., 0][tm] * t1n[tm]
        + domain.normals[..., 1][tm] * t2n[tm]
        - domain.traction_values[tm]
    )
    traction_norm = float(np.sqrt(np.sum(domain.traction_weights[tm] * flux * flux)))
    return interior_norm, traction_norm


# field serialization: header names, header values, then one line per grid row


def write_field_csv(path, u: np.ndarray, domain: Domain) -> None:
    u = domain.require_field(u)
    lines = ["nx,ny,h", f"{domain.nx},{domain.ny},{domain.h:.17g}"]
    for row in u:
        lines.append(",".join(f"{v:.17g}" for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


class FieldFile(NamedTuple):
    u: np.ndarray
    nx: int
    ny: int
    h: float


def read_field_csv(path) -> FieldFile:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2 or lines[0] != "nx,ny,h":
        raise ValueError(f"{path}: not a field file (missing 'nx,ny,h' header)")
    nx_s, ny_s, h_s = lines[1].split(",")
    nx, ny, h = int(nx_s), int(ny_s), float(h_s)
    if len(lines) != 2 + ny:
        raise ValueError(f"{path}: expected {ny} data rows, found {len(lines) - 2}")
    u = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    if u.shape != (ny, nx):
        raise ValueError(f"{path}: data shape {u.shape} does not match header ({ny}, {nx})")
    return FieldFile(u=u, nx=nx, ny=ny, h=h)
