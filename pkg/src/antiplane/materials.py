"""Strain-energy families for incompressible isotropic solids in anti-plane shear.

Each model is a function W(I1, I2) of the first two principal invariants of
B = F F^T, with exact first and second partial derivatives.  Anti-plane shear
confines the invariants to the locus I1 = I2 = 3 + gamma^2, so every model
also exposes the restricted response there:

    shear energy    What(gamma) = W(3 + gamma^2, 3 + gamma^2)
    shear stress    tau(gamma)  = 2 gamma (W1 + W2)
    tangent modulus d tau / d gamma = 2 (W1 + W2) + 4 gamma^2 (W11 + 2 W12 + W22)

Two classical diagnostics operate on the locus: a loss-of-ellipticity scan
(the shear response must be strictly monotone) and the Knowles constitutive
fit, which looks for a constant b with b W1 + (b - 1) W2 = 0.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, fields as _dc_fields
from typing import ClassVar

import numpy as np

__all__ = [
    "MaterialModel",
    "NeoHookean",
    "MooneyRivlin",
    "GeneralizedNeoHookean",
    "DoubleWellShear",
    "DegenerateModelError",
    "EllipticityReport",
    "KnowlesReport",
    "make_model",
    "model_families",
    "ellipticity_scan",
    "knowles_fit",
]

DEFAULT_GAMMA_MAX = 2.0
DEFAULT_SCAN_POINTS = 1001
DEFAULT_KNOWLES_TOL = 1e-10

_CROSSING_WIDTH = 1e-8  # bisection width for ellipticity boundaries


class DegenerateModelError(ValueError):
    """The model has no shear response anywhere on the scan grid."""


def _check_invariants(I1, I2):
    a1 = np.asarray(I1, dtype=float)
    a2 = np.asarray(I2, dtype=float)
    if np.any(a1 < 3.0) or np.any(a2 < 3.0):
        raise ValueError("invariants of B must satisfy I1 >= 3 and I2 >= 3")
    return a1, a2


def _check_gamma(gamma):
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0.0):
        raise ValueError("shear strain magnitude must be nonnegative")
    return g


def _descalar(value, *refs):
    if all(np.ndim(r) == 0 for r in refs):
        return float(value)
    return value


class MaterialModel(abc.ABC):
    """Incompressible isotropic strain-energy model W(I1, I2).

    Subclasses implement ``_energy``, ``_partials`` and ``_second_partials``
    as closed forms returning arrays shaped like the input invariants; the
    public methods validate the domain and accept scalars or arrays.
    """

    family: ClassVar[str]

    @abc.abstractmethod
    def _energy(self, I1, I2):
        ...

    @abc.abstractmethod
    def _partials(self, I1, I2):
        ...

    @abc.abstractmethod
    def _second_partials(self, I1, I2):
        ...

    # invariant-space interface

    def energy(self, I1, I2):
        """Stored energy W(I1, I2); vanishes at the identity state (3, 3)."""
        a1, a2 = _check_invariants(I1, I2)
        return _descalar(self._energy(a1, a2), I1, I2)

    def partials(self, I1, I2):
        """Exact partial derivatives (W1, W2) = (dW/dI1, dW/dI2)."""
        a1, a2 = _check_invariants(I1, I2)
        w1, w2 = self._partials(a1, a2)
        return _descalar(w1, I1, I2), _descalar(w2, I1, I2)

    def second_partials(self, I1, I2):
        """Exact second partials (W11, W12, W22)."""
        a1, a2 = _check_invariants(I1, I2)
        w11, w12, w22 = self._second_partials(a1, a2)
        return (
            _descalar(w11, I1, I2),
            _descalar(w12, I1, I2),
            _descalar(w22, I1, I2),
        )

    # response on the anti-plane locus I1 = I2 = 3 + gamma^2

    def shear_energy(self, gamma):
        """What(gamma) = W(3 + gamma^2, 3 + gamma^2)."""
        g = _check_gamma(gamma)
        s = 3.0 + g * g
        return _descalar(self._energy(s, s), gamma)

    def shear_stress(self, gamma):
        """tau(gamma) = 2 gamma (W1 + W2), the scalar shear response."""
        g = _check_gamma(gamma)
        s = 3.0 + g * g
        w1, w2 = self._partials(s, s)
        return _descalar(2.0 * g * (w1 + w2), gamma)

    def tangent_modulus(self, gamma):
        """d tau / d gamma, the slope of the shear response.

        At gamma = 0 this is the one-sided limit 2 (W1 + W2).
        """
        g = _check_gamma(gamma)
        s = 3.0 + g * g
        w1, w2 = self._partials(s, s)
        w11, w12, w22 = self._second_partials(s, s)
        m = 2.0 * (w1 + w2) + 4.0 * g * g * (w11 + 2.0 * w12 + w22)
        return _descalar(m, gamma)

    def parameters(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in _dc_fields(self)}

    def depends_on_i2(self) -> bool:
        """Whether W carries any I2 dependence (W2 not identically zero)."""
        probe = np.array([3.0, 3.7, 5.2, 9.0])
        _, w2 = self._partials(probe, probe)
        return bool(np.any(np.asarray(w2) != 0.0))


@dataclass(frozen=True)
class NeoHookean(MaterialModel):
    """W = (mu/2) (I1 - 3)."""

    mu: float
    family: ClassVar[str] = "neo_hookean"

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError("neo_hookean requires mu > 0")

    def _energy(self, I1, I2):
        return 0.5 * self.mu * (I1 - 3.0)

    def _partials(self, I1, I2):
        return np.full_like(I1, 0.5 * self.mu), np.zeros_like(I1)

    def _second_partials(self, I1, I2):
        z = np.zeros_like(I1)
        return z, z, z


@dataclass(frozen=True)
class MooneyRivlin(MaterialModel):
    """W = c1 (I1 - 3) + c2 (I2 - 3)."""

    c1: float
    c2: float
    family: ClassVar[str] = "mooney_rivlin"

    def __post_init__(self):
        ok = (
            np.isfinite(self.c1)
            and np.isfinite(self.c2)
            and self.c1 >= 0.0
            and self.c2 >= 0.0
            and self.c1 + self.c2 > 0.0
        )
        if not ok:
            raise ValueError("mooney_rivlin requires c1 >= 0, c2 >= 0, c1 + c2 > 0")

    def _energy(self, I1, I2):
        return self.c1 * (I1 - 3.0) + self.c2 * (I2 - 3.0)

    def _partials(self, I1, I2):
        return np.full_like(I1, self.c1), np.full_like(I1, self.c2)

    def _second_partials(self, I1, I2):
        z = np.zeros_like(I1)
        return z, z, z


@dataclass(frozen=True)
class GeneralizedNeoHookean(MaterialModel):
    """W = (mu / 2n) [(1 + (I1 - 3))^n - 1], a power-law function of I1 only."""

    mu: float
    n: float
    family: ClassVar[str] = "generalized_neo_hookean"

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError("generalized_neo_hookean requires mu > 0")
        if not (np.isfinite(self.n) and self.n > 0.0):
            raise ValueError("generalized_neo_hookean requires hardening exponent n > 0")

    def _energy(self, I1, I2):
        base = I1 - 2.0  # 1 + (I1 - 3), >= 1 on the admissible domain
        return self.mu / (2.0 * self.n) * (base**self.n - 1.0)

    def _partials(self, I1, I2):
        base = I1 - 2.0
        return 0.5 * self.mu * base ** (self.n - 1.0), np.zeros_like(I1)

    def _second_partials(self, I1, I2):
        base = I1 - 2.0
        w11 = 0.5 * self.mu * (self.n - 1.0) * base ** (self.n - 2.0)
        z = np.zeros_like(I1)
        return w11, z, z


@dataclass(frozen=True)
class DoubleWellShear(MaterialModel):
    """W = (a/4) ((I1 - 3) - gstar^2)^2, nonconvex with wells at gamma = gstar.

    The shear response a gamma (gamma^2 - gstar^2) is nonmonotone: ellipticity
    fails on [0, gstar / sqrt(3)).
    """

    a: float
    gstar: float
    family: ClassVar[str] = "double_well_shear"

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0.0):
            raise ValueError("double_well_shear requires a > 0")
        if not (np.isfinite(self.gstar) and self.gstar > 0.0):
            raise ValueError("double_well_shear requires gstar > 0")

    def _energy(self, I1, I2):
        d = (I1 - 3.0) - self.gstar**2
        return 0.25 * self.a * d * d

    def _partials(self, I1, I2):
        d = (I1 - 3.0) - self.gstar**2
        return 0.5 * self.a * d, np.zeros_like(I1)

    def _second_partials(self, I1, I2):
        z = np.zeros_like(I1)
        return np.full_like(I1, 0.5 * self.a), z, z


_FAMILIES: dict[str, type[MaterialModel]] = {
    cls.family: cls
    for cls in (NeoHookean, MooneyRivlin, GeneralizedNeoHookean, DoubleWellShear)
}


def model_families() -> tuple[str, ...]:
    return tuple(_FAMILIES)


def make_model(family: str, params: dict[str, float]) -> MaterialModel:
    """Construct a model from a family name and a parameter map.

    Rejects unknown families and unknown or missing parameter names.
    """
    try:
        cls = _FAMILIES[family]
    except KeyError:
        known = ", ".join(sorted(_FAMILIES))
        raise ValueError(f"unknown material family {family!r}; known: {known}") from None
    expected = {f.name for f in _dc_fields(cls)}
    given = set(params)
    if given != expected:
        raise ValueError(
            f"family {family!r} takes parameters {sorted(expected)}, got {sorted(given)}"
        )
    return cls(**{k: float(v) for k, v in params.items()})


@dataclass(frozen=True)
class EllipticityReport:
    """Result of a tangent-modulus scan over a uniform gamma grid."""

    gamma_grid: np.ndarray
    modulus: np.ndarray
    elliptic_everywhere: bool
    failure_intervals: list[tuple[float, float]]


@dataclass(frozen=True)
class KnowlesReport:
    """Least-squares fit of the constant b in b W1 + (b - 1) W2 = 0."""

    b_fit: float
    residual_sup: float
    b_pointwise: np.ndarray  # NaN where W1 + W2 = 0
    gamma_grid: np.ndarray
    constraint_satisfied: bool


def _refine_crossing(model: MaterialModel, lo: float, hi: float) -> float:
    """Bisect a sign change of the tangent modulus down to a narrow bracket."""
    lo_failing = model.tangent_modulus(lo) <= 0.0
    while hi - lo > _CROSSING_WIDTH:
        mid = 0.5 * (lo + hi)
        if (model.tangent_modulus(mid) <= 0.0) == lo_failing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ellipticity_scan(
    model: MaterialModel,
    gamma_max: float = DEFAULT_GAMMA_MAX,
    n_points: int = DEFAULT_SCAN_POINTS,
) -> EllipticityReport:
    """Scan d tau / d gamma on [0, gamma_max] and bracket where it is <= 0.

    Interval endpoints interior to the grid are refined by bisection; an
    interval may open at 0 or close at gamma_max.
    """
    if not gamma_max > 0.0:
        raise ValueError("gamma_max must be positive")
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    grid = np.linspace(0.0, gamma_max, n_points)
    modulus = np.asarray(model.tangent_modulus(grid))
    failing = modulus <= 0.0

    intervals: list[tuple[float, float]] = []
    i = 0
    n = n_points
    while i < n:
        if not failing[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and failing[j + 1]:
            j += 1
        lo = 0.0 if i == 0 else _refine_crossing(model, grid[i - 1], grid[i])
        hi = gamma_max if j == n - 1 else _refine_crossing(model, grid[j], grid[j + 1])
        intervals.append((lo, hi))
        i = j + 1

    return EllipticityReport(
        gamma_grid=grid,
        modulus=modulus,
        elliptic_everywhere=not intervals,
        failure_intervals=intervals,
    )


def knowles_fit(
    model: MaterialModel,
    gamma_max: float = DEFAULT_GAMMA_MAX,
    n_points: int = DEFAULT_SCAN_POINTS,
    tol: float = DEFAULT_KNOWLES_TOL,
) -> KnowlesReport:
    """Fit the constant b minimizing sum (b W1 + (b - 1) W2)^2 over the grid.

    Grid points with W1 + W2 = 0 have no pointwise b (stored as NaN) but
    still enter the residual.  A model whose response vanishes on the whole
    grid has no meaningful fit and raises DegenerateModelError.
    """
    if not gamma_max > 0.0:
        raise ValueError("gamma_max must be positive")
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    grid = np.linspace(0.0, gamma_max, n_points)
    s = 3.0 + grid * grid
    w1, w2 = model._partials(s, s)
    total = w1 + w2

    denom = float(np.dot(total, total))
    if denom == 0.0:
        raise DegenerateModelError(
            f"{model.family} response vanishes on the whole scan grid"
        )
    # least squares: residual b (W1 + W2) - W2, so b = <W2, W1 + W2> / <W1+W2, W1+W2>
    b = float(np.dot(w2, total)) / denom

    residual = np.abs(b * w1 + (b - 1.0) * w2)
    residual_sup = float(residual.max())

    defined = total != 0.0
    b_pointwise = np.full_like(grid, np.nan)
    b_pointwise[defined] = w2[defined] / total[defined]

    return KnowlesReport(
        b_fit=b,
        residual_sup=residual_sup,
        b_pointwise=b_pointwise,
        gamma_grid=grid,
        constraint_satisfied=residual_sup <= tol,
    )
