"""Anti-plane shear kinematics and the full first Piola-Kirchhoff stress.

The motion keeps x1 and x2 fixed and shifts x3 by u(x1, x2).  Its gradient is
the identity plus the shear strains (u,1, u,2) in the bottom row, so det F = 1
holds identically: anti-plane motions of any solid satisfy the incompressibility
constraint for free, and the invariants collapse to I1 = I2 = 3 + gamma^2,
I3 = 1.

The stress is assembled from closed forms specialized to that structure
(B, B F and F^{-T} are written out rather than formed by dense products); a
generic dense assembly lives in the test suite as an independent oracle.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .materials import MaterialModel

__all__ = ["ShearStrain", "deformation_gradient", "invariants", "piola_stress"]


class ShearStrain(NamedTuple):
    """In-plane gradient (u,1, u,2) of the axial displacement."""

    g1: float
    g2: float

    @property
    def gamma(self) -> float:
        return math.hypot(self.g1, self.g2)


def deformation_gradient(strain) -> np.ndarray:
    """3x3 gradient of the anti-plane motion: identity rows plus shear row.

    det F = 1 for every strain.
    """
    g1, g2 = strain
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [float(g1), float(g2), 1.0],
        ]
    )


def invariants(F: np.ndarray) -> tuple[float, float, float]:
    """Principal invariants (I1, I2, I3) of B = F F^T.

    I2 uses the trace identity I2 = (tr(B)^2 - tr(B^2)) / 2.  For an
    anti-plane F this returns (3 + gamma^2, 3 + gamma^2, 1) up to roundoff.
    """
    F = np.asarray(F, dtype=float)
    B = F @ F.T
    tr = np.trace(B)
    i1 = float(tr)
    i2 = float(0.5 * (tr * tr - np.trace(B @ B)))
    i3 = float(np.linalg.det(B))
    return i1, i2, i3


def piola_stress(model: MaterialModel, strain, pressure: float = 0.0) -> np.ndarray:
    """First Piola-Kirchhoff stress 2 W1 F + 2 W2 (I1 F - B F) - p F^{-T}.

    Assembled from the anti-plane closed forms.  Rows (3,1) and (3,2) are the
    shear stress components 2 (W1 + W2) g_alpha; at zero strain the stress is
    (2 W1 + 4 W2 - p) times the identity.
    """
    g1, g2 = (float(v) for v in strain)
    p = float(pressure)
    gsq = g1 * g1 + g2 * g2
    i = 3.0 + gsq
    w1, w2 = model.partials(i, i)

    shear = 2.0 * (w1 + w2)
    off = -2.0 * w2 * g1 * g2
    return np.array(
        [
            [2.0 * w1 + 2.0 * w2 * (2.0 + g2 * g2) - p, off, g1 * (p - 2.0 * w2)],
            [off, 2.0 * w1 + 2.0 * w2 * (2.0 + g1 * g1) - p, g2 * (p - 2.0 * w2)],
            [shear * g1, shear * g2, 2.0 * w1 + 4.0 * w2 - p],
        ]
    )
