"""Hyperelastic material models (plane strain) and their PK1 stresses.

The modified neo-Hookean model combines a deviatoric response built from
modified invariants with a volumetric stabilization pressure
pi_stab = -(kappa_stab / J) ln J; both parts derive from a scalar energy so
the stress is an exact gradient. Plane-strain convention: the in-plane F is
embedded in 3D with F_33 = 1, invariants and deviatoric parts are taken in
3D.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvertedElementError


@dataclass(frozen=True)
class ModifiedNeoHookean:
    shear_modulus: float        # G, dyn/cm^2
    bulk_stabilizer: float      # kappa_stab ("numerical bulk modulus")

    def __post_init__(self):
        if self.shear_modulus <= 0 or self.bulk_stabilizer < 0:
            raise ValueError("require G > 0 and kappa_stab >= 0")


@dataclass(frozen=True)
class IncompressibleNeoHookean:
    shear_modulus: float

    def __post_init__(self):
        if self.shear_modulus <= 0:
            raise ValueError("require G > 0")


@dataclass(frozen=True)
class RigidPenalty:
    """Stress-free material; rigidity comes from tether forces."""

    kappa_body: float = 0.0
    eta_body: float = 0.0


Material = ModifiedNeoHookean | IncompressibleNeoHookean | RigidPenalty


def _dets(F: np.ndarray) -> np.ndarray:
    return F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]


def _inv_transpose(F: np.ndarray, J: np.ndarray) -> np.ndarray:
    out = np.empty_like(F)
    out[..., 0, 0] = F[..., 1, 1]
    out[..., 0, 1] = -F[..., 1, 0]
    out[..., 1, 0] = -F[..., 0, 1]
    out[..., 1, 1] = F[..., 0, 0]
    return out / J[..., None, None]


def strain_energy(material: Material, F: np.ndarray) -> np.ndarray:
    """Energy density Psi(F); F has shape (..., 2, 2)."""
    F = np.asarray(F, dtype=float)
    J = _dets(F)
    if np.any(J <= 0):
        raise ValueError("det F <= 0 in strain_energy")
    if isinstance(material, ModifiedNeoHookean):
        I1 = np.einsum("...ab,...ab->...", F, F) + 1.0
        G, k = material.shear_modulus, material.bulk_stabilizer
        return 0.5 * G * (J ** (-2.0 / 3.0) * I1 - 3.0) + 0.5 * k * np.log(J) ** 2
    if isinstance(material, IncompressibleNeoHookean):
        G = material.shear_modulus
        I1_2d = np.einsum("...ab,...ab->...", F, F)
        return 0.5 * G * (I1_2d - 2.0) - G * np.log(J)
    return np.zeros(np.shape(J))


def pk1_stress(material: Material, F: np.ndarray,
               element_ids: np.ndarray | None = None) -> np.ndarray:
    """First Piola-Kirchhoff stress P = dPsi/dF, shape (..., 2, 2).

    Raises InvertedElementError (with the offending element when ids are
    supplied) if det F <= 0 anywhere.
    """
    F = np.asarray(F, dtype=float)
    J = _dets(F)
    if np.any(J <= 0.0):
        bad = np.argwhere(np.atleast_1d(J) <= 0.0)[0]
        eid = int(element_ids[tuple(bad)]) if element_ids is not None else -1
        raise InvertedElementError(eid, float(np.atleast_1d(J)[tuple(bad)]))
    if isinstance(material, ModifiedNeoHookean):
        G, k = material.shear_modulus, material.bulk_stabilizer
        Fit = _inv_transpose(F, J)
        I1 = np.einsum("...ab,...ab->...", F, F) + 1.0
        Jm23 = J ** (-2.0 / 3.0)
        P = G * Jm23[..., None, None] * (F - (I1 / 3.0)[..., None, None] * Fit)
        P += k * np.log(J)[..., None, None] * Fit
        return P
    if isinstance(material, IncompressibleNeoHookean):
        G = material.shear_modulus
        return G * (F - _inv_transpose(F, J))
    return np.zeros_like(F)


def stabilization_pressure(material: ModifiedNeoHookean, F: np.ndarray) -> np.ndarray:
    """pi_stab = -(kappa_stab / J) ln J; positive in compression."""
    J = _dets(np.asarray(F, dtype=float))
    return -material.bulk_stabilizer / J * np.log(J)
