"""Regularized delta-function kernels (tensor products of 1D kernels).

Both kernels satisfy the zeroth and first discrete moment conditions on a
unit lattice: sum_i phi(r - i) = 1 and sum_i (i - r) phi(r - i) = 0 for
every shift r, which is what the coupling conservation results rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class KernelKind(Enum):
    PIECEWISE_LINEAR = "pwl"
    BSPLINE3 = "bspline3"


@dataclass(frozen=True)
class Kernel:
    kind: KernelKind

    @property
    def support_radius(self) -> float:
        """Half-width of the 1D support in cell units."""
        return 1.0 if self.kind is KernelKind.PIECEWISE_LINEAR else 1.5

    @property
    def stencil_width(self) -> int:
        """Number of lattice points touched per direction."""
        return 2 if self.kind is KernelKind.PIECEWISE_LINEAR else 3

    def __str__(self) -> str:
        return self.kind.value


PIECEWISE_LINEAR = Kernel(KernelKind.PIECEWISE_LINEAR)
BSPLINE3 = Kernel(KernelKind.BSPLINE3)

KERNELS = {k.value: Kernel(k) for k in KernelKind}


def kernel_eval(kernel: Kernel, r) -> np.ndarray:
    """1D kernel phi(r), r in cell units."""
    r = np.abs(np.asarray(r, dtype=float))
    if kernel.kind is KernelKind.PIECEWISE_LINEAR:
        return np.maximum(0.0, 1.0 - r)
    out = np.zeros_like(r)
    inner = r <= 0.5
    outer = (r > 0.5) & (r < 1.5)
    out[inner] = 0.75 - r[inner] ** 2
    out[outer] = 0.5 * (1.5 - r[outer]) ** 2
    return out


def delta2(kernel: Kernel, v, dx: float) -> np.ndarray:
    """2D regularized delta: phi(v1/dx) phi(v2/dx) / dx^2."""
    v = np.asarray(v, dtype=float)
    return kernel_eval(kernel, v[..., 0] / dx) * kernel_eval(kernel, v[..., 1] / dx) / dx**2


def stencil(kernel: Kernel, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lattice window and weights covering the kernel support.

    t: continuous lattice coordinates of the points, shape (Q,).
    Returns (i0, w) with i0 (Q,) the first lattice index of each window and
    w (Q, width) the kernel values at i0 + k.
    """
    t = np.asarray(t, dtype=float)
    if kernel.kind is KernelKind.PIECEWISE_LINEAR:
        i0 = np.floor(t).astype(np.intp)
    else:
        i0 = np.floor(t + 0.5).astype(np.intp) - 1
    offsets = np.arange(kernel.stencil_width)
    w = kernel_eval(kernel, t[:, None] - (i0[:, None] + offsets[None, :]))
    return i0, w
