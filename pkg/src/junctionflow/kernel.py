"""Look-ahead weight kernels and their cell-integrated discrete weights.

A kernel describes how a driver averages downstream information over the
look-ahead distance ``eta``: a non-negative, non-increasing density on
``[0, eta]`` with unit integral.  Three built-in shapes are supported
(constant, linear, quadratic).  For the finite-volume scheme the kernel is
reduced to one weight per cell, ``gamma[k]``, the exact integral of the
density over ``[k*dx, (k+1)*dx]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidKernel, NonCommensurateGrid

KERNEL_KINDS = ("constant", "linear", "quadratic")

# Relative tolerance when checking that eta is an integer multiple of dx.
COMMENSURATE_RTOL = 1e-9


@dataclass(frozen=True)
class KernelSpec:
    """Shape and range of a look-ahead kernel.

    Attributes:
        kind: One of ``constant``, ``linear``, ``quadratic``.
        eta: Look-ahead distance (support of the density), > 0.
    """

    kind: str
    eta: float

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidKernel(
                f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}"
            )
        if not self.eta > 0:
            raise InvalidKernel(f"eta must be positive, got {self.eta}")


def kernel_density(spec: KernelSpec, x: float) -> float:
    """Evaluate the kernel density at ``x`` (0 outside ``[0, eta]``)."""
    eta = spec.eta
    if x < 0.0 or x > eta:
        return 0.0
    if spec.kind == "constant":
        return 1.0 / eta
    if spec.kind == "linear":
        return 2.0 * (eta - x) / eta**2
    return 3.0 * (eta**2 - x**2) / (2.0 * eta**3)


def _cumulative(spec: KernelSpec, x: float) -> float:
    """Closed-form integral of the density over ``[0, x]`` for x in [0, eta]."""
    eta = spec.eta
    if spec.kind == "constant":
        return x / eta
    if spec.kind == "linear":
        return x * (2.0 * eta - x) / eta**2
    return 1.5 * (eta**2 * x - x**3 / 3.0) / eta**3


@dataclass(frozen=True)
class DiscreteKernel:
    """Cell-integrated kernel weights on a grid of width ``dx``.

    Attributes:
        gamma: ``n_eta`` non-negative weights, one per stencil cell.
        dx: Cell width the weights were built for.
        n_eta: Number of stencil cells; ``n_eta * dx == eta``.
        tail: Suffix sums, ``tail[m] = sum(gamma[m:])`` with ``tail[0] == 1``
            and ``tail[n_eta] == 0``.  ``gamma`` is defined as the adjacent
            difference of ``tail``, so ``tail[m] - tail[m + 1] == gamma[m]``
            holds bitwise.
    """

    gamma: np.ndarray
    dx: float
    n_eta: int
    tail: np.ndarray
    spec: KernelSpec = field(repr=False)


def build_discrete_kernel(spec: KernelSpec, dx: float) -> DiscreteKernel:
    """Integrate the kernel density over each grid cell.

    The weights come from the closed-form antiderivative, not quadrature:
    ``tail[m]`` is the exact remaining mass beyond ``m*dx`` (with the
    endpoints pinned to exactly 1 and 0) and ``gamma`` is its difference.

    Raises:
        NonCommensurateGrid: if ``dx <= 0`` or ``eta`` is not an integer
            multiple of ``dx`` within relative tolerance 1e-9.
    """
    if not dx > 0:
        raise NonCommensurateGrid(f"dx must be positive, got {dx}")
    ratio = spec.eta / dx
    n = int(round(ratio))
    if n < 1 or abs(n * dx - spec.eta) > COMMENSURATE_RTOL * spec.eta:
        raise NonCommensurateGrid(
            f"eta = {spec.eta} is not an integer multiple of dx = {dx}"
        )
    tail = np.empty(n + 1)
    tail[0] = 1.0
    for m in range(1, n):
        tail[m] = 1.0 - _cumulative(spec, m * dx)
    tail[n] = 0.0
    gamma = tail[:-1] - tail[1:]
    gamma.flags.writeable = False
    tail.flags.writeable = False
    return DiscreteKernel(gamma=gamma, dx=dx, n_eta=n, tail=tail, spec=spec)
