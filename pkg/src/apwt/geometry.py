"""Lorentz boosts along x, hyperbolic coordinates of the spectral plane and
the distortion of a packet ellipse under a boost.

Sign convention.  ``Boost(phi).matrix`` is the coordinate map
``(ct', x') = Lambda_phi (ct, x)`` into the frame moving with speed
``v = c tanh(phi)``.  Under the Minkowski product ``-k ct + kx x`` the
frequency vector transforms with the *same* matrix, ``sigma' = Lambda_phi
sigma``, which lowers the hyperbolic angle of ``sigma`` by ``phi``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LIGHT_CONE, sector_index

__all__ = [
    "Boost",
    "HyperbolicPoint",
    "PacketEllipse",
    "boost",
    "spectral_boost_scale",
    "hyperbolic_coords",
    "from_hyperbolic",
    "packet_ellipse",
    "packet_form_matrix",
    "packet_center",
]


def _boost_matrix(phi):
    ch, sh = np.cosh(phi), np.sinh(phi)
    return np.array([[ch, -sh], [-sh, ch]])


@dataclass(frozen=True)
class Boost:
    """Lorentz boost with rapidity ``phi``."""

    phi: float
    c: float = 1.0

    @property
    def matrix(self):
        return _boost_matrix(self.phi)

    @property
    def speed(self):
        """Frame speed ``v = c tanh(phi)``."""
        return self.c * np.tanh(self.phi)

    @property
    def beta(self):
        return np.tanh(self.phi)

    def __matmul__(self, other):
        if isinstance(other, Boost):
            return Boost(self.phi + other.phi, self.c)
        return self.matrix @ np.asarray(other)

    def inverse(self):
        return Boost(-self.phi, self.c)


def boost(phi, c=1.0):
    if not np.isfinite(phi):
        raise ValueError(f"rapidity must be finite, got {phi!r}")
    return Boost(float(phi), c)


def spectral_boost_scale(sigma, a, phi):
    """Argument at which the mother spectrum is sampled for the member (a, phi).

    Returns ``a * Lambda_phi @ sigma``.  ``sigma`` may be a pair of arrays
    ``(k, kx)`` of any broadcastable shape; the result is a tuple of the
    same shape.
    """
    if not np.all(np.asarray(a) > 0):
        raise ValueError(f"scale must be positive, got {a!r}")
    k, kx = sigma
    ch, sh = np.cosh(phi), np.sinh(phi)
    return a * (ch * k - sh * kx), a * (ch * kx - sh * k)


@dataclass(frozen=True)
class HyperbolicPoint:
    """``sigma`` written as ``rho * (cosh phi0, sinh phi0)`` up to branch.

    Branch 1: ``( cosh,  sinh)``, branch 2: ``-( cosh, sinh)``,
    branch 3: ``( sinh,  cosh)``, branch 4: ``-( sinh, cosh)``.
    """

    rho: float
    phi0: float
    branch: int


def hyperbolic_coords(sigma):
    """Hyperbolic radius, angle and sector of a spectral point.

    ``rho = sqrt(|k^2 - kx^2|)``; ``phi0 = artanh(kx/k)`` on sectors 1-2 and
    ``artanh(k/kx)`` on sectors 3-4 (k and kx interchanged).
    """
    k, kx = (float(s) for s in sigma)
    branch = int(sector_index(k, kx))
    if branch == LIGHT_CONE:
        raise ValueError(f"point {(k, kx)} is on the light cone; hyperbolic coordinates are singular")
    rho = np.sqrt(abs(k * k - kx * kx))
    phi0 = np.arctanh(kx / k) if branch in (1, 2) else np.arctanh(k / kx)
    return HyperbolicPoint(float(rho), float(phi0), branch)


def from_hyperbolic(rho, phi0, branch=1):
    """Inverse of :func:`hyperbolic_coords` (vectorised over rho, phi0)."""
    ch, sh = rho * np.cosh(phi0), rho * np.sinh(phi0)
    return {1: (ch, sh), 2: (-ch, -sh), 3: (sh, ch), 4: (-sh, -ch)}[branch]


@dataclass(frozen=True)
class PacketEllipse:
    """Principal-axis form ``lambda1 u^2 + lambda2 v^2 <= 1`` of a boosted packet.

    ``lambda1 >= lambda2``; ``axis1``/``axis2`` are the matching unit
    eigenvectors with non-negative second component.
    """

    center: tuple
    lambda1: float
    lambda2: float
    axis1: np.ndarray
    axis2: np.ndarray

    @property
    def semi_axes(self):
        return 1 / np.sqrt(self.lambda1), 1 / np.sqrt(self.lambda2)


def packet_form_matrix(alpha, beta, phi):
    """Symmetric matrix of ``alpha^2 cosh^2(phi) X^2 + beta^2 (Y - sinh(phi) X)^2``."""
    ch2, sh = np.cosh(phi) ** 2, np.sinh(phi)
    a2, b2 = alpha * alpha, beta * beta
    return np.array([[a2 * ch2 + b2 * sh * sh, -b2 * sh], [-b2 * sh, b2]])


def _unit_upper(v):
    v = np.asarray(v, float)
    v = v / np.hypot(v[0], v[1])
    if v[1] < 0 or (v[1] == 0 and v[0] < 0):
        v = -v
    return v


def packet_ellipse(alpha, beta, phi, center=(0.0, 0.0)):
    """Eigen-structure of the boosted packet's quadratic form.

    The rest-frame packet ``alpha^2 x'^2 + beta^2 (y - ct')^2 <= 1`` seen in
    the stationary frame has the form returned by
    :func:`packet_form_matrix`.  The eigenvalues are

        lambda_{1,2} = [(alpha^2+beta^2) cosh^2 phi
                        +- sqrt((alpha^2+beta^2)^2 cosh^4 phi
                                - 4 alpha^2 beta^2 cosh^2 phi)] / 2

    and the eigenvector of ``lambda`` is ``(-beta^2 sinh phi, lambda - M11)``
    (or ``(lambda - M22, -beta^2 sinh phi)``, whichever is better
    conditioned).
    """
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    ch2 = np.cosh(phi) ** 2
    s = (alpha * alpha + beta * beta) * ch2
    p = alpha * alpha * beta * beta * ch2
    # s^2 - 4p rewritten as cosh^2 [(a^2-b^2)^2 + (a^2+b^2)^2 sinh^2]: no cancellation
    a2, b2 = alpha * alpha, beta * beta
    disc = np.cosh(phi) * np.hypot(a2 - b2, (a2 + b2) * np.sinh(phi))
    lam1 = 0.5 * (s + disc)
    # cancellation-free small root
    lam2 = p / lam1
    m = packet_form_matrix(alpha, beta, phi)
    off = m[0, 1]
    if off == 0 and m[0, 0] == m[1, 1]:
        # isotropic form: any orthonormal pair will do
        axes = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    else:
        axes = []
        for lam in (lam1, lam2):
            u = np.array([off, lam - m[0, 0]])
            w = np.array([lam - m[1, 1], off])
            axes.append(_unit_upper(u if np.hypot(*u) >= np.hypot(*w) else w))
    return PacketEllipse(tuple(float(c) for c in center), float(lam1), float(lam2), axes[0], axes[1])


def packet_center(phi, ct):
    """Stationary-frame centre ``(ct tanh phi, ct / cosh phi)`` of a packet
    moving along +y in its own frame."""
    return ct * np.tanh(phi), ct / np.cosh(phi)
