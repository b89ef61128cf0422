"""
Wavelet family, admissibility and energy balance
================================================

A walk through the pieces of the transform on a small mesh: the mother
spectrum, a boosted and dilated family member, the admissibility constant
and the energy balance of the analysis.
"""

import numpy as np

from apwt.geometry import hyperbolic_coords, spectral_boost_scale
from apwt.lattice import Grid2D, Spectrum, forward_fourier, inverse_fourier, sector_mask
from apwt.transform import apwt_slab, default_sampling, plancherel_check, synthesize
from apwt.wavelets import MotherSpec, WaveletPoint, admissibility_constant, family_hat, mother_hat

# The mother lives in the forward cone omega > |kx| and is a Gaussian in
# ky = sqrt(omega^2 - kx^2) around kappa.
spec = MotherSpec(sector=1, kappa=4.0, sigma_par=1.0, sigma_perp=2.0)
print("mother at its centre (4, 0):", mother_hat(spec, (4.0, 0.0)))
print("mother outside its sector  :", mother_hat(spec, (0.5, 2.0)))

# A family member with scale a and rapidity phi samples the mother at
# a * Lambda_phi * sigma: its spectral centre sits at (kappa/a)(cosh phi, sinh phi).
a, phi = 2.0, 0.5
centre = (spec.kappa / a * np.cosh(phi), spec.kappa / a * np.sinh(phi))
print("mother argument at the member centre:", spectral_boost_scale(centre, a, phi))
print("hyperbolic coordinates of the centre:", hyperbolic_coords(centre))
mu = WaveletPoint((0.0, 0.0), a, phi)
print("|member| at its centre:", abs(family_hat(spec, mu, centre)))

# The admissibility constant is an integral over the sector; it is finite
# because the mother vanishes on the light cone.
C = admissibility_constant(spec)
print(f"C = {C.value:.12f} (quadrature error {C.quadrature_error:.1e})")

# Build a band-limited sector-1 signal and take one (a, phi) slab.
g = Grid2D(64, 64, 0.5, 0.5, (-15.75, -15.75))
k, kx = g.dual_mesh()
bump = np.exp(-((k - 2.0) ** 2 + kx ** 2) / (2 * 0.2 ** 2))
f = inverse_fourier(sector_mask(Spectrum(g, bump + 0j), 1))
slab = apwt_slab(f, spec, a, phi)
print("largest coefficient on the slab:", np.abs(slab).max())

# Energy balance: the (a, phi, b) energy of the coefficients over C times
# the signal energy is 1 in the continuum; sampling error shrinks under refinement.
for n_phi, n_a in ((31, 33), (61, 65)):
    a_axis, phi_axis = default_sampling(f, spec, n_phi=n_phi, n_a=n_a)
    print(f"sampling {n_phi}x{n_a}: ratio = {plancherel_check(f, spec, a_axis, phi_axis, C).ratio:.6f}")

# Analysis followed by synthesis gives back the sector-1 part of f.
u = synthesize(f, spec, a_axis, phi_axis, C)
f1 = sector_mask(forward_fourier(f), 1)
err = np.linalg.norm(u.values - inverse_fourier(f1).values) / np.linalg.norm(f.values)
print(f"reconstruction error: {err:.2e}")
