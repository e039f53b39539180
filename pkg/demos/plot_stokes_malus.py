"""
Stokes maps and Malus's law
===========================

Four polarizer readings at 0, 45, 90 and 135 degrees pin down the linear
Stokes vector of every pixel. From it we get the degree and angle of
linear polarization, and the intensity behind a polarizer at any angle.
"""

import numpy as np

from polarsep import stokes

# %%
# A small field of partially polarized light: brightness ramps left to
# right, polarization angle ramps top to bottom.
h, w = 4, 6
s0 = np.tile(np.linspace(0.2, 1.0, w), (h, 1))
angle = np.linspace(-np.pi / 3, np.pi / 3, h)[:, None] * np.ones((1, w))
p = 0.6
truth = stokes.StokesMap(s0, p * s0 * np.cos(2 * angle), p * s0 * np.sin(2 * angle))

# %%
# Simulate the four polarizer readings, then invert them.
frame = stokes.frame_from_stokes(truth)
est = stokes.compute_stokes(frame)
print("max |s1 error|:", np.abs(est.s1 - truth.s1).max())
print("DOLP (should be 0.6 everywhere):")
print(np.round(stokes.dolp(est), 6))
print("AOLP in degrees, one column:")
print(np.round(np.degrees(stokes.aolp(est)[:, 0]), 3))

# %%
# Sweep a virtual polarizer over a fully polarized pixel. The reading
# follows cos^2 of the angle to the polarization direction.
phi0 = np.radians(30)
pixel = stokes.StokesMap(*(np.full((1, 1), v) for v in (1.0, np.cos(2 * phi0), np.sin(2 * phi0))))
for deg in range(0, 181, 30):
    reading = stokes.intensity_at(pixel, np.radians(deg))[0, 0]
    print(f"polarizer {deg:3d} deg -> {reading:.4f}  (cos^2 = {np.cos(np.radians(deg) - phi0) ** 2:.4f})")
