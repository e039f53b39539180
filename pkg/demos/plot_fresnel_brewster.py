"""
Fresnel reflectance and the Brewster angle
==========================================

Glass reflects s-polarized light more strongly than p-polarized light.
At the Brewster angle the p reflectance vanishes, so the reflection is
fully polarized and a polarizer can block it.
"""

import numpy as np

from polarsep import optics

n1, n2 = 1.0, 1.5
theta_b = optics.brewster_angle(n1, n2)
print(f"Brewster angle for n2/n1 = {n2 / n1}: {np.degrees(theta_b):.2f} deg")

# %%
# Reflectances over the incidence angle.
deg = np.array([0, 15, 30, 45, 56.31, 70, 85])
c = optics.fresnel(optics.InterfaceSpec(n1, n2, np.radians(deg)))
print(" theta    R_s      R_p      DOLP of reflection")
for d, rs, rp, dop in zip(deg, c.r_s, c.r_p, optics.reflection_dolp(c)):
    print(f"{d:6.2f}  {rs:.5f}  {rp:.5f}  {dop:.4f}")

# %%
# Synthesize a mixture at the Brewster angle. The unpolarized image is the
# weighted sum of the two layers.
rng = np.random.default_rng(0)
t = rng.uniform(0.2, 0.8, (4, 4))
r = rng.uniform(0.2, 0.8, (4, 4))
scene = optics.SceneSpec(t, r, optics.InterfaceSpec(n1, n2, theta_b), depolarize_transmission=True)
syn = optics.synthesize(scene)
print(f"alpha_t = {syn.alpha_t:.4f}, alpha_r = {syn.alpha_r:.4f}")
print("max |s0 - (alpha_t T + alpha_r R)|:",
      np.abs(syn.mixed.s0 - (syn.alpha_t * t + syn.alpha_r * r)).max())
