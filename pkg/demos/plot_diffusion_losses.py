"""
Diffusion schedule and training losses
======================================

The DDPM sampler is plain arithmetic once a noise predictor is plugged
in. An oracle predictor that knows the clean sample shows the reverse
chain undoing the forward noising. The same section evaluates the image
losses used to supervise a separation network.
"""

import numpy as np

from polarsep import diffusion, metrics

sched = diffusion.make_schedule(1000, 1e-4, 0.02)
print("alpha_bar at t = 1, 250, 500, 1000:",
      [float(f"{sched.alpha_bar[t]:.3g}") for t in (1, 250, 500, 1000)])

# %%
# Forward noising in one jump versus 500 single steps.
rng = np.random.default_rng(3)
z0 = np.full(20_000, 1.5)
jump = diffusion.q_sample(z0, 500, rng.standard_normal(z0.shape), sched)
z = z0.copy()
for t in range(1, 501):
    z = diffusion.step_sample(z, t, rng.standard_normal(z.shape), sched)
print("closed form mean/var: %.4f %.4f" % (np.sqrt(sched.alpha_bar[500]) * 1.5, 1 - sched.alpha_bar[500]))
print("one jump    mean/var: %.4f %.4f" % (jump.mean(), jump.var()))
print("500 steps   mean/var: %.4f %.4f" % (z.mean(), z.var()))

# %%
# Reverse chain with the oracle predictor.
target = rng.standard_normal((8, 8))
trace = []
out = diffusion.generate(diffusion.oracle_denoiser(target, sched), None, sched, seed=0,
                         shape=target.shape, trace=trace)
for t, zt in trace[:: 250]:
    print(f"t={t:4d}  distance to target {np.linalg.norm(zt - target):.3f}")
print("final relative error:", np.linalg.norm(out - target) / np.linalg.norm(target))

# %%
# Losses: the phase term ignores a global brightness change but not a shift.
img = rng.random((32, 32))
print("phase(img, 3 img)   =", metrics.phase_loss(img, 3 * img))
print("phase(img, shifted) =", metrics.phase_loss(img, np.roll(img, 2, axis=1)))
total, parts = metrics.stage1_loss(0.9 * img, img)
print("stage-1 loss", round(total, 5), {k: round(v, 5) for k, v in parts.items()})
