"""
Intercepts: the two-step procedure versus the indicator-weighted estimator
==========================================================================

In Z1 = 0.5 + Z2 + e the slope is found by minimising MDD_n over the
non-intercept part; the intercept is then the negative mean residual.
"""

# %%
from mddest import DgpSpec, estimate, generate

data = generate(DgpSpec(11, 200, seed=7))
print("truth:", data.theta0)

# %%
# ``estimate`` routes models with intercepts to the two-step procedure.
two_step = estimate(data.model, data.sample, "mdd")
print(two_step.summary())

# %%
# The joint covariance comes from per-observation influence terms J_t. Its
# blocks agree with the closed forms for V1 and V2.
parts = two_step.details["sandwich"]
print("largest block gap:", parts.block_gap)

# %%
# The indicator-weighted estimator identifies the intercept directly, with
# wider standard errors on this design.
dl = estimate(data.model, data.sample, "dl")
print(dl.summary())
