"""
A small Monte-Carlo table
=========================

Bias, mean analytic standard error (ASD) and empirical standard deviation
(ESD) for two designs, with fewer replications than the full tables.
"""

# %%
from mddest import emit_table, run_experiment

summaries = []
for dgp in (1, 13):
    for n in (50, 200):
        res = run_experiment(dgp, n, replications=100, seed=2024)
        summaries.extend(res.values())

print(emit_table(summaries, "text-grid"))

# %%
# Coverage of nominal 95% intervals for the first design at n = 200.
mdd = [s for s in summaries if s.dgp == 1 and s.n == 200 and s.estimator == "mdd"][0]
print("coverage:", mdd.coverage(), "converged:", mdd.converged, "/", mdd.requested)
