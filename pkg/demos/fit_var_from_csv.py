"""
Fitting a VAR from a CSV file
=============================

Write a simulated bivariate series to CSV and fit a VAR(1) with intercepts
through the command-line entry point, conditioning on the first lag.
"""

# %%
import tempfile
from pathlib import Path

import numpy as np

from mddest import DgpSpec, generate
from mddest.cli import main

data = generate(DgpSpec(16, 400, seed=5))
series = data.sample.z[:, :2]

path = Path(tempfile.mkdtemp()) / "var.csv"
np.savetxt(path, series, delimiter=",", header="y1,y2", comments="", fmt="%.17g")

# %%
# Equivalent shell command: ``mddest fit --data var.csv --model var --lags 1``
main(["fit", "--data", str(path), "--model", "var", "--lags", "1"])
print("true slope matrix:\n", data.model.gamma(data.theta0))

# %%
# A threshold model on the first column, conditioning on four lags.
main(["fit", "--data", str(path), "--model", "tar", "--response", "y1", "--lags", "2"])
