"""
Fat tails and volatility clustering
===================================

100-step returns of the baseline market are compared against a Gaussian
random walk of the same length.
"""

import numpy as np

from hftmarket import MarketParams, run, stylized_facts

trace = run(MarketParams(t_end=200_000, seed=3))
model = stylized_facts(trace)
print("model    kurtosis %.3f  acf(r^2) %s" % (model.kurtosis, np.round(model.sq_return_autocorr, 3)))

rng = np.random.default_rng(0)
walk = 10_000 * np.exp(np.cumsum(rng.normal(0, 5e-4, trace.t_end)))
null = stylized_facts(walk)
print("gaussian kurtosis %.3f  acf(r^2) %s" % (null.kurtosis, np.round(null.sq_return_autocorr, 3)))
