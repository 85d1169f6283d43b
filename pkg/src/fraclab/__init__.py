"""Fractionally integrated nonlinear processes and long-memory test statistics.

Submodules
----------
fracops      fractional differencing/integration filters (Type I and Type II)
innovations  nonlinear short-memory innovation generators and diagnostics
fbm          fractional Brownian motion simulators and quantile tables
memtests     R/S and KPSS statistics with Bartlett long-run variance
harness      Monte Carlo experiments verifying the limit laws
cli          command line front end
"""

__version__ = "0.1.0"

FORMAT_VERSION = 1
