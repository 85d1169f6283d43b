"""Sequential recursions compiled with numba.

Each kernel maps a pre-drawn shock array to the output path, so coupled
paths (one shock replaced) reuse the same code.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def garch11_path(z, omega, alpha, beta):
    """u_t = sqrt(h_t) z_t,  h_t = omega + alpha u_{t-1}^2 + beta h_{t-1}.

    Starts at the unconditional variance omega / (1 - alpha - beta).
    z must have unit variance for that value to be the stationary E[u^2].
    """
    n = z.size
    u = np.empty(n)
    h = omega / (1.0 - alpha - beta)
    for t in range(n):
        u[t] = np.sqrt(h) * z[t]
        h = omega + alpha * u[t] * u[t] + beta * h
    return u


@njit(cache=True)
def garch11_var_path(z, omega, alpha, beta):
    """Conditional variances h_t along the same recursion as garch11_path."""
    n = z.size
    hs = np.empty(n)
    h = omega / (1.0 - alpha - beta)
    for t in range(n):
        hs[t] = h
        u = np.sqrt(h) * z[t]
        h = omega + alpha * u * u + beta * h
    return hs


@njit(cache=True)
def bilinear_path(eps, a, b):
    """u_t = (a + b eps_{t-1}) u_{t-1} + eps_t, started at u_0-state 0."""
    n = eps.size
    u = np.empty(n)
    prev = 0.0
    eprev = 0.0
    for t in range(n):
        prev = (a + b * eprev) * prev + eps[t]
        u[t] = prev
        eprev = eps[t]
    return u


@njit(cache=True)
def threshold_ar_path(eps, a_pos, a_neg):
    """u_t = a+ max(u_{t-1}, 0) + a- min(u_{t-1}, 0) + eps_t, from state 0."""
    n = eps.size
    u = np.empty(n)
    prev = 0.0
    for t in range(n):
        prev = a_pos * max(prev, 0.0) + a_neg * min(prev, 0.0) + eps[t]
        u[t] = prev
    return u
