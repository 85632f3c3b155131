"""Monomial weights of the D_alpha(B_2) coefficient norm, in log form."""

import numpy as np
from scipy.special import betaln


def log_weight(alpha, k, l):
    """log of (2+k+l)^alpha * k! l! / (1+k+l)!, broadcasting over k and l.

    k! l!/(k+l+1)! is the Euler beta function B(k+1, l+1).
    """
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    return alpha * np.log(2.0 + k + l) + betaln(k + 1.0, l + 1.0)


def weight_table(alpha, order):
    """(order+1, order+1) array of weights; entries with k+l > order are zero."""
    k = np.arange(order + 1)
    kk, ll = np.meshgrid(k, k, indexing="ij")
    table = np.exp(log_weight(alpha, kk, ll))
    table[kk + ll > order] = 0.0
    return table
