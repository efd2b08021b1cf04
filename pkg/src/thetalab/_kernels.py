"""Compiled inner loops for truncated Poincare series.

Each point's sums run over words in the order given, with Kahan
compensation, so results do not depend on how points are split among
threads.
"""

import os

import numpy as np
from numba import config, njit, prange

if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    # try OpenMP first; an old system TBB otherwise triggers a warning on first use
    config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

CHUNK = 512


@njit(parallel=True, cache=True)
def pullback_sums(zr, zi, mats, coef, theta_r, theta_i, comp_r, comp_i, mass):
    """Accumulate sum_w phi(w z) w'(z)^2 into theta and sum_w |.| into mass.

    ``mats`` is (W, 8) real: re/im parts of a, b, c, d.  ``coef`` is (2, D+1)
    real/imag coefficients of phi.  Accumulators are updated in place.
    """
    P = zr.size
    W = mats.shape[0]
    D = coef.shape[1] - 1
    nchunk = (P + CHUNK - 1) // CHUNK
    for ch in prange(nchunk):
        lo = ch * CHUNK
        hi = min(P, lo + CHUNK)
        for w in range(W):
            ar = mats[w, 0]; ai = mats[w, 1]; br = mats[w, 2]; bi = mats[w, 3]
            cr = mats[w, 4]; ci = mats[w, 5]; dr = mats[w, 6]; di = mats[w, 7]
            for p in range(lo, hi):
                x = zr[p]; y = zi[p]
                den_r = cr * x - ci * y + dr
                den_i = cr * y + ci * x + di
                num_r = ar * x - ai * y + br
                num_i = ar * y + ai * x + bi
                q = 1.0 / (den_r * den_r + den_i * den_i)
                inv_r = den_r * q
                inv_i = -den_i * q
                u_r = num_r * inv_r - num_i * inv_i
                u_i = num_r * inv_i + num_i * inv_r
                # w'(z) = inv^2, the pullback factor is w'(z)^2 = inv^4
                w1_r = inv_r * inv_r - inv_i * inv_i
                w1_i = 2.0 * inv_r * inv_i
                d2_r = w1_r * w1_r - w1_i * w1_i
                d2_i = 2.0 * w1_r * w1_i
                v_r = coef[0, D]
                v_i = coef[1, D]
                for k in range(D - 1, -1, -1):
                    t = v_r * u_r - v_i * u_i + coef[0, k]
                    v_i = v_r * u_i + v_i * u_r + coef[1, k]
                    v_r = t
                t_r = v_r * d2_r - v_i * d2_i
                t_i = v_r * d2_i + v_i * d2_r
                yr = t_r - comp_r[p]
                s = theta_r[p] + yr
                comp_r[p] = (s - theta_r[p]) - yr
                theta_r[p] = s
                yi = t_i - comp_i[p]
                s = theta_i[p] + yi
                comp_i[p] = (s - theta_i[p]) - yi
                theta_i[p] = s
                mass[p] += np.sqrt(t_r * t_r + t_i * t_i)


@njit(parallel=True, cache=True)
def monomial_sums(zr, zi, mats, D, theta_r, theta_i, comp_r, comp_i, mass):
    """Same as pullback_sums for all monomials z^0..z^D at once.

    Accumulators have shape (D+1, P).
    """
    P = zr.size
    W = mats.shape[0]
    nchunk = (P + CHUNK - 1) // CHUNK
    for ch in prange(nchunk):
        lo = ch * CHUNK
        hi = min(P, lo + CHUNK)
        for w in range(W):
            ar = mats[w, 0]; ai = mats[w, 1]; br = mats[w, 2]; bi = mats[w, 3]
            cr = mats[w, 4]; ci = mats[w, 5]; dr = mats[w, 6]; di = mats[w, 7]
            for p in range(lo, hi):
                x = zr[p]; y = zi[p]
                den_r = cr * x - ci * y + dr
                den_i = cr * y + ci * x + di
                num_r = ar * x - ai * y + br
                num_i = ar * y + ai * x + bi
                q = 1.0 / (den_r * den_r + den_i * den_i)
                inv_r = den_r * q
                inv_i = -den_i * q
                u_r = num_r * inv_r - num_i * inv_i
                u_i = num_r * inv_i + num_i * inv_r
                w1_r = inv_r * inv_r - inv_i * inv_i
                w1_i = 2.0 * inv_r * inv_i
                t_r = w1_r * w1_r - w1_i * w1_i
                t_i = 2.0 * w1_r * w1_i
                m = q * q
                mu = np.sqrt(u_r * u_r + u_i * u_i)
                for k in range(D + 1):
                    if k > 0:
                        tmp = t_r * u_r - t_i * u_i
                        t_i = t_r * u_i + t_i * u_r
                        t_r = tmp
                    yr = t_r - comp_r[k, p]
                    s = theta_r[k, p] + yr
                    comp_r[k, p] = (s - theta_r[k, p]) - yr
                    theta_r[k, p] = s
                    yi = t_i - comp_i[k, p]
                    s = theta_i[k, p] + yi
                    comp_i[k, p] = (s - theta_i[k, p]) - yi
                    theta_i[k, p] = s
                    mass[k, p] += m
                    m *= mu


def split_mats(mats: np.ndarray) -> np.ndarray:
    """(W, 4) complex -> (W, 8) real, interleaving real and imaginary parts."""
    out = np.empty((mats.shape[0], 8))
    out[:, 0::2] = mats.real
    out[:, 1::2] = mats.imag
    return np.ascontiguousarray(out)
