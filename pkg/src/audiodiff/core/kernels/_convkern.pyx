# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# Direct 1D convolution kernels with OpenMP. Each parallel task owns a
# disjoint output slice and accumulates in a fixed order, so results are
# bit-identical for any thread count.

import numpy as np

cimport cython
cimport numpy as cnp
from cython.parallel import prange

ctypedef fused floating:
    float
    double

BACKEND = "cython"


def conv1d_forward(floating[:, :, ::1] x, floating[:, :, ::1] w, int stride):
    cdef Py_ssize_t nb = x.shape[0], cin = x.shape[1], t = x.shape[2]
    cdef Py_ssize_t cout = w.shape[0], k = w.shape[2]
    cdef Py_ssize_t tout = (t - k) // stride + 1
    dtype = np.float32 if floating is float else np.float64
    y_arr = np.zeros((nb, cout, tout), dtype=dtype)
    cdef floating[:, :, ::1] y = y_arr
    cdef Py_ssize_t idx, bi, co, ci, kk, to
    cdef floating wv
    for idx in prange(nb * cout, nogil=True, schedule="static"):
        bi = idx // cout
        co = idx % cout
        for ci in range(cin):
            for kk in range(k):
                wv = w[co, ci, kk]
                for to in range(tout):
                    y[bi, co, to] = y[bi, co, to] + wv * x[bi, ci, to * stride + kk]
    return y_arr


def conv1d_backward_input(floating[:, :, ::1] g, floating[:, :, ::1] w,
                          int stride, Py_ssize_t t_in):
    cdef Py_ssize_t nb = g.shape[0], cout = g.shape[1], tout = g.shape[2]
    cdef Py_ssize_t cin = w.shape[1], k = w.shape[2]
    dtype = np.float32 if floating is float else np.float64
    gx_arr = np.zeros((nb, cin, t_in), dtype=dtype)
    cdef floating[:, :, ::1] gx = gx_arr
    cdef Py_ssize_t idx, bi, ci, co, kk, to
    cdef floating wv
    for idx in prange(nb * cin, nogil=True, schedule="static"):
        bi = idx // cin
        ci = idx % cin
        for co in range(cout):
            for kk in range(k):
                wv = w[co, ci, kk]
                for to in range(tout):
                    gx[bi, ci, to * stride + kk] = gx[bi, ci, to * stride + kk] + wv * g[bi, co, to]
    return gx_arr


def conv1d_backward_weight(floating[:, :, ::1] g, floating[:, :, ::1] x,
                           int stride, Py_ssize_t k):
    cdef Py_ssize_t nb = g.shape[0], cout = g.shape[1], tout = g.shape[2]
    cdef Py_ssize_t cin = x.shape[1]
    dtype = np.float32 if floating is float else np.float64
    gw_arr = np.zeros((cout, cin, k), dtype=dtype)
    cdef floating[:, :, ::1] gw = gw_arr
    cdef Py_ssize_t idx, co, ci, kk, bi, to
    cdef floating acc
    for idx in prange(cout * cin, nogil=True, schedule="static"):
        co = idx // cin
        ci = idx % cin
        for kk in range(k):
            acc = 0
            for bi in range(nb):
                for to in range(tout):
                    acc = acc + g[bi, co, to] * x[bi, ci, to * stride + kk]
            gw[co, ci, kk] = acc
    return gw_arr
