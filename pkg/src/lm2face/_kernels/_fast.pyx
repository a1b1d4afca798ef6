# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the per-pixel hot loops (heatmap compositing, LBP).

Must stay numerically interchangeable with lm2face._kernels.slow.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

IMPLEMENTATION = "cython"


def gaussian_max_heatmap(centers, int size, double sigma):
    """Max-composite of unit-peak Gaussian bumps at integer pixel centers.
    Separable 1-D tables per bump keep the exp() count at 2*size per center."""
    cdef cnp.ndarray[cnp.int64_t, ndim=2] c = np.ascontiguousarray(centers, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((size, size), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] row_tab = np.empty(size, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] col_tab = np.empty(size, dtype=np.float64)
    cdef Py_ssize_t k, i, j, n = c.shape[0]
    cdef double inv = 1.0 / (2.0 * sigma * sigma)
    cdef double d, v, cy, cx, r
    for k in range(n):
        cy = <double> c[k, 0]
        cx = <double> c[k, 1]
        for i in range(size):
            d = i - cy
            row_tab[i] = exp(-d * d * inv)
            d = i - cx
            col_tab[i] = exp(-d * d * inv)
        for i in range(size):
            r = row_tab[i]
            for j in range(size):
                v = r * col_tab[j]
                if v > out[i, j]:
                    out[i, j] = v
    return out


def lbp_codes(img):
    """8-bit LBP code per pixel (neighbor >= center, clockwise from top-left),
    border neighbors by replication."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(img, dtype=np.float64)
    cdef Py_ssize_t h = a.shape[0], w = a.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((h, w), dtype=np.uint8)
    cdef Py_ssize_t i, j, bit, ni, nj
    cdef int[8] dys = [-1, -1, -1, 0, 1, 1, 1, 0]
    cdef int[8] dxs = [-1, 0, 1, 1, 1, 0, -1, -1]
    cdef double center
    cdef unsigned char code
    for i in range(h):
        for j in range(w):
            center = a[i, j]
            code = 0
            for bit in range(8):
                ni = i + dys[bit]
                nj = j + dxs[bit]
                if ni < 0:
                    ni = 0
                elif ni >= h:
                    ni = h - 1
                if nj < 0:
                    nj = 0
                elif nj >= w:
                    nj = w - 1
                if a[ni, nj] >= center:
                    code |= <unsigned char> (1 << bit)
            out[i, j] = code
    return out
