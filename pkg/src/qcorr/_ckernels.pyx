# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  Semantics must match qcorr._pykernels exactly."""
from libc.math cimport cos, sin, log2, sqrt

import numpy as np


cdef inline double _xlog2x(double x) noexcept nogil:
    if x <= 0.0:
        return 0.0
    return x * log2(x)


cdef inline double _branch(const double complex[:, ::1] rho,
                           double complex v0, double complex v1) noexcept nogil:
    # p_k S(rho_A^k) for the projector onto (v0, v1) acting on B
    cdef double complex m00 = 0, m01 = 0, m11 = 0
    cdef double complex w[2]
    cdef double complex u[2]
    cdef Py_ssize_t b, bp
    u[0] = v0
    u[1] = v1
    w[0] = v0.conjugate()
    w[1] = v1.conjugate()
    for b in range(2):
        for bp in range(2):
            m00 = m00 + w[b] * rho[b, bp] * u[bp]
            m01 = m01 + w[b] * rho[b, 2 + bp] * u[bp]
            m11 = m11 + w[b] * rho[2 + b, 2 + bp] * u[bp]
    cdef double a = m00.real
    cdef double d = m11.real
    cdef double p = a + d
    cdef double disc = sqrt((a - d) * (a - d) + 4.0 * (m01.real * m01.real + m01.imag * m01.imag))
    return _xlog2x(p) - _xlog2x(0.5 * (p + disc)) - _xlog2x(0.5 * (p - disc))


cdef inline double _cond(const double complex[:, ::1] rho, double ct, double st,
                         double complex e) noexcept nogil:
    return (_branch(rho, ct, e * st)
            + _branch(rho, e.conjugate() * st, -ct))


def cond_entropy(const double complex[:, ::1] rho, double theta, double phi):
    return _cond(rho, cos(theta), sin(theta), cos(phi) + 1j * sin(phi))


def cond_entropy_grid(const double complex[:, ::1] rho,
                      const double[::1] thetas, const double[::1] phis):
    cdef Py_ssize_t nt = thetas.shape[0]
    cdef Py_ssize_t nphi = phis.shape[0]
    out = np.empty((nt, nphi), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double ct, st
    cdef double complex[::1] e = np.exp(1j * np.asarray(phis))
    with nogil:
        for i in range(nt):
            ct = cos(thetas[i])
            st = sin(thetas[i])
            for j in range(nphi):
                o[i, j] = _cond(rho, ct, st, e[j])
    return out


def free_evolve(double complex[:, :, ::1] nodes, const double[::1] de,
                const double[::1] dn, double dt, double hom):
    cdef Py_ssize_t n = nodes.shape[0]
    cdef Py_ssize_t k, i, j
    cdef double om[4]
    cdef double ang
    cdef double complex f
    with nogil:
        for k in range(n):
            om[0] = 0.5 * (de[k] + dn[k])
            om[1] = 0.5 * (de[k] - dn[k])
            om[2] = 0.5 * (-de[k] + dn[k])
            om[3] = -0.5 * (de[k] + dn[k])
            for i in range(4):
                for j in range(4):
                    if i == j:
                        continue
                    ang = -(om[i] - om[j]) * dt
                    f = cos(ang) + 1j * sin(ang)
                    if (i >> 1) != (j >> 1):
                        f = f * hom
                    nodes[k, i, j] = nodes[k, i, j] * f
