# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernels.

Same contract as ``_kernels_py`` (the numpy reference): play-then-observe
dots, 1-based checkpoint sums of played iterates, projection codes
0 = none / 1 = l2 ball / 2 = box clip.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline void _project_c(double[::1] theta, int proj_kind, double proj_radius,
                            double[::1] proj_a) noexcept nogil:
    cdef Py_ssize_t j, d = theta.shape[0]
    cdef double nrm = 0.0, s
    if proj_kind == 1:
        for j in range(d):
            nrm += theta[j] * theta[j]
        nrm = sqrt(nrm)
        if nrm > proj_radius:
            s = proj_radius / nrm
            for j in range(d):
                theta[j] *= s
    elif proj_kind == 2:
        for j in range(d):
            if theta[j] > proj_a[j]:
                theta[j] = proj_a[j]
            elif theta[j] < -proj_a[j]:
                theta[j] = -proj_a[j]


def run_diag(G, theta0, scale, int proj_kind, double proj_radius, proj_a, ckpts):
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef Py_ssize_t n = Gv.shape[0], d = Gv.shape[1]
    theta_arr = np.array(theta0, dtype=np.float64)
    cdef double[::1] theta = theta_arr
    cdef double[::1] sc = np.ascontiguousarray(scale, dtype=np.float64)
    cdef double[::1] pa = _box_arg(proj_a, d)
    cdef long long[::1] ck = np.ascontiguousarray(ckpts, dtype=np.int64)
    cdef Py_ssize_t m = ck.shape[0]
    dots_arr = np.empty(n)
    sums_arr = np.empty((m, d))
    run_arr = np.zeros(d)
    cdef double[::1] dots = dots_arr
    cdef double[:, ::1] sums = sums_arr
    cdef double[::1] running = run_arr
    cdef Py_ssize_t i, j, k = 0
    cdef double acc
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(d):
                acc += Gv[i, j] * theta[j]
                running[j] += theta[j]
            dots[i] = acc
            if k < m and ck[k] == i + 1:
                for j in range(d):
                    sums[k, j] = running[j]
                k += 1
            for j in range(d):
                theta[j] -= sc[j] * Gv[i, j]
            _project_c(theta, proj_kind, proj_radius, pa)
    return dots_arr, sums_arr, theta_arr


def run_full(G, theta0, M, int proj_kind, double proj_radius, proj_a, ckpts):
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef Py_ssize_t n = Gv.shape[0], d = Gv.shape[1]
    theta_arr = np.array(theta0, dtype=np.float64)
    cdef double[::1] theta = theta_arr
    cdef double[:, ::1] Mv = np.ascontiguousarray(M, dtype=np.float64)
    cdef double[::1] pa = _box_arg(proj_a, d)
    cdef long long[::1] ck = np.ascontiguousarray(ckpts, dtype=np.int64)
    cdef Py_ssize_t m = ck.shape[0]
    dots_arr = np.empty(n)
    sums_arr = np.empty((m, d))
    run_arr = np.zeros(d)
    step_arr = np.empty(d)
    cdef double[::1] dots = dots_arr
    cdef double[:, ::1] sums = sums_arr
    cdef double[::1] running = run_arr
    cdef double[::1] step = step_arr
    cdef Py_ssize_t i, j, l, k = 0
    cdef double acc
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(d):
                acc += Gv[i, j] * theta[j]
                running[j] += theta[j]
            dots[i] = acc
            if k < m and ck[k] == i + 1:
                for j in range(d):
                    sums[k, j] = running[j]
                k += 1
            for j in range(d):
                acc = 0.0
                for l in range(d):
                    acc += Mv[j, l] * Gv[i, l]
                step[j] = acc
            for j in range(d):
                theta[j] -= step[j]
            _project_c(theta, proj_kind, proj_radius, pa)
    return dots_arr, sums_arr, theta_arr


def run_adagrad(G, theta0, double eta, double eps, int proj_kind,
                double proj_radius, proj_a, ckpts):
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef Py_ssize_t n = Gv.shape[0], d = Gv.shape[1]
    theta_arr = np.array(theta0, dtype=np.float64)
    cdef double[::1] theta = theta_arr
    cdef double[::1] pa = _box_arg(proj_a, d)
    cdef long long[::1] ck = np.ascontiguousarray(ckpts, dtype=np.int64)
    cdef Py_ssize_t m = ck.shape[0]
    dots_arr = np.empty(n)
    sums_arr = np.empty((m, d))
    run_arr = np.zeros(d)
    S_arr = np.zeros(d)
    cdef double[::1] dots = dots_arr
    cdef double[:, ::1] sums = sums_arr
    cdef double[::1] running = run_arr
    cdef double[::1] S = S_arr
    cdef Py_ssize_t i, j, k = 0
    cdef double acc, g
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(d):
                acc += Gv[i, j] * theta[j]
                running[j] += theta[j]
            dots[i] = acc
            if k < m and ck[k] == i + 1:
                for j in range(d):
                    sums[k, j] = running[j]
                k += 1
            for j in range(d):
                g = Gv[i, j]
                S[j] += g * g
                theta[j] -= eta * g / (eps + sqrt(S[j]))
            _project_c(theta, proj_kind, proj_radius, pa)
    return dots_arr, sums_arr, theta_arr


def run_pnorm_md(G, theta0, double a, double alpha, ckpts):
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef Py_ssize_t n = Gv.shape[0], d = Gv.shape[1]
    theta_arr = np.array(theta0, dtype=np.float64)
    cdef double[::1] theta = theta_arr
    cdef long long[::1] ck = np.ascontiguousarray(ckpts, dtype=np.int64)
    cdef Py_ssize_t m = ck.shape[0]
    cdef double astar = a / (a - 1.0)
    dots_arr = np.empty(n)
    sums_arr = np.empty((m, d))
    run_arr = np.zeros(d)
    z_arr = np.empty(d)
    cdef double[::1] dots = dots_arr
    cdef double[:, ::1] sums = sums_arr
    cdef double[::1] running = run_arr
    cdef double[::1] z = z_arr
    cdef Py_ssize_t i, j, k = 0
    cdef double acc, u, mx, mag, sgn
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(d):
                acc += Gv[i, j] * theta[j]
                running[j] += theta[j]
            dots[i] = acc
            if k < m and ck[k] == i + 1:
                for j in range(d):
                    sums[k, j] = running[j]
                k += 1
            # dual step: z = grad_h(theta) - alpha g
            mx = 0.0
            for j in range(d):
                if fabs(theta[j]) > mx:
                    mx = fabs(theta[j])
            if mx == 0.0:
                for j in range(d):
                    z[j] = -alpha * Gv[i, j]
            else:
                acc = 0.0
                for j in range(d):
                    acc += pow(fabs(theta[j]), a)
                u = pow(acc, 1.0 / a)
                for j in range(d):
                    mag = fabs(theta[j])
                    sgn = 1.0 if theta[j] > 0.0 else (-1.0 if theta[j] < 0.0 else 0.0)
                    z[j] = sgn * pow(mag, a - 1.0) * pow(u, 2.0 - a) / (a - 1.0)
                    z[j] -= alpha * Gv[i, j]
            # primal step: theta = grad_h_star(z)
            mx = 0.0
            for j in range(d):
                if fabs(z[j]) > mx:
                    mx = fabs(z[j])
            if mx == 0.0:
                for j in range(d):
                    theta[j] = 0.0
            else:
                acc = 0.0
                for j in range(d):
                    acc += pow(fabs(z[j]), astar)
                u = pow(acc, 1.0 / astar)
                for j in range(d):
                    mag = fabs(z[j])
                    sgn = 1.0 if z[j] > 0.0 else (-1.0 if z[j] < 0.0 else 0.0)
                    theta[j] = (a - 1.0) * sgn * pow(mag, astar - 1.0) * pow(u, 2.0 - astar)
    return dots_arr, sums_arr, theta_arr


def _box_arg(proj_a, Py_ssize_t d):
    if proj_a is None:
        return np.zeros(d)
    return np.ascontiguousarray(proj_a, dtype=np.float64)
