# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled R-chi-R fixed-point kernel; mirrors ``_mle_numpy.iterate``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log

cnp.import_array()

ctypedef double complex cplx


cdef double _probs_loglik(cplx[:, :, ::1] effects, double[::1] counts,
                          cplx[:, ::1] chi, double p_floor, double[::1] p) nogil:
    cdef Py_ssize_t m, i, j, nm = effects.shape[0], d = effects.shape[1]
    cdef double ll = 0.0
    cdef cplx acc
    for m in range(nm):
        acc = 0
        for i in range(d):
            for j in range(d):
                acc = acc + chi[i, j] * effects[m, j, i]
        p[m] = acc.real if acc.real > p_floor else p_floor
        ll += counts[m] * log(p[m])
    return ll


cdef void _build_r(cplx[:, :, ::1] effects, double[::1] counts,
                   double[::1] p, cplx[:, ::1] r) nogil:
    cdef Py_ssize_t m, i, j, nm = effects.shape[0], d = effects.shape[1]
    cdef double w
    for i in range(d):
        for j in range(d):
            r[i, j] = 0
    for m in range(nm):
        w = counts[m] / p[m]
        for i in range(d):
            for j in range(d):
                r[i, j] = r[i, j] + w * effects[m, i, j]


cdef void _matmul(cplx[:, ::1] a, cplx[:, ::1] b, cplx[:, ::1] out) nogil:
    cdef Py_ssize_t i, j, k, d = a.shape[0]
    cdef cplx acc
    for i in range(d):
        for j in range(d):
            acc = 0
            for k in range(d):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


cdef double _normalize_herm(cplx[:, ::1] m) nogil:
    """In place: m <- herm(m) / Re tr(m); returns the trace used."""
    cdef Py_ssize_t i, j, d = m.shape[0]
    cdef double tr = 0.0
    cdef cplx h
    for i in range(d):
        tr += m[i, i].real
    for i in range(d):
        for j in range(i, d):
            h = 0.5 * (m[i, j] + m[j, i].conjugate())
            m[i, j] = h / tr
            m[j, i] = h.conjugate() / tr
    return tr


def iterate(effects, counts, chi0, int max_iter=100_000, double tol=1e-10,
            double epsilon=0.1, double p_floor=1e-12, bint track_likelihood=False):
    """Run the fixed-point iteration; returns (chi, iterations, loglik, converged, history)."""
    cdef cplx[:, :, ::1] e = np.ascontiguousarray(effects, dtype=complex)
    cdef double[::1] n = np.ascontiguousarray(counts, dtype=float)
    chi_arr = np.array(chi0, dtype=complex, order="C")
    cdef cplx[:, ::1] chi = chi_arr
    cdef Py_ssize_t d = chi.shape[0]

    cand_arr = np.empty((d, d), dtype=complex)
    r_arr = np.empty((d, d), dtype=complex)
    tmp_arr = np.empty((d, d), dtype=complex)
    p_arr = np.empty(e.shape[0], dtype=float)
    p_new_arr = np.empty(e.shape[0], dtype=float)
    cdef cplx[:, ::1] cand = cand_arr
    cdef cplx[:, ::1] r = r_arr
    cdef cplx[:, ::1] tmp = tmp_arr
    cdef double[::1] p = p_arr
    cdef double[::1] p_new = p_new_arr

    history = [] if track_likelihood else None

    cdef double ll, ll_new, slack, eps, delta, dv
    cdef bint converged = False, accepted
    cdef int it = 0, attempt
    cdef Py_ssize_t i, j

    ll = _probs_loglik(e, n, chi, p_floor, p)
    if history is not None:
        history.append(ll)

    for it in range(1, max_iter + 1):
        _build_r(e, n, p, r)
        _matmul(r, chi, tmp)
        _matmul(tmp, r, cand)
        _normalize_herm(cand)
        ll_new = _probs_loglik(e, n, cand, p_floor, p_new)
        slack = 1e-12 * (fabs(ll) if fabs(ll) > 1.0 else 1.0)
        if ll_new < ll - slack:
            eps = epsilon
            accepted = False
            for attempt in range(7):
                for i in range(d):
                    for j in range(d):
                        tmp[i, j] = (1.0 - eps) * chi[i, j] + eps * cand[i, j]
                for i in range(d):
                    for j in range(d):
                        cand[i, j] = 0.5 * (tmp[i, j] + tmp[j, i].conjugate())
                ll_new = _probs_loglik(e, n, cand, p_floor, p_new)
                if ll_new >= ll - slack:
                    accepted = True
                    break
                eps *= 0.1
            if not accepted:
                converged = True
                break
        delta = 0.0
        for i in range(d):
            for j in range(d):
                dv = abs(cand[i, j] - chi[i, j])
                if dv > delta:
                    delta = dv
                chi[i, j] = cand[i, j]
        for i in range(e.shape[0]):
            p[i] = p_new[i]
        ll = ll_new
        if history is not None:
            history.append(ll)
        if delta < tol:
            converged = True
            break

    return chi_arr, it, ll, converged, history
