# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; see ``_fallback.py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log1p, fabs, ceil
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _key(uint64_t seed, uint64_t rep) nogil:
    return _mix64(seed ^ _mix64(rep + 1))


cdef inline double _uniform(uint64_t key, uint64_t j) nogil:
    return (_mix64(key + j * GOLDEN) >> 11) * TWO_M53


def mix64(z):
    return int(_mix64(<uint64_t>(int(z) & 0xFFFFFFFFFFFFFFFF)))


def stream_key(seed, rep):
    return int(_key(<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF), <uint64_t>rep))


def uniforms(seed, rep, Py_ssize_t count):
    cdef uint64_t key = _key(<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF), <uint64_t>rep)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count)
    cdef Py_ssize_t j
    for j in range(count):
        out[j] = _uniform(key, j + 1)
    return out


# ------------------------------------------------------------ eigenvalues

cdef inline Py_ssize_t _count(const double* d, const double* e2, Py_ssize_t n, double x) nogil:
    cdef double q = d[0] - x
    cdef Py_ssize_t c = 0
    cdef Py_ssize_t i
    if fabs(q) < 1e-300:
        q = -1e-300
    if q < 0:
        c = 1
    for i in range(1, n):
        q = d[i] - x - e2[i - 1] / q
        if fabs(q) < 1e-300:
            q = -1e-300
        if q < 0:
            c += 1
    return c


cdef double _bisect(const double* d, const double* e2, Py_ssize_t n, Py_ssize_t k,
                    double lo, double hi, double tol) nogil:
    cdef double mid
    while hi - lo > tol + 4e-16 * (fabs(lo) if fabs(lo) > fabs(hi) else fabs(hi)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _count(d, e2, n, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def sturm_count(const double[::1] diag, const double[::1] offsq, double x):
    cdef double dummy = 0.0
    return _count(&diag[0], &offsq[0] if offsq.shape[0] else &dummy, diag.shape[0], x)


def tridiag_eigval(const double[::1] diag, const double[::1] offsq, Py_ssize_t k, double lo,
                   double hi, double tol):
    cdef double dummy = 0.0
    cdef const double* e2 = &offsq[0] if offsq.shape[0] else &dummy
    cdef double r
    with nogil:
        r = _bisect(&diag[0], e2, diag.shape[0], k, lo, hi, tol)
    return r


def tridiag_eigvals(const double[::1] diag, const double[::1] offsq, double lo, double hi, double tol):
    cdef Py_ssize_t n = diag.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] ov = out
    cdef double dummy = 0.0
    cdef const double* e2 = &offsq[0] if offsq.shape[0] else &dummy
    cdef Py_ssize_t k
    cdef double a = lo
    with nogil:
        for k in range(n):
            # eigenvalue k is not below eigenvalue k-1
            ov[k] = _bisect(&diag[0], e2, n, k, a, hi, tol)
            a = ov[k] - 2.0 * tol - 1e-15 * fabs(ov[k]) if k + 1 < n else a
    return out


# --------------------------------------------------------- linear systems

def shifted_solve(thetas, const double[::1] sub, const double[::1] diag, const double[::1] sup, rhs):
    cdef complex[::1] th = np.ascontiguousarray(thetas, dtype=complex)
    cdef double[::1] r = np.ascontiguousarray(rhs, dtype=float)
    cdef Py_ssize_t B = th.shape[0], K = diag.shape[0]
    x_arr = np.zeros((B, K), dtype=complex)
    piv_arr = np.empty(B)
    cdef complex[:, ::1] x = x_arr
    cdef double[::1] piv = piv_arr
    cdef complex* cp = <complex*>malloc(K * sizeof(complex))
    cdef complex* dp = <complex*>malloc(K * sizeof(complex))
    cdef Py_ssize_t b, i
    cdef complex bi, ri
    cdef double scale, m, mag
    try:
        with nogil:
            for b in range(B):
                m = 1e300
                for i in range(K):
                    bi = th[b] - diag[i]
                    scale = abs(bi)
                    if i > 0:
                        scale += fabs(sub[i - 1])
                        bi = bi + sub[i - 1] * cp[i - 1]
                        ri = r[i] + sub[i - 1] * dp[i - 1]
                    else:
                        ri = r[0]
                    if i < K - 1:
                        scale += fabs(sup[i])
                    mag = abs(bi)
                    if mag / scale < m:
                        m = mag / scale
                    if mag == 0:
                        bi = 1.0
                    if i < K - 1:
                        cp[i] = -sup[i] / bi
                    dp[i] = ri / bi
                piv[b] = m
                x[b, K - 1] = dp[K - 1]
                for i in range(K - 2, -1, -1):
                    x[b, i] = dp[i] - cp[i] * x[b, i + 1]
    finally:
        free(cp)
        free(dp)
    return x_arr, piv_arr


# ------------------------------------------------------------- ODE stepping

cdef inline void _f(const double* sub, const double* diag, const double* sup, Py_ssize_t K,
                    const double* y, double* out) nogil:
    cdef Py_ssize_t i
    for i in range(K):
        out[i] = diag[i] * y[i]
    for i in range(1, K):
        out[i] += sub[i - 1] * y[i - 1]
    for i in range(K - 1):
        out[i] += sup[i] * y[i + 1]


def rk4_tridiag(const double[::1] sub, const double[::1] diag, const double[::1] sup, y0, t_grid, double hmax):
    cdef double[::1] tg = np.ascontiguousarray(t_grid, dtype=float)
    cdef Py_ssize_t K = diag.shape[0], T = tg.shape[0]
    out_arr = np.empty((T, K))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] yv = np.array(y0, dtype=float)
    cdef double dummy = 0.0
    cdef const double* ps = &sub[0] if K > 1 else &dummy
    cdef const double* pu = &sup[0] if K > 1 else &dummy
    cdef double* buf = <double*>malloc(6 * K * sizeof(double))
    cdef double* y = buf
    cdef double* k1 = buf + K
    cdef double* k2 = buf + 2 * K
    cdef double* k3 = buf + 3 * K
    cdef double* k4 = buf + 4 * K
    cdef double* tmp = buf + 5 * K
    cdef Py_ssize_t i, j, s, nsub
    cdef double span, h
    try:
        with nogil:
            for i in range(K):
                y[i] = yv[i]
                out[0, i] = y[i]
            for j in range(1, T):
                span = tg[j] - tg[j - 1]
                nsub = <Py_ssize_t>ceil(span / hmax)
                if nsub < 1:
                    nsub = 1
                h = span / nsub
                for s in range(nsub):
                    _f(ps, &diag[0], pu, K, y, k1)
                    for i in range(K):
                        tmp[i] = y[i] + 0.5 * h * k1[i]
                    _f(ps, &diag[0], pu, K, tmp, k2)
                    for i in range(K):
                        tmp[i] = y[i] + 0.5 * h * k2[i]
                    _f(ps, &diag[0], pu, K, tmp, k3)
                    for i in range(K):
                        tmp[i] = y[i] + h * k3[i]
                    _f(ps, &diag[0], pu, K, tmp, k4)
                    for i in range(K):
                        y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                for i in range(K):
                    out[j, i] = y[i]
    finally:
        free(buf)
    return out_arr


# --------------------------------------------------------------- simulators

def simulate_conditional(double rho, Py_ssize_t K, Py_ssize_t n, Py_ssize_t start,
                         Py_ssize_t stop, seed):
    cdef uint64_t sd = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.empty(stop - start)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t r, m
    cdef uint64_t key, j
    cdef double t, a_rate, total, u, v
    with nogil:
        for r in range(start, stop):
            key = _key(sd, <uint64_t>r)
            j = 0
            m = n + 1
            t = 0.0
            while True:
                a_rate = rho if m < K else 0.0
                total = 1.0 + a_rate
                j += 1
                u = _uniform(key, j)
                t += -log1p(-u) / total
                j += 1
                v = _uniform(key, j) * total
                if v < a_rate:
                    m += 1
                elif <Py_ssize_t>((v - a_rate) * m) == 0:
                    break
                else:
                    m -= 1
            out[r - start] = t
    return out_arr


def simulate_stationary(double rho, Py_ssize_t K, Py_ssize_t count, seed, double burn_in):
    cdef uint64_t key = _key(<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF), 0)
    samples_arr = np.empty(count)
    seen_arr = np.empty(count, dtype=np.int64)
    cdef double[::1] samples = samples_arr
    cdef int64_t[::1] seen = seen_arr
    cdef double* arrived = <double*>malloc(K * sizeof(double))
    cdef int64_t* tag = <int64_t*>malloc(K * sizeof(int64_t))
    cdef Py_ssize_t m = 0, i
    cdef int64_t tagged = 0, outstanding = 0, blocked = 0
    cdef uint64_t j = 0
    cdef double t = 0.0, total, u, v
    cdef bint tagging
    try:
        with nogil:
            while tagged < count or outstanding > 0:
                total = rho + (1.0 if m > 0 else 0.0)
                j += 1
                u = _uniform(key, j)
                t += -log1p(-u) / total
                j += 1
                v = _uniform(key, j) * total
                if v < rho:
                    tagging = t >= burn_in and tagged < count
                    if m == K:
                        if tagging:
                            blocked += 1
                        continue
                    arrived[m] = t
                    if tagging:
                        tag[m] = tagged
                        seen[tagged] = m
                        tagged += 1
                        outstanding += 1
                    else:
                        tag[m] = -1
                    m += 1
                else:
                    i = <Py_ssize_t>((v - rho) * m)
                    if i >= m:  # guard rounding at v -> total
                        i = m - 1
                    if tag[i] >= 0:
                        samples[tag[i]] = t - arrived[i]
                        outstanding -= 1
                    arrived[i] = arrived[m - 1]
                    tag[i] = tag[m - 1]
                    m -= 1
    finally:
        free(arrived)
        free(tag)
    return samples_arr, seen_arr, int(blocked)
