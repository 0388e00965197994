# cython: language_level=3
"""Compiled streaming estimator.

Line-for-line port of ``_pykernels.GaitKernel``; keep the two in sync.
"""

from libc.math cimport cos, sin, sqrt, hypot, fabs, INFINITY

import numpy as np

BACKEND = "compiled"

cdef double _COND_LIMIT = 1e12
_UPPER = ((0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))


class DegenerateInnovation(ArithmeticError):
    pass


cdef inline double _cond2(double a, double b, double d) noexcept nogil:
    cdef double mean = 0.5 * (a + d)
    cdef double radius = hypot(0.5 * (a - d), b)
    cdef double hi = fabs(mean + radius)
    cdef double lo = fabs(mean - radius)
    cdef double tmp
    if lo == 0.0:
        return INFINITY
    if hi < lo:
        tmp = hi
        hi = lo
        lo = tmp
    return hi / lo


def _upper(flat):
    flat = [float(v) for v in flat]
    if len(flat) != 16:
        raise ValueError("expected 16 entries")
    return [flat[4 * i + j] for i, j in _UPPER]


cdef class GaitKernel:
    """EKF step plus gated radius smoothing on one sample at a time."""

    cdef double x[4]
    cdef double P[10]
    cdef double Q[10]
    cdef double V[3]
    cdef double nu[2]
    cdef double[::1] hist_R
    cdef double[::1] hist_r
    cdef public int n
    cdef public double mu_omega
    cdef public double mu_a0
    cdef public bint abs_gate
    cdef public double R_hat
    cdef public double r_hat
    cdef public long long k
    cdef public int gate
    cdef int head

    def __init__(self, x0, P0, Q, V, n, mu_omega, mu_a0, R0, r0, abs_gate=False):
        cdef int i
        x0 = [float(v) for v in x0]
        V = [float(v) for v in V]
        if len(x0) != 4 or len(V) != 4:
            raise ValueError("expected 4 state and 4 V entries")
        P0 = _upper(P0)
        Q = _upper(Q)
        for i in range(4):
            self.x[i] = x0[i]
        self.V[0] = V[0]
        self.V[1] = V[1]
        self.V[2] = V[3]
        for i in range(10):
            self.P[i] = P0[i]
            self.Q[i] = Q[i]
        self.n = int(n)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        self.mu_omega = mu_omega
        self.mu_a0 = mu_a0
        self.abs_gate = bool(abs_gate)
        self.R_hat = R0
        self.r_hat = r0
        self.hist_R = np.full(self.n, float(R0))
        self.hist_r = np.full(self.n, float(r0))
        self.head = 0
        self.k = 0
        self.gate = 0
        self.nu[0] = 0.0
        self.nu[1] = 0.0

    @property
    def state(self):
        return (self.x[0], self.x[1], self.x[2], self.x[3])

    @property
    def cov(self):
        out = np.empty((4, 4))
        for m, (i, j) in enumerate(_UPPER):
            out[i, j] = out[j, i] = self.P[m]
        return out

    @property
    def innovation(self):
        return (self.nu[0], self.nu[1])

    cdef int _push(self, double zx, double zz) except -1:
        cdef double x1 = self.x[0]
        cdef double x2 = self.x[1]
        cdef double x3 = self.x[2]
        cdef double x4 = self.x[3]
        cdef double p00 = self.P[0], p01 = self.P[1], p02 = self.P[2], p03 = self.P[3]
        cdef double p11 = self.P[4], p12 = self.P[5], p13 = self.P[6]
        cdef double p22 = self.P[7], p23 = self.P[8], p33 = self.P[9]
        cdef double q00 = self.Q[0], q01 = self.Q[1], q02 = self.Q[2], q03 = self.Q[3]
        cdef double q11 = self.Q[4], q12 = self.Q[5], q13 = self.Q[6]
        cdef double q22 = self.Q[7], q23 = self.Q[8], q33 = self.Q[9]
        cdef double v00 = self.V[0], v01 = self.V[1], v11 = self.V[2]
        cdef double g3, g4, total_R, total_r, R_new, r_new
        cdef int m, n, head
        cdef double a, b, b00, b01, b02, b03, b10, b11, b12, b13, b20, b21, b22, b23, b30, b31, b33, c, det, g00, g01, g02, g03, g10, g11, g12, g13, ha0, ha1, ha2, ha3, i00, i01, i11, k00, k01, k02, k03, k10, k11, k12, k13, kv00, kv01, kv02, kv03, kv10, kv11, kv12, kv13, m00, m01, m02, m03, m11, m12, m13, m22, m23, m33, n00, n01, n02, n03, n11, n12, n13, n22, n23, n33, nu0, nu1, s, s00, s01, s11, u0, u1, u2, u3, w0, w1, w2, w3

        # predict: M = F P F^T + Q (upper triangle)
        c = cos(x3)
        s = sin(x3)
        a = -x1 * s - x2 * c
        b = x1 * c - x2 * s
        u0 = c * p00 - s * p01 + a * p02
        u1 = c * p01 - s * p11 + a * p12
        u2 = c * p02 - s * p12 + a * p22
        u3 = c * p03 - s * p13 + a * p23
        w0 = s * p00 + c * p01 + b * p02
        w1 = s * p01 + c * p11 + b * p12
        w2 = s * p02 + c * p12 + b * p22
        w3 = s * p03 + c * p13 + b * p23
        m00 = c * u0 - s * u1 + a * u2 + q00
        m01 = s * u0 + c * u1 + b * u2 + q01
        m02 = u2 + q02
        m03 = u3 + q03
        m11 = s * w0 + c * w1 + b * w2 + q11
        m12 = w2 + q12
        m13 = w3 + q13
        m22 = p22 + q22
        m23 = p23 + q23
        m33 = p33 + q33
        x2 = x1 * s + x2 * c
        x1 = b

        # update, H = [[1, 0, 0, 1], [0, -1, 0, 0]]
        nu0 = zx - (x1 + x4)
        nu1 = zz + x2
        # G = H M, rows g0 and g1
        g00 = m00 + m03
        g01 = m01 + m13
        g02 = m02 + m23
        g03 = m03 + m33
        g10 = -m01
        g11 = -m11
        g12 = -m12
        g13 = -m13
        s00 = g00 + g03 + v00
        s01 = g10 + g13 + v01
        s11 = m11 + v11
        if not _cond2(s00, s01, s11) <= _COND_LIMIT:
            raise DegenerateInnovation("innovation covariance is numerically singular")
        det = s00 * s11 - s01 * s01
        i00 = s11 / det
        i01 = -s01 / det
        i11 = s00 / det
        k00 = g00 * i00 + g10 * i01
        k01 = g01 * i00 + g11 * i01
        k02 = g02 * i00 + g12 * i01
        k03 = g03 * i00 + g13 * i01
        k10 = g00 * i01 + g10 * i11
        k11 = g01 * i01 + g11 * i11
        k12 = g02 * i01 + g12 * i11
        k13 = g03 * i01 + g13 * i11
        x1 = x1 + (k00 * nu0 + k10 * nu1)
        x2 = x2 + (k01 * nu0 + k11 * nu1)
        x3 = x3 + (k02 * nu0 + k12 * nu1)
        x4 = x4 + (k03 * nu0 + k13 * nu1)

        # Joseph form (I - K H) M (I - K H)^T + K V K^T, expanded through H
        # B = (I - K H) M
        b00 = m00 - k00 * g00 - k10 * g10
        b01 = m01 - k00 * g01 - k10 * g11
        b02 = m02 - k00 * g02 - k10 * g12
        b03 = m03 - k00 * g03 - k10 * g13
        b10 = m01 - k01 * g00 - k11 * g10
        b11 = m11 - k01 * g01 - k11 * g11
        b12 = m12 - k01 * g02 - k11 * g12
        b13 = m13 - k01 * g03 - k11 * g13
        b22 = m22 - k02 * g02 - k12 * g12
        b23 = m23 - k02 * g03 - k12 * g13
        b33 = m33 - k03 * g03 - k13 * g13
        b20 = m02 - k02 * g00 - k12 * g10
        b21 = m12 - k02 * g01 - k12 * g11
        b30 = m03 - k03 * g00 - k13 * g10
        b31 = m13 - k03 * g01 - k13 * g11
        ha0 = b00 + b03
        ha1 = b10 + b13
        ha2 = b20 + b23
        ha3 = b30 + b33
        kv00 = k00 * v00 + k10 * v01
        kv01 = k01 * v00 + k11 * v01
        kv02 = k02 * v00 + k12 * v01
        kv03 = k03 * v00 + k13 * v01
        kv10 = k00 * v01 + k10 * v11
        kv11 = k01 * v01 + k11 * v11
        kv12 = k02 * v01 + k12 * v11
        kv13 = k03 * v01 + k13 * v11
        n00 = b00 - k00 * ha0 + k10 * b01 + (kv00 * k00 + kv10 * k10)
        n01 = b01 - k01 * ha0 + k11 * b01 + (kv00 * k01 + kv10 * k11)
        n02 = b02 - k02 * ha0 + k12 * b01 + (kv00 * k02 + kv10 * k12)
        n03 = b03 - k03 * ha0 + k13 * b01 + (kv00 * k03 + kv10 * k13)
        n11 = b11 - k01 * ha1 + k11 * b11 + (kv01 * k01 + kv11 * k11)
        n12 = b12 - k02 * ha1 + k12 * b11 + (kv01 * k02 + kv11 * k12)
        n13 = b13 - k03 * ha1 + k13 * b11 + (kv01 * k03 + kv11 * k13)
        n22 = b22 - k02 * ha2 + k12 * b21 + (kv02 * k02 + kv12 * k12)
        n23 = b23 - k03 * ha2 + k13 * b21 + (kv02 * k03 + kv12 * k13)
        n33 = b33 - k03 * ha3 + k13 * b31 + (kv03 * k03 + kv13 * k13)

        self.x[0] = x1
        self.x[1] = x2
        self.x[2] = x3
        self.x[3] = x4
        self.P[0] = n00
        self.P[1] = n01
        self.P[2] = n02
        self.P[3] = n03
        self.P[4] = n11
        self.P[5] = n12
        self.P[6] = n13
        self.P[7] = n22
        self.P[8] = n23
        self.P[9] = n33
        self.nu[0] = nu0
        self.nu[1] = nu1

        # gated radius smoothing
        self.k += 1
        g3 = x3
        g4 = x4
        if self.abs_gate:
            g3 = fabs(g3)
            g4 = fabs(g4)
        if self.k > self.n and g3 > self.mu_omega and g4 > self.mu_a0:
            n = self.n
            head = self.head
            total_R = 0.0
            total_r = 0.0
            for m in range(head, n):
                total_R += self.hist_R[m]
                total_r += self.hist_r[m]
            for m in range(head):
                total_R += self.hist_R[m]
                total_r += self.hist_r[m]
            R_new = (total_R + g4 / g3) / (n + 1)
            r_new = (total_r + sqrt(x1 * x1 + x2 * x2) / g3) / (n + 1)
            self.hist_R[head] = R_new
            self.hist_r[head] = r_new
            self.head = (head + 1) % n
            self.R_hat = R_new
            self.r_hat = r_new
            self.gate = 1
        else:
            self.gate = 0
        return self.gate

    def push(self, double zx, double zz):
        """Consume one scaled measurement; returns 1 if the radii were updated."""
        return self._push(zx, zz)

    def run(self, z):
        """Push an ``(N, 2)`` array of scaled measurements.

        Returns an ``(N, 9)`` array with columns
        ``x1, x2, x3, x4, R_hat, r_hat, gate, nu_x, nu_z``.
        """
        cdef double[:, ::1] zv = np.ascontiguousarray(z, dtype=np.float64).reshape(-1, 2)
        cdef Py_ssize_t N = zv.shape[0]
        out = np.empty((N, 9))
        cdef double[:, ::1] ov = out
        cdef Py_ssize_t row
        cdef int gate
        for row in range(N):
            gate = self._push(zv[row, 0], zv[row, 1])
            ov[row, 0] = self.x[0]
            ov[row, 1] = self.x[1]
            ov[row, 2] = self.x[2]
            ov[row, 3] = self.x[3]
            ov[row, 4] = self.R_hat
            ov[row, 5] = self.r_hat
            ov[row, 6] = gate
            ov[row, 7] = self.nu[0]
            ov[row, 8] = self.nu[1]
        return out
