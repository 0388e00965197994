"""Pure-Python streaming estimator (fallback for the compiled ``_kernels``).

Scalar arithmetic only.  The expression order matches ``_kernels.pyx`` so
both backends produce identical floating-point results.  The covariance is
handled through its upper triangle; the sparsity of the transition Jacobian
and of the measurement matrix is used to avoid dense 4x4 products.
"""

import math

import numpy as np

BACKEND = "python"

_COND_LIMIT = 1e12
_UPPER = ((0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))


class DegenerateInnovation(ArithmeticError):
    pass


def _cond2(a, b, d):
    mean = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), b)
    hi = abs(mean + radius)
    lo = abs(mean - radius)
    if lo == 0.0:
        return math.inf
    if hi < lo:
        hi, lo = lo, hi
    return hi / lo


def _upper(flat):
    flat = [float(v) for v in flat]
    if len(flat) != 16:
        raise ValueError("expected 16 entries")
    return [flat[4 * i + j] for i, j in _UPPER]


class GaitKernel:
    """EKF step plus gated radius smoothing on one sample at a time.

    Parameters mirror :class:`~yoyogait.sinusoid_ekf.EkfConfig` and
    :class:`~yoyogait.param_extraction.ParamFilterConfig`; ``Q``, ``P0`` are
    flat row-major 16-sequences and ``V`` a flat 4-sequence, all symmetric.
    """

    def __init__(self, x0, P0, Q, V, n, mu_omega, mu_a0, R0, r0, abs_gate=False):
        self.x = [float(v) for v in x0]
        V = [float(v) for v in V]
        if len(self.x) != 4 or len(V) != 4:
            raise ValueError("expected 4 state and 4 V entries")
        self.P = _upper(P0)
        self.Q = tuple(_upper(Q))
        self.V = (V[0], V[1], V[3])
        self.n = int(n)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        self.mu_omega = float(mu_omega)
        self.mu_a0 = float(mu_a0)
        self.abs_gate = bool(abs_gate)
        self.R_hat = float(R0)
        self.r_hat = float(r0)
        self.hist_R = [float(R0)] * self.n
        self.hist_r = [float(r0)] * self.n
        self.head = 0
        self.k = 0
        self.gate = 0
        self.nu = (0.0, 0.0)

    @property
    def state(self):
        return tuple(self.x)

    @property
    def cov(self):
        out = np.empty((4, 4))
        for value, (i, j) in zip(self.P, _UPPER):
            out[i, j] = out[j, i] = value
        return out

    @property
    def innovation(self):
        return self.nu

    def push(self, zx, zz):
        """Consume one scaled measurement; returns 1 if the radii were updated."""
        x1, x2, x3, x4 = self.x
        p00, p01, p02, p03, p11, p12, p13, p22, p23, p33 = self.P
        q00, q01, q02, q03, q11, q12, q13, q22, q23, q33 = self.Q
        v00, v01, v11 = self.V
        cos = math.cos
        sin = math.sin

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

        self.x = [x1, x2, x3, x4]
        self.P = [n00, n01, n02, n03, n11, n12, n13, n22, n23, n33]
        self.nu = (nu0, nu1)

        # gated radius smoothing
        self.k += 1
        g3 = x3
        g4 = x4
        if self.abs_gate:
            g3 = abs(g3)
            g4 = abs(g4)
        if self.k > self.n and g3 > self.mu_omega and g4 > self.mu_a0:
            n = self.n
            head = self.head
            hist_R = self.hist_R
            hist_r = self.hist_r
            total_R = 0.0
            total_r = 0.0
            for m in range(head, n):
                total_R += hist_R[m]
                total_r += hist_r[m]
            for m in range(head):
                total_R += hist_R[m]
                total_r += hist_r[m]
            R_new = (total_R + g4 / g3) / (n + 1)
            r_new = (total_r + math.sqrt(x1 * x1 + x2 * x2) / g3) / (n + 1)
            hist_R[head] = R_new
            hist_r[head] = r_new
            self.head = (head + 1) % n
            self.R_hat = R_new
            self.r_hat = r_new
            self.gate = 1
        else:
            self.gate = 0
        return self.gate

    def run(self, z):
        """Push an ``(N, 2)`` array of scaled measurements.

        Returns an ``(N, 9)`` array with columns
        ``x1, x2, x3, x4, R_hat, r_hat, gate, nu_x, nu_z``.
        """
        z = np.asarray(z, dtype=float)
        rows = []
        push = self.push
        for zx, zz in z.tolist():
            gate = push(zx, zz)
            x = self.x
            rows.append((x[0], x[1], x[2], x[3], self.R_hat, self.r_hat, gate, self.nu[0], self.nu[1]))
        return np.array(rows, dtype=float).reshape(-1, 9)
