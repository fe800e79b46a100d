"""Compiled inner loops for the collision quadrature.

Fields enter transposed, shape (n_v, batch), so that every stencil corner
reads a contiguous row across the batch of (time, x) slices.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _frame(k0, k1, k2):
    if abs(k0) > 0.9:
        a0, a1, a2 = 0.0, 1.0, 0.0
    else:
        a0, a1, a2 = 1.0, 0.0, 0.0
    dot = a0 * k0 + a1 * k1 + a2 * k2
    e0, e1, e2 = a0 - dot * k0, a1 - dot * k1, a2 - dot * k2
    nrm = np.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
    e0 /= nrm
    e1 /= nrm
    e2 /= nrm
    f0 = k1 * e2 - k2 * e1
    f1 = k2 * e0 - k0 * e2
    f2 = k0 * e1 - k1 * e0
    return e0, e1, e2, f0, f1, f2


@njit(cache=True)
def _stencil(w0, w1, w2, v_max, h, n, idx, wts):
    """Trilinear corners of point w; returns False outside the box."""
    if abs(w0) > v_max or abs(w1) > v_max or abs(w2) > v_max:
        return False
    top = n - 1.0
    q0 = min(max((w0 + v_max) / h - 0.5, 0.0), top)
    q1 = min(max((w1 + v_max) / h - 0.5, 0.0), top)
    q2 = min(max((w2 + v_max) / h - 0.5, 0.0), top)
    i0 = min(int(np.floor(q0)), n - 2)
    i1 = min(int(np.floor(q1)), n - 2)
    i2 = min(int(np.floor(q2)), n - 2)
    f0 = q0 - i0
    f1 = q1 - i1
    f2 = q2 - i2
    q = 0
    for c0 in range(2):
        a0 = f0 if c0 else 1.0 - f0
        for c1 in range(2):
            a1 = f1 if c1 else 1.0 - f1
            for c2 in range(2):
                a2 = f2 if c2 else 1.0 - f2
                idx[q] = ((i0 + c0) * n + (i1 + c1)) * n + (i2 + c2)
                wts[q] = a0 * a1 * a2
                q += 1
    return True


@njit(cache=True)
def _phi(r, gamma, r_floor):
    if gamma < 0.0:
        return max(r, r_floor) ** gamma
    if gamma == 0.0:
        return 1.0
    return r ** gamma


@njit(cache=True)
def _accumulate_gain(out_i, m_j, coef, G, H, ia, wa, ib, wb):
    # rows hoisted into locals so the batch loop vectorizes
    g0 = G[ia[0]]; g1 = G[ia[1]]; g2 = G[ia[2]]; g3 = G[ia[3]]  # noqa: E702
    g4 = G[ia[4]]; g5 = G[ia[5]]; g6 = G[ia[6]]; g7 = G[ia[7]]  # noqa: E702
    h0 = H[ib[0]]; h1 = H[ib[1]]; h2 = H[ib[2]]; h3 = H[ib[3]]  # noqa: E702
    h4 = H[ib[4]]; h5 = H[ib[5]]; h6 = H[ib[6]]; h7 = H[ib[7]]  # noqa: E702
    a0, a1, a2, a3 = wa[0], wa[1], wa[2], wa[3]
    a4, a5, a6, a7 = wa[4], wa[5], wa[6], wa[7]
    b0, b1, b2, b3 = wb[0], wb[1], wb[2], wb[3]
    b4, b5, b6, b7 = wb[4], wb[5], wb[6], wb[7]
    for bb in range(out_i.shape[0]):
        ga = (a0 * g0[bb] + a1 * g1[bb] + a2 * g2[bb] + a3 * g3[bb]
              + a4 * g4[bb] + a5 * g5[bb] + a6 * g6[bb] + a7 * g7[bb])
        hv = (b0 * h0[bb] + b1 * h1[bb] + b2 * h2[bb] + b3 * h3[bb]
              + b4 * h4[bb] + b5 * h5[bb] + b6 * h6[bb] + b7 * h7[bb])
        out_i[bb] += coef * m_j[bb] * ga * hv


@njit(cache=True)
def gain_batch(points, v_max, h, n, gamma, r_floor, bw, cth, sth, cph, sph,
               G, H, Mw, out):
    """out[i, b] += sum_j sum_m h^3 Phi bw_m Mw[j, b] G(v'_*)[b] H(v')[b]."""
    nv = points.shape[0]
    nm = bw.shape[0]
    vol = h * h * h
    ia = np.empty(8, np.int64)
    wa = np.empty(8)
    ib = np.empty(8, np.int64)
    wb = np.empty(8)
    for i in range(nv):
        v0, v1, v2 = points[i, 0], points[i, 1], points[i, 2]
        out_i = out[i]
        for j in range(nv):
            if j == i:
                continue
            u0, u1, u2 = points[j, 0], points[j, 1], points[j, 2]
            d0, d1, d2 = v0 - u0, v1 - u1, v2 - u2
            r = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
            k0, k1, k2 = d0 / r, d1 / r, d2 / r
            e0, e1, e2, f0, f1, f2 = _frame(k0, k1, k2)
            c0, c1, c2 = 0.5 * (v0 + u0), 0.5 * (v1 + u1), 0.5 * (v2 + u2)
            half = 0.5 * r
            pref = vol * _phi(r, gamma, r_floor)
            m_j = Mw[j]
            for m in range(nm):
                a = sth[m] * cph[m]
                b_ = sth[m] * sph[m]
                s0 = a * e0 + b_ * f0 + cth[m] * k0
                s1 = a * e1 + b_ * f1 + cth[m] * k1
                s2 = a * e2 + b_ * f2 + cth[m] * k2
                if not _stencil(c0 - half * s0, c1 - half * s1, c2 - half * s2,
                                v_max, h, n, ia, wa):
                    continue
                if not _stencil(c0 + half * s0, c1 + half * s1, c2 + half * s2,
                                v_max, h, n, ib, wb):
                    continue
                _accumulate_gain(out_i, m_j, pref * bw[m], G, H, ia, wa, ib, wb)
    return out


@njit(cache=True)
def tform_batch(points, v_max, h, n, gamma, r_floor, bw, cth, sth, cph, sph,
                U, V, Mw, out):
    """Fused weighted form: out[i] = sum B Mw_j (U(v'_*) V(v') - U_j V_i).

    Gain and loss share one triple loop here, unlike :func:`gain_batch` plus
    the loss matrix, so the split identity compares two code paths.
    """
    nv = points.shape[0]
    nb = U.shape[1]
    nm = bw.shape[0]
    vol = h * h * h
    ia = np.empty(8, np.int64)
    wa = np.empty(8)
    ib = np.empty(8, np.int64)
    wb = np.empty(8)
    for i in range(nv):
        v0, v1, v2 = points[i, 0], points[i, 1], points[i, 2]
        for j in range(nv):
            if j == i:
                continue
            u0, u1, u2 = points[j, 0], points[j, 1], points[j, 2]
            d0, d1, d2 = v0 - u0, v1 - u1, v2 - u2
            r = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
            k0, k1, k2 = d0 / r, d1 / r, d2 / r
            e0, e1, e2, f0, f1, f2 = _frame(k0, k1, k2)
            c0, c1, c2 = 0.5 * (v0 + u0), 0.5 * (v1 + u1), 0.5 * (v2 + u2)
            half = 0.5 * r
            pref = vol * _phi(r, gamma, r_floor)
            for m in range(nm):
                a = sth[m] * cph[m]
                b_ = sth[m] * sph[m]
                s0 = a * e0 + b_ * f0 + cth[m] * k0
                s1 = a * e1 + b_ * f1 + cth[m] * k1
                s2 = a * e2 + b_ * f2 + cth[m] * k2
                in_a = _stencil(c0 - half * s0, c1 - half * s1, c2 - half * s2,
                                v_max, h, n, ia, wa)
                in_b = _stencil(c0 + half * s0, c1 + half * s1, c2 + half * s2,
                                v_max, h, n, ib, wb)
                coef = pref * bw[m]
                for bb in range(nb):
                    gain = 0.0
                    if in_a and in_b:
                        ua = 0.0
                        vb = 0.0
                        for q in range(8):
                            ua += wa[q] * U[ia[q], bb]
                            vb += wb[q] * V[ib[q], bb]
                        gain = ua * vb
                    out[i, bb] += coef * Mw[j, bb] * (gain - U[j, bb] * V[i, bb])
    return out


@njit(cache=True)
def loss_matrix(points, h, gamma, r_floor, bw_total):
    """A[i, j] = h^3 Phi(|v_i - v_j|) * sum_m bw_m, zero on the diagonal."""
    nv = points.shape[0]
    A = np.zeros((nv, nv))
    vol = h * h * h
    for i in range(nv):
        for j in range(nv):
            if i == j:
                continue
            d0 = points[i, 0] - points[j, 0]
            d1 = points[i, 1] - points[j, 1]
            d2 = points[i, 2] - points[j, 2]
            r = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
            A[i, j] = vol * _phi(r, gamma, r_floor) * bw_total
    return A
