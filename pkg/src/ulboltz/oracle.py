"""Slow reference implementations used to cross-check the fast paths.

Everything here is written with explicit Python loops over nodes and shares
no arithmetic with the compiled engine, the FFT window correlation or the
vectorized characteristic shifts. Only small instances are practical.
"""

import functools
import itertools
import math

import numpy as np

from .kernel import cross_section
from .norms import phi1_radial
from .weights import weight_W


def _interp_node(values3, v_max, h, n, w):
    """Scalar trilinear interpolation; 0 outside the box, clamp inside."""
    if any(abs(c) > v_max for c in w):
        return 0.0
    lo, fr = [], []
    for c in w:
        q = (c + v_max) / h - 0.5
        q = min(max(q, 0.0), n - 1.0)
        i = min(int(math.floor(q)), n - 2)
        lo.append(i)
        fr.append(q - i)
    total = 0.0
    for c0, c1, c2 in itertools.product((0, 1), repeat=3):
        wt = ((fr[0] if c0 else 1.0 - fr[0]) * (fr[1] if c1 else 1.0 - fr[1])
              * (fr[2] if c2 else 1.0 - fr[2]))
        total += wt * values3[lo[0] + c0, lo[1] + c1, lo[2] + c2]
    return total


def _post(v, vs, sigma):
    r = math.sqrt(sum((a - b) ** 2 for a, b in zip(v, vs)))
    c = [0.5 * (a + b) for a, b in zip(v, vs)]
    vp = [ci + 0.5 * r * si for ci, si in zip(c, sigma)]
    vsp = [ci - 0.5 * r * si for ci, si in zip(c, sigma)]
    return vp, vsp


@functools.lru_cache(maxsize=8)
def _pair_terms(ws):
    """(i, j, sigma, weight, B) over all off-diagonal pairs and sigma nodes."""
    pts = ws.vgrid.points
    kp = ws.kparams
    terms = []
    for i in range(pts.shape[0]):
        for j in range(pts.shape[0]):
            if i == j:
                continue
            quad = ws.sphere_for_pair(pts[i], pts[j])
            for m in range(quad.size):
                sigma = quad.sigma[m]
                B = cross_section(pts[i], pts[j], sigma, kp)
                terms.append((i, j, list(sigma), quad.weights[m], B))
    return terms


def naive_t_form(U, V, M, ws):
    """sum_j sum_m h^3 w_m B M_j (U(v'_*) V(v') - U_j V_i) for one slice."""
    vg = ws.vgrid
    n, h, v_max = vg.n_per_axis, vg.h, vg.v_max
    U3 = np.asarray(U, dtype=float).reshape(vg.shape)
    V3 = np.asarray(V, dtype=float).reshape(vg.shape)
    Uf, Vf = U3.ravel(), V3.ravel()
    M = np.asarray(M, dtype=float)
    pts = vg.points
    out = np.zeros(vg.size)
    vol = h ** 3
    for i, j, sigma, w, B in _pair_terms(ws):
        vp, vsp = _post(list(pts[i]), list(pts[j]), sigma)
        a = _interp_node(U3, v_max, h, n, vsp)
        b = _interp_node(V3, v_max, h, n, vp)
        inside = all(abs(c) <= v_max for c in vsp) and all(abs(c) <= v_max for c in vp)
        gain = a * b if inside else 0.0
        out[i] += vol * w * B * M[j] * (gain - Uf[j] * Vf[i])
    return out


def naive_gain(g, hfield, M, ws):
    """Gain part only, same conventions as :func:`naive_t_form`."""
    vg = ws.vgrid
    n, h, v_max = vg.n_per_axis, vg.h, vg.v_max
    G3 = np.asarray(g, dtype=float).reshape(vg.shape)
    H3 = np.asarray(hfield, dtype=float).reshape(vg.shape)
    M = np.asarray(M, dtype=float)
    pts = vg.points
    out = np.zeros(vg.size)
    for i, j, sigma, w, B in _pair_terms(ws):
        vp, vsp = _post(list(pts[i]), list(pts[j]), sigma)
        if any(abs(c) > v_max for c in vp + vsp):
            continue
        out[i] += h ** 3 * w * B * M[j] * (_interp_node(G3, v_max, h, n, vsp)
                                          * _interp_node(H3, v_max, h, n, vp))
    return out


def naive_loss(g, M, ws):
    """L(v_i) = sum_j sum_m h^3 w_m B M_j g_j."""
    vg = ws.vgrid
    g = np.asarray(g, dtype=float)
    M = np.asarray(M, dtype=float)
    out = np.zeros(vg.size)
    for i, j, _sigma, w, B in _pair_terms(ws):
        out[i] += vg.h ** 3 * w * B * M[j] * g[j]
    return out


def naive_q(g, f, ws):
    return naive_t_form(g, f, np.ones(ws.vgrid.size), ws)


def lagrange_fd_weights(offsets, deriv):
    """Derivative weights from differentiating the Lagrange basis at 0."""
    P = np.polynomial.polynomial
    offsets = [float(o) for o in offsets]
    out = []
    for j, oj in enumerate(offsets):
        basis = np.array([1.0])
        for k, ok in enumerate(offsets):
            if k != j:
                basis = P.polymul(basis, np.array([-ok, 1.0]) / (oj - ok))
        d = P.polyder(basis, deriv) if deriv else basis
        out.append(P.polyval(0.0, d))
    return np.array(out)


def _axis_derivative(arr, axis, deriv, fd_order, h, periodic):
    n = arr.shape[axis]
    r = (deriv + fd_order - 1) // 2
    npts = deriv + fd_order
    out = np.zeros_like(arr)
    src = np.moveaxis(arr, axis, 0)
    dst = np.moveaxis(out, axis, 0)
    for i in range(n):
        if periodic or r <= i <= n - 1 - r:
            offs = list(range(-r, r + 1))
        else:
            start = min(max(i - npts // 2, 0), n - npts)
            offs = [p - i for p in range(start, start + npts)]
        wts = lagrange_fd_weights(offs, deriv) / h ** deriv
        for o, w in zip(offs, wts):
            dst[i] += w * src[(i + o) % n]
    return out


def naive_derivative(values, sgrid, vgrid, alpha, beta, fd_order):
    d = sgrid.active_dims
    if any(alpha[d:]):
        return np.zeros_like(np.asarray(values, dtype=float))
    arr = np.asarray(values, dtype=float).reshape(sgrid.shape + vgrid.shape)
    for ax, order in enumerate(alpha[:d]):
        if order:
            arr = _axis_derivative(arr, ax, order, fd_order, sgrid.h, True)
    for ax, order in enumerate(beta):
        if order:
            arr = _axis_derivative(arr, d + ax, order, fd_order, vgrid.h, False)
    return arr.reshape(sgrid.size, vgrid.size)


def _periodic_offset(i, a, n, h):
    o = (i - a) % n
    return (o if o <= n // 2 else o - n) * h


def _window_value(x_idx, a_idx, sgrid, R):
    """Integrated |phi_R|^2 weight for node x against centre a."""
    n, h = sgrid.n_per_axis, sgrid.h
    if sgrid.active_dims == 3:
        r2 = sum(_periodic_offset(xi, ai, n, h) ** 2 for xi, ai in zip(x_idx, a_idx))
        return float(phi1_radial(math.sqrt(r2) / R)) ** 2 * h ** 3
    dx = _periodic_offset(x_idx[0], a_idx[0], n, h)
    total = 0.0
    for p in range(n):
        for q in range(n):
            dy = _periodic_offset(p, 0, n, h)
            dz = _periodic_offset(q, 0, n, h)
            total += float(phi1_radial(math.sqrt(dx * dx + dy * dy + dz * dz) / R)) ** 2
    return total * h ** 3


def _multi_indices(k, d):
    out = []
    for combo in itertools.product(range(k + 1), repeat=d + 3):
        if sum(combo) <= k:
            out.append((combo[:d], combo[d:]))
    return out


def _windowed_table(values, sgrid, vgrid, spec, R):
    """Per multi-index, the windowed integral at every centre (explicit loops)."""
    W2 = weight_W(vgrid.points, spec.ell) ** 2
    idx = list(itertools.product(range(sgrid.n_per_axis), repeat=sgrid.active_dims))
    win = {(x, a): _window_value(x, a, sgrid, R) for x in idx for a in idx}
    table = []
    for alpha, beta in _multi_indices(spec.k, sgrid.active_dims):
        D = naive_derivative(values, sgrid, vgrid, alpha, beta, spec.fd_order)
        dens = [sum(D[p, q] ** 2 * W2[q] for q in range(vgrid.size)) * vgrid.h ** 3
                for p in range(sgrid.size)]
        row = []
        for a in idx:
            row.append(sum(win[(x, a)] * dens[p] for p, x in enumerate(idx)))
        table.append(row)
    return np.array(table)


def naive_ul_norm(values, sgrid, vgrid, spec, R=1.0):
    table = _windowed_table(values, sgrid, vgrid, spec, R)
    return math.sqrt(sum(max(max(row), 0.0) for row in table))


def naive_spacetime_norm(seq, dt, sgrid, vgrid, spec):
    seq = np.asarray(seq, dtype=float)
    if seq.shape[0] == 1:
        return 0.0
    tables = [_windowed_table(g, sgrid, vgrid, spec, 1.0) for g in seq]
    total = 0.0
    last = len(tables) - 1
    for term in range(tables[0].shape[0]):
        best = -math.inf
        for a in range(tables[0].shape[1]):
            acc = 0.0
            for j, tab in enumerate(tables):
                w = 0.5 * dt if j in (0, last) else dt
                acc += w * tab[term, a]
            best = max(best, acc)
        total += max(best, 0.0)
    return math.sqrt(total)


def _periodic_value(row, x, L, h, n):
    """Periodic linear interpolation of a 1-D column at coordinate x."""
    nodes = -L + h * np.arange(n + 1)
    col = np.append(row, row[0])
    period = 2.0 * L
    xx = (x + L) % period - L
    return float(np.interp(xx, nodes, col))


def naive_mild_update(seq, g0, gain_seq, loss_seq, ctx):
    """Pointwise mild-form update on a 1-D spatial grid.

    Each (t_j, x, v) value is assembled from scalar characteristic lookups;
    the gain and loss fields are supplied so the comparison isolates the
    transport and time quadrature.
    """
    sg, vg = ctx.sgrid, ctx.vgrid
    if sg.active_dims != 1:
        raise ValueError("the pointwise mild-form oracle handles active_dims = 1")
    L, h, n = sg.L, sg.h, sg.n_per_axis
    dt, kappa = ctx.dt, ctx.wparams.kappa
    times = ctx.times
    xs = sg.nodes_1d
    out = np.array(seq, dtype=float)
    out[0] = g0
    for q in range(vg.size):
        v = vg.points[q]
        damp = kappa * (1.0 + float(v @ v))
        for p in range(n):
            x = xs[p]
            for j in range(1, len(times)):
                def along(field, m):
                    return _periodic_value(field[m][:, q], x - (times[j] - times[m]) * v[0],
                                           L, h, n)
                lvals = [along(loss_seq, m) for m in range(j + 1)]
                V = []
                for i in range(j + 1):
                    seg = lvals[i:j + 1]
                    V.append(dt * (sum(seg) - 0.5 * (seg[0] + seg[-1])) if j > i else 0.0)
                val = math.exp(-damp * times[j] - V[0]) * _periodic_value(
                    g0[:, q], x - times[j] * v[0], L, h, n)
                for i in range(j + 1):
                    w = 0.5 * dt if i in (0, j) else dt
                    val += w * math.exp(-damp * (times[j] - times[i]) - V[i]) \
                        * along(gain_seq, i)
                out[j, p, q] = val
    return out
