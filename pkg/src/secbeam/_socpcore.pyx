# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop of the second-order cone solver.

Same Nesterov-Todd predictor-corrector iteration as the numpy fallback in
``socp.py``, written as flat C loops.  The cone programs here are tiny (a
few dozen variables), so the per-iteration cost is pure call overhead in
Python; fused loops with an embedded pivoted-LU solve run the whole
iteration in a few microseconds.

Returns raw iterate arrays plus a status code; the Python wrapper turns
them into a ConicResult.  Status codes: 0 optimal, 1 infeasible (Farkas
certificate), 2 iteration limit.
"""

import numpy as np

from libc.math cimport INFINITY, fabs, sqrt


cdef double STEP_DAMP = 0.99


cdef int _lu_factor(double[:, ::1] a, int[::1] piv, int nn) noexcept nogil:
    """In-place LU with partial pivoting; returns -1 on singularity."""
    cdef int i, j, k, p
    cdef double big, tmp
    for k in range(nn):
        big = fabs(a[k, k])
        p = k
        for i in range(k + 1, nn):
            if fabs(a[i, k]) > big:
                big = fabs(a[i, k])
                p = i
        if big == 0.0:
            return -1
        piv[k] = p
        if p != k:
            for j in range(nn):
                tmp = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = tmp
        for i in range(k + 1, nn):
            a[i, k] /= a[k, k]
            tmp = a[i, k]
            for j in range(k + 1, nn):
                a[i, j] -= tmp * a[k, j]
    return 0


cdef void _lu_solve(double[:, ::1] a, int[::1] piv, double[::1] b, int nn) noexcept nogil:
    cdef int i, j
    cdef double tmp
    for i in range(nn):
        if piv[i] != i:
            tmp = b[i]
            b[i] = b[piv[i]]
            b[piv[i]] = tmp
    for i in range(nn):
        tmp = b[i]
        for j in range(i):
            tmp -= a[i, j] * b[j]
        b[i] = tmp
    for i in range(nn - 1, -1, -1):
        tmp = b[i]
        for j in range(i + 1, nn):
            tmp -= a[i, j] * b[j]
        b[i] = tmp / a[i, i]


cdef double _jnrm2(double[::1] v, int off, int d) noexcept nogil:
    cdef double out = v[off] * v[off]
    cdef int j
    for j in range(1, d):
        out -= v[off + j] * v[off + j]
    return out


cdef double _max_step_cone(double[::1] s, double[::1] ds, int off, int d) noexcept nogil:
    """Largest alpha with s + alpha*ds still inside this cone."""
    cdef double a = _jnrm2(ds, off, d)
    cdef double c = _jnrm2(s, off, d)
    cdef double b = 0.0
    cdef int j
    cdef double best = INFINITY, disc, root, cand
    b = s[off] * ds[off]
    for j in range(1, d):
        b -= s[off + j] * ds[off + j]
    b *= 2.0
    if a == 0.0:
        if b < 0.0:
            best = -c / b
    else:
        disc = b * b - 4.0 * a * c
        if disc >= 0.0:
            root = sqrt(disc)
            cand = (-b - root) / (2.0 * a)
            if cand > 0.0 and cand < best:
                best = cand
            cand = (-b + root) / (2.0 * a)
            if cand > 0.0 and cand < best:
                best = cand
    if ds[off] < 0.0:
        cand = -s[off] / ds[off]
        if cand < best:
            best = cand
    return best


def solve(double[::1] c, double[:, ::1] G, double[::1] h,
          long[::1] dims, double tol, int max_iter):
    cdef int n = c.shape[0]
    cdef int m = G.shape[0]
    cdef int ncones = dims.shape[0]
    cdef int nm = n + m
    cdef int it, i, j, k, cone, off, d, g

    offs_np = np.zeros(ncones, dtype=np.int32)
    cdef int[::1] offs = offs_np
    cdef int total = 0
    for cone in range(ncones):
        offs[cone] = total
        total += dims[cone]

    # iterates and working storage
    x_np = np.zeros(n)
    s_np = np.zeros(m)
    z_np = np.zeros(m)
    cdef double[::1] x = x_np, s = s_np, z = z_np
    for cone in range(ncones):
        s[offs[cone]] = 1.0
        z[offs[cone]] = 1.0

    best_np = (np.zeros(n), np.zeros(m), np.zeros(m))
    cdef double[::1] bx = best_np[0], bs = best_np[1], bz = best_np[2]
    cdef double best_err = INFINITY
    cdef double best_pres = 0.0, best_dres = 0.0, best_gap = 0.0, best_rel = 0.0
    cdef int best_it = 0

    rd_np = np.zeros(n)
    rp_np = np.zeros(m)
    cdef double[::1] rd = rd_np, rp = rp_np
    kk0_np = np.zeros((nm, nm))
    kkf_np = np.zeros((nm, nm))
    cdef double[:, ::1] kk0 = kk0_np, kkf = kkf_np
    piv_np = np.zeros(nm, dtype=np.int32)
    cdef int[::1] piv = piv_np
    for i in range(n):
        for j in range(m):
            kk0[i, n + j] = G[j, i]
            kk0[n + j, i] = G[j, i]

    # per-cone scaling blocks, stored flat
    cdef int blk_total = 0
    for cone in range(ncones):
        blk_total += dims[cone] * dims[cone]
    wblk_np = np.zeros(blk_total)
    wibl_np = np.zeros(blk_total)
    cdef double[::1] wblk = wblk_np, wibl = wibl_np
    blko_np = np.zeros(ncones, dtype=np.int32)
    cdef int[::1] blko = blko_np
    total = 0
    for cone in range(ncones):
        blko[cone] = total
        total += dims[cone] * dims[cone]

    lam_np = np.zeros(m)
    lam_sq_np = np.zeros(m)
    psi_np = np.zeros(m)
    lam_div_np = np.zeros(m)
    cdef double[::1] lam = lam_np, lam_sq = lam_sq_np, psi = psi_np
    cdef double[::1] lam_div = lam_div_np
    rhs_np = np.zeros(nm)
    sol_np = np.zeros(nm)
    res_np = np.zeros(nm)
    cdef double[::1] rhs = rhs_np, sol = sol_np, res = res_np
    dxa_np = np.zeros(n); dsa_np = np.zeros(m); dza_np = np.zeros(m)
    dx_np = np.zeros(n); ds_np = np.zeros(m); dz_np = np.zeros(m)
    cdef double[::1] dxa = dxa_np, dsa = dsa_np, dza = dza_np
    cdef double[::1] dx = dx_np, ds = ds_np, dz = dz_np
    scr_np = np.zeros(m)
    cdef double[::1] scr = scr_np

    cdef double h_scale = 1.0, c_scale = 1.0, acc
    for i in range(m):
        acc = h[i]
        h_scale += acc * acc
    h_scale = sqrt(h_scale - 1.0)
    if h_scale < 1.0:
        h_scale = 1.0
    for i in range(n):
        acc = c[i]
        c_scale += acc * acc
    c_scale = sqrt(c_scale - 1.0)
    if c_scale < 1.0:
        c_scale = 1.0

    cdef double gap, pobj, pres, dres, relgap, err, hz, gtz_norm, mu
    cdef double ns, nz, gam, eta, w0, denom, alpha, cand_a, mu_aff, sigma, shift
    cdef double t0, t1
    cdef int status = 2
    cdef int iterations = 0
    cdef bint failed = False

    for it in range(max_iter):
        iterations = it
        # residuals
        for i in range(n):
            acc = c[i]
            for j in range(m):
                acc += G[j, i] * z[j]
            rd[i] = acc
        for j in range(m):
            acc = s[j] - h[j]
            for i in range(n):
                acc += G[j, i] * x[i]
            rp[j] = acc
        gap = 0.0
        for j in range(m):
            gap += s[j] * z[j]
        pobj = 0.0
        for i in range(n):
            pobj += c[i] * x[i]
        pres = 0.0
        for j in range(m):
            pres += rp[j] * rp[j]
        pres = sqrt(pres) / h_scale
        dres = 0.0
        for i in range(n):
            dres += rd[i] * rd[i]
        dres = sqrt(dres) / c_scale
        relgap = gap / (1.0 if fabs(pobj) < 1.0 else fabs(pobj))
        err = pres
        if dres > err:
            err = dres
        if relgap > err:
            err = relgap
        if err < best_err:
            best_err = err
            best_pres = pres; best_dres = dres
            best_gap = gap; best_rel = relgap; best_it = it
            for i in range(n):
                bx[i] = x[i]
            for j in range(m):
                bs[j] = s[j]
                bz[j] = z[j]
        if pres < tol and dres < tol and relgap < tol:
            status = 0
            break
        # Farkas certificate for primal infeasibility
        hz = 0.0
        for j in range(m):
            hz += h[j] * z[j]
        if hz < 0.0:
            gtz_norm = 0.0
            for i in range(n):
                acc = rd[i] - c[i]
                gtz_norm += acc * acc
            if sqrt(gtz_norm) < 1e-7 * (-hz):
                status = 1
                for i in range(n):
                    bx[i] = x[i]
                for j in range(m):
                    bs[j] = s[j]
                    bz[j] = z[j]
                best_pres = pres; best_dres = dres
                best_gap = gap; best_rel = relgap; best_it = it
                break

        mu = gap / ncones

        # Nesterov-Todd scaling per cone
        for cone in range(ncones):
            off = offs[cone]
            d = dims[cone]
            g = blko[cone]
            ns = _jnrm2(s, off, d)
            nz = _jnrm2(z, off, d)
            if ns <= 0.0 or nz <= 0.0:
                failed = True
                break
            ns = sqrt(ns)
            nz = sqrt(nz)
            acc = 0.0
            for j in range(d):
                acc += s[off + j] * z[off + j]
            gam = sqrt((1.0 + acc / (ns * nz)) / 2.0)
            eta = sqrt(ns / nz)
            # wbar via scr as scratch: scr[j] = wbar_j
            scr[0] = (s[off] / ns + z[off] / nz) / (2.0 * gam)
            for j in range(1, d):
                scr[j] = (s[off + j] / ns - z[off + j] / nz) / (2.0 * gam)
            w0 = scr[0]
            denom = 1.0 + w0
            for i in range(d):
                for j in range(d):
                    if i == 0 and j == 0:
                        acc = w0
                    elif i == 0:
                        acc = scr[j]
                    elif j == 0:
                        acc = scr[i]
                    else:
                        acc = scr[i] * scr[j] / denom
                        if i == j:
                            acc += 1.0
                    wblk[g + i * d + j] = eta * acc
                    wibl[g + i * d + j] = (acc if (i == 0) == (j == 0) else -acc) / eta
            # lambda = W z
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc += wblk[g + i * d + j] * z[off + j]
                lam[off + i] = acc
        if failed:
            break

        # KKT lower-right block: -W^2
        for cone in range(ncones):
            off = offs[cone]
            d = dims[cone]
            g = blko[cone]
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for k in range(d):
                        acc += wblk[g + i * d + k] * wblk[g + k * d + j]
                    kk0[n + off + i, n + off + j] = -acc
        for i in range(nm):
            for j in range(nm):
                kkf[i, j] = kk0[i, j]
        if _lu_factor(kkf, piv, nm) != 0:
            break

        # lambda o lambda
        for cone in range(ncones):
            off = offs[cone]
            d = dims[cone]
            acc = 0.0
            for j in range(d):
                acc += lam[off + j] * lam[off + j]
            lam_sq[off] = acc
            for j in range(1, d):
                lam_sq[off + j] = 2.0 * lam[off] * lam[off + j]

        # predictor (affine) direction
        _direction(lam_sq, lam, rd, rp, G, kk0, kkf, piv, wblk, offs, dims, blko,
                   lam_div, rhs, sol, res, dxa, dsa, dza, n, m, ncones)
        alpha = 1.0
        for cone in range(ncones):
            off = offs[cone]
            d = dims[cone]
            cand_a = _max_step_cone(s, dsa, off, d)
            if cand_a < alpha:
                alpha = cand_a
            cand_a = _max_step_cone(z, dza, off, d)
            if cand_a < alpha:
                alpha = cand_a
        mu_aff = 0.0
        for j in range(m):
            mu_aff += (s[j] + alpha * dsa[j]) * (z[j] + alpha * dza[j])
        mu_aff /= ncones
        sigma = mu_aff / mu
        if sigma < 0.0:
            sigma = 0.0
        elif sigma > 1.0:
            sigma = 1.0
        sigma = sigma * sigma * sigma

        # corrector: psi = lam_sq + (W^-1 ds) o (W dz) - sigma*mu*e
        shift = sigma * mu
        for cone in range(ncones):
            off = offs[cone]
            d = dims[cone]
            g = blko[cone]
            # scr[:d] = W^-1 ds ; scr[d:2d] would alias, use psi as scratch
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc += wibl[g + i * d + j] * dsa[off + j]
                scr[i] = acc
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc += wblk[g + i * d + j] * dza[off + j]
                psi[off + i] = acc  # temporarily W dz
            t0 = 0.0
            for j in range(d):
                t0 += scr[j] * psi[off + j]
            t1 = psi[off]
            for j in range(d - 1, 0, -1):
                psi[off + j] = lam_sq[off + j] \
                    + scr[0] * psi[off + j] + t1 * scr[j]
            psi[off] = lam_sq[off] + t0 - shift
        _direction(psi, lam, rd, rp, G, kk0, kkf, piv, wblk, offs, dims, blko,
                   lam_div, rhs, sol, res, dx, ds, dz, n, m, ncones)

        alpha = INFINITY
        for cone in range(ncones):
            off = offs[cone]
            d = dims[cone]
            cand_a = _max_step_cone(s, ds, off, d)
            if cand_a < alpha:
                alpha = cand_a
            cand_a = _max_step_cone(z, dz, off, d)
            if cand_a < alpha:
                alpha = cand_a
        alpha *= STEP_DAMP
        if alpha > 1.0:
            alpha = 1.0
        for i in range(n):
            x[i] += alpha * dx[i]
        for j in range(m):
            s[j] += alpha * ds[j]
            z[j] += alpha * dz[j]
        for cone in range(ncones):
            off = offs[cone]
            d = dims[cone]
            if _jnrm2(s, off, d) <= 0.0 or _jnrm2(z, off, d) <= 0.0:
                failed = True
                break
        if failed:
            break

    return (best_np[0], best_np[1], best_np[2], status, iterations,
            best_pres, best_dres, best_gap, best_rel, best_it)


cdef void _direction(double[::1] psi, double[::1] lam,
                     double[::1] rd, double[::1] rp, double[:, ::1] G,
                     double[:, ::1] kk0, double[:, ::1] kkf, int[::1] piv,
                     double[::1] wblk, int[::1] offs, long[::1] dims,
                     int[::1] blko, double[::1] lam_div, double[::1] rhs,
                     double[::1] sol, double[::1] res,
                     double[::1] dx, double[::1] ds, double[::1] dz,
                     int n, int m, int ncones) noexcept nogil:
    cdef int cone, off, d, g, i, j
    cdef double a, det, y0, acc
    cdef int nm = n + m
    # lam_div = lam \ psi per cone (arrow-matrix solve)
    for cone in range(ncones):
        off = offs[cone]
        d = dims[cone]
        a = lam[off]
        det = a * a
        for j in range(1, d):
            det -= lam[off + j] * lam[off + j]
        y0 = a * psi[off]
        for j in range(1, d):
            y0 -= lam[off + j] * psi[off + j]
        y0 /= det
        lam_div[off] = y0
        for j in range(1, d):
            lam_div[off + j] = (psi[off + j] - y0 * lam[off + j]) / a
    # rhs = [-rd; -rp + W lam_div]
    for i in range(n):
        rhs[i] = -rd[i]
    for cone in range(ncones):
        off = offs[cone]
        d = dims[cone]
        g = blko[cone]
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc += wblk[g + i * d + j] * lam_div[off + j]
            rhs[n + off + i] = -rp[off + i] + acc
    for i in range(nm):
        sol[i] = rhs[i]
    _lu_solve(kkf, piv, sol, nm)
    # one round of iterative refinement against the unfactored matrix
    for i in range(nm):
        acc = rhs[i]
        for j in range(nm):
            acc -= kk0[i, j] * sol[j]
        res[i] = acc
    _lu_solve(kkf, piv, res, nm)
    for i in range(nm):
        sol[i] += res[i]
    for i in range(n):
        dx[i] = sol[i]
    for j in range(m):
        dz[j] = sol[n + j]
    for j in range(m):
        acc = -rp[j]
        for i in range(n):
            acc -= G[j, i] * dx[i]
        ds[j] = acc
