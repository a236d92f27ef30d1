"""Dense primal-dual interior-point solver for small second-order cone programs.

Problems are given in inequality form

    minimize    c^T x
    subject to  h - G x  in  K,

where K is a direct product of second-order (Lorentz) cones
Q^d = {(u0, u1) : ||u1|| <= u0}.  The implementation follows the standard
Nesterov-Todd-scaled path-following recipe with a Mehrotra
predictor-corrector step:

* slack/multiplier pair (s, z) kept strictly inside K, infeasible start;
* per-cone NT scaling points in closed form; all Jordan-algebra and scaling
  arithmetic is batched across cones of equal dimension and the scaling
  matrices are kept as stacks of small blocks, never materialized at full
  size (the problems here have one epigraph cone plus a batch of tiny
  constraint cones, so per-cone Python overhead is what actually costs);
* search directions from the augmented KKT system with one round of
  iterative refinement, which keeps the directions usable all the way down
  to duality gaps near 1e-10 where normal equations would have lost half
  the digits;
* step length 0.99 of the distance to the cone boundary;
* primal infeasibility reported via an approximate Farkas certificate
  (z in K* with G^T z ~ 0 and h^T z < 0).

The solver tracks the best iterate seen and reports it if the iteration
limit is reached, so callers always get residuals they can judge.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = ["ConicResult", "solve_cone_program", "using_compiled_solver"]

DEFAULT_TOL = 1e-8
MAX_ITER = 100
STEP_DAMP = 0.99

try:
    from . import _socpcore
except ImportError:
    _socpcore = None

_FORCE_PURE = os.environ.get("SECBEAM_PURE_PYTHON", "") == "1"
_STATUS_NAMES = {0: "optimal", 1: "infeasible", 2: "max_iterations"}


def using_compiled_solver():
    return _socpcore is not None and not _FORCE_PURE


@dataclass
class ConicResult:
    """Solver outcome: primal/dual iterates plus KKT residual measures."""

    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    status: str  # "optimal" | "infeasible" | "max_iterations"
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    relative_gap: float
    objective: float


class _ConeLayout:
    """Cones of a product grouped by dimension for vectorized arithmetic.

    Each group holds a (count, dim) index matrix into the stacked slack
    vector, so per-group gathers and scatters are single indexing ops.
    """

    def __init__(self, dims):
        self.dims = [int(d) for d in dims]
        if any(d < 1 for d in self.dims):
            raise ValueError("cone dimensions must be positive")
        self.m = sum(self.dims)
        self.ncones = len(self.dims)
        offsets = np.concatenate([[0], np.cumsum(self.dims[:-1])]).astype(int)
        self.groups = []
        for d in sorted(set(self.dims)):
            offs = np.array([o for o, dd in zip(offsets, self.dims) if dd == d])
            self.groups.append((d, offs[:, None] + np.arange(d)[None, :]))

    def gather(self, v):
        return [v[idx] for _, idx in self.groups]

    def scatter(self, parts, out=None):
        if out is None:
            out = np.empty(self.m)
        for (_, idx), part in zip(self.groups, parts):
            out[idx] = part
        return out

    def identity(self):
        parts = []
        for _, idx in self.groups:
            part = np.zeros(idx.shape)
            part[:, 0] = 1.0
            parts.append(part)
        return self.scatter(parts)


def _vnrm2(u):
    """Jordan determinant u0^2 - ||u1||^2 per row of a (count, dim) group."""
    return u[:, 0] ** 2 - (u[:, 1:] * u[:, 1:]).sum(axis=1)


def _vprod(u, v):
    out = np.empty_like(u)
    out[:, 0] = (u * v).sum(axis=1)
    out[:, 1:] = u[:, :1] * v[:, 1:] + v[:, :1] * u[:, 1:]
    return out


def _vdiv(lam, d):
    """Rows y with lam o y = d (closed-form arrow-matrix inverse)."""
    a = lam[:, 0]
    b = lam[:, 1:]
    det = a ** 2 - (b * b).sum(axis=1)
    y0 = (a * d[:, 0] - (b * d[:, 1:]).sum(axis=1)) / det
    out = np.empty_like(d)
    out[:, 0] = y0
    out[:, 1:] = (d[:, 1:] - y0[:, None] * b) / a[:, None]
    return out


def _group_max_step(s, ds):
    """Largest alpha per group keeping every row of s + alpha*ds in its cone."""
    a = _vnrm2(ds)
    b = 2.0 * (s[:, 0] * ds[:, 0] - (s[:, 1:] * ds[:, 1:]).sum(axis=1))
    c = _vnrm2(s)
    best = np.full(s.shape[0], np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        # linear case (a == 0): root at -c/b when b < 0
        lin = (a == 0.0) & (b < 0.0)
        best[lin] = -c[lin] / b[lin]
        disc = b * b - 4.0 * a * c
        quad = (a != 0.0) & (disc >= 0.0)
        root = np.sqrt(np.where(quad, disc, 0.0))
        for sign in (-1.0, 1.0):
            cand = np.where(quad, (-b + sign * root) / (2.0 * a), np.inf)
            good = quad & (cand > 0.0)
            best[good] = np.minimum(best[good], cand[good])
        # the leading coordinate must stay positive as well
        neg = ds[:, 0] < 0.0
        best[neg] = np.minimum(best[neg], -s[neg, 0] / ds[neg, 0])
    return float(best.min()) if best.size else np.inf


class _NtScaling:
    """Blockwise NT scaling for one iterate: W z = W^{-1} s, lambda = W z."""

    def __init__(self, layout, s_groups, z_groups):
        self.layout = layout
        self.w_blocks = []  # per group: (count, d, d) stack for W
        self.winv_blocks = []
        self.lam_groups = []
        for (d, _), sg, zg in zip(layout.groups, s_groups, z_groups):
            ns = np.sqrt(_vnrm2(sg))
            nz = np.sqrt(_vnrm2(zg))
            sbar = sg / ns[:, None]
            zbar = zg / nz[:, None]
            gamma = np.sqrt((1.0 + (sbar * zbar).sum(axis=1)) / 2.0)
            w0 = (sbar[:, 0] + zbar[:, 0]) / (2.0 * gamma)
            w1 = (sbar[:, 1:] - zbar[:, 1:]) / (2.0 * gamma[:, None])
            eta = np.sqrt(ns / nz)
            count = sg.shape[0]
            blk = np.empty((count, d, d))
            blk[:, 0, 0] = w0
            blk[:, 0, 1:] = w1
            blk[:, 1:, 0] = w1
            blk[:, 1:, 1:] = np.eye(d - 1) + \
                w1[:, :, None] * w1[:, None, :] / (1.0 + w0)[:, None, None]
            # hyperbolic inverse: flip the sign of the off-diagonal border
            inv = blk.copy()
            inv[:, 0, 1:] *= -1.0
            inv[:, 1:, 0] *= -1.0
            wb = blk * eta[:, None, None]
            self.w_blocks.append(wb)
            self.winv_blocks.append(inv / eta[:, None, None])
            self.lam_groups.append(np.matmul(wb, zg[:, :, None])[:, :, 0])

    def _apply(self, blocks, v):
        parts = [np.matmul(blk, vg[:, :, None])[:, :, 0]
                 for blk, vg in zip(blocks, self.layout.gather(v))]
        return self.layout.scatter(parts)

    def apply_w(self, v):
        return self._apply(self.w_blocks, v)

    def apply_w_groups(self, v):
        return [np.matmul(blk, vg[:, :, None])[:, :, 0]
                for blk, vg in zip(self.w_blocks, self.layout.gather(v))]

    def apply_winv_groups(self, v):
        return [np.matmul(blk, vg[:, :, None])[:, :, 0]
                for blk, vg in zip(self.winv_blocks, self.layout.gather(v))]

    def fill_w_squared(self, out):
        """Write -W^2 into the dense block ``out`` (the KKT lower-right)."""
        out[:] = 0.0
        for (d, idx), wb in zip(self.layout.groups, self.w_blocks):
            sq = np.matmul(wb, wb)
            for g in range(idx.shape[0]):
                out[idx[g][:, None], idx[g]] = -sq[g]


def solve_cone_program(c, G, h, dims, tol=DEFAULT_TOL, max_iter=MAX_ITER):
    """Run the predictor-corrector iteration; see the module docstring.

    Dispatches to the compiled core when it was built (and
    ``SECBEAM_PURE_PYTHON`` is unset); the numpy path below implements the
    identical iteration.

    Parameters
    ----------
    c, G, h : objective vector (n,), constraint matrix (m, n), offset (m,)
    dims : iterable of cone dimensions summing to m (each >= 1)
    tol : relative tolerance on primal/dual residuals and duality gap
    """
    c = np.ascontiguousarray(c, dtype=float)
    G = np.ascontiguousarray(G, dtype=float)
    h = np.ascontiguousarray(h, dtype=float)
    layout = _ConeLayout(dims)
    m, n = layout.m, c.shape[0]
    if G.shape != (m, n):
        raise ValueError(f"G must be {(m, n)}, got {G.shape}")
    if using_compiled_solver():
        dims_arr = np.asarray(layout.dims, dtype=np.int64)
        x, s, z, code, iters, pres, dres, gap, relgap, _ = _socpcore.solve(
            c, G, h, dims_arr, tol, max_iter)
        return ConicResult(x, s, z, _STATUS_NAMES[code], iters,
                           pres, dres, gap, relgap, float(c @ x))
    return _solve_numpy(c, G, h, layout, tol, max_iter)


def _solve_numpy(c, G, h, layout, tol, max_iter):
    m, n = layout.m, c.shape[0]
    Gt = G.T.copy()

    x = np.zeros(n)
    s = layout.identity()
    z = s.copy()
    h_scale = max(1.0, float(np.linalg.norm(h)))
    c_scale = max(1.0, float(np.linalg.norm(c)))
    kk = np.zeros((n + m, n + m))
    kk[:n, n:] = Gt
    kk[n:, :n] = G
    rhs = np.empty(n + m)

    best = None
    iterations = 0
    for it in range(max_iter):
        iterations = it
        rd = Gt @ z + c
        rp = G @ x + s - h
        gap = float(s @ z)
        pobj = float(c @ x)
        pres = float(np.linalg.norm(rp)) / h_scale
        dres = float(np.linalg.norm(rd)) / c_scale
        relgap = gap / max(1.0, abs(pobj))
        err = max(pres, dres, relgap)
        if best is None or err < best[0]:
            best = (err, x.copy(), s.copy(), z.copy(), pres, dres, gap, relgap, it)
        if pres < tol and dres < tol and relgap < tol:
            return ConicResult(x, s, z, "optimal", it, pres, dres, gap, relgap, pobj)
        # Farkas certificate: z in K* with G^T z ~ 0 and h^T z < 0 proves
        # that no feasible point exists; reached when the dual runs away.
        hz = float(h @ z)
        if hz < 0 and float(np.linalg.norm(rd - c)) < 1e-7 * (-hz):
            return ConicResult(x, s, z, "infeasible", it, pres, dres, gap,
                               relgap, pobj)

        mu = gap / layout.ncones
        s_groups = layout.gather(s)
        z_groups = layout.gather(z)
        scaling = _NtScaling(layout, s_groups, z_groups)
        scaling.fill_w_squared(kk[n:, n:])
        try:
            kk_inv = np.linalg.inv(kk)
        except np.linalg.LinAlgError:
            break

        def direction(psi_groups):
            lam_div = layout.scatter(
                [_vdiv(lg, pg) for lg, pg in zip(scaling.lam_groups, psi_groups)])
            rhs[:n] = -rd
            rhs[n:] = -rp + scaling.apply_w(lam_div)
            sol = kk_inv @ rhs
            sol += kk_inv @ (rhs - kk @ sol)  # one refinement round
            dx, dz = sol[:n], sol[n:]
            ds = -rp - G @ dx
            return dx, ds, dz

        lam_sq = [_vprod(lg, lg) for lg in scaling.lam_groups]
        dx_a, ds_a, dz_a = direction(lam_sq)

        ds_groups = layout.gather(ds_a)
        dz_groups = layout.gather(dz_a)
        alpha = 1.0
        for sg, dsg, zg, dzg in zip(s_groups, ds_groups, z_groups, dz_groups):
            alpha = min(alpha, _group_max_step(sg, dsg), _group_max_step(zg, dzg))
        mu_aff = float((s + alpha * ds_a) @ (z + alpha * dz_a)) / layout.ncones
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        ws = scaling.apply_winv_groups(ds_a)
        wz = scaling.apply_w_groups(dz_a)
        shift = sigma * mu
        psi = [ls + _vprod(a, b) for ls, a, b in zip(lam_sq, ws, wz)]
        for part in psi:
            part[:, 0] -= shift
        dx, ds, dz = direction(psi)

        ds_groups = layout.gather(ds)
        dz_groups = layout.gather(dz)
        alpha = np.inf
        for sg, dsg, zg, dzg in zip(s_groups, ds_groups, z_groups, dz_groups):
            alpha = min(alpha, _group_max_step(sg, dsg), _group_max_step(zg, dzg))
        alpha = min(1.0, STEP_DAMP * alpha)
        x = x + alpha * dx
        s = s + alpha * ds
        z = z + alpha * dz
        boundary = False
        for sg, dsg, zg, dzg in zip(s_groups, ds_groups, z_groups, dz_groups):
            if _vnrm2(sg + alpha * dsg).min() <= 0 or _vnrm2(zg + alpha * dzg).min() <= 0:
                boundary = True
                break
        if boundary or not np.isfinite(gap):
            break  # fell onto the boundary numerically; report the best iterate

    err, x, s, z, pres, dres, gap, relgap, it = best
    status = "optimal" if (pres < tol and dres < tol and relgap < tol) else "max_iterations"
    return ConicResult(x, s, z, status, iterations, pres, dres, gap, relgap, float(c @ x))
