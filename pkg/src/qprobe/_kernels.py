"""Compiled inner loops for the stacked master-equation right-hand side.

Each kernel fuses one full pass over the block stack: the elementwise
free-evolution/decay mask, the tridiagonal conditional-coupling
commutator with per-block bra/ket signs, and the dissipator stencil.
No fastmath: results are IEEE-reproducible and match the uncompiled
block path to rounding.
"""

from numba import njit


@njit(cache=True)
def rhs_jump(stack, out, mask, lam_coef, wv, cls, crs, jump_down, jump_up,
             use_w, use_down, use_up):
    """Jump-operator dissipator: out = mask*X + coupling + shifted jumps."""
    depth, n, _ = stack.shape
    for b in range(depth):
        x = stack[b]
        o = out[b]
        cl = cls[b]
        cr = crs[b]
        lam = lam_coef[b]
        for i in range(n):
            for j in range(n):
                v = (mask[i, j] + lam) * x[i, j]
                if use_w:
                    acc = 0.0j
                    if i + 1 < n:
                        acc += wv[i] * x[i + 1, j]
                    if i > 0:
                        acc += wv[i - 1] * x[i - 1, j]
                    v += cl * acc
                    acc = 0.0j
                    if j > 0:
                        acc += x[i, j - 1] * wv[j - 1]
                    if j + 1 < n:
                        acc += x[i, j + 1] * wv[j]
                    v -= cr * acc
                if use_down and i + 1 < n and j + 1 < n:
                    v += jump_down[i, j] * x[i + 1, j + 1]
                if use_up and i > 0 and j > 0:
                    v += jump_up[i - 1, j - 1] * x[i - 1, j - 1]
                o[i, j] = v


@njit(cache=True)
def rhs_position_diffusion(stack, out, mask, lam_coef, wv, cls, crs, use_w,
                           xv, pv, fric, diff, anti, inner):
    """Friction + position-diffusion dissipator.

    anti and inner are (n, n) complex work arrays: {p, X} and [x, X] are
    built per block, then their x-commutators accumulate into out.
    """
    depth, n, _ = stack.shape
    for b in range(depth):
        x = stack[b]
        o = out[b]
        cl = cls[b]
        cr = crs[b]
        lam = lam_coef[b]
        for i in range(n):
            for j in range(n):
                a = 0.0j
                z = 0.0j
                if i + 1 < n:
                    a += pv[i] * x[i + 1, j]
                    z += xv[i] * x[i + 1, j]
                if i > 0:
                    a -= pv[i - 1] * x[i - 1, j]
                    z += xv[i - 1] * x[i - 1, j]
                if j > 0:
                    a += x[i, j - 1] * pv[j - 1]
                    z -= x[i, j - 1] * xv[j - 1]
                if j + 1 < n:
                    a -= x[i, j + 1] * pv[j]
                    z -= x[i, j + 1] * xv[j]
                anti[i, j] = a
                inner[i, j] = z
        for i in range(n):
            for j in range(n):
                v = (mask[i, j] + lam) * x[i, j]
                if use_w:
                    acc = 0.0j
                    if i + 1 < n:
                        acc += wv[i] * x[i + 1, j]
                    if i > 0:
                        acc += wv[i - 1] * x[i - 1, j]
                    v += cl * acc
                    acc = 0.0j
                    if j > 0:
                        acc += x[i, j - 1] * wv[j - 1]
                    if j + 1 < n:
                        acc += x[i, j + 1] * wv[j]
                    v -= cr * acc
                fa = 0.0j
                fz = 0.0j
                if i + 1 < n:
                    fa += xv[i] * anti[i + 1, j]
                    fz += xv[i] * inner[i + 1, j]
                if i > 0:
                    fa += xv[i - 1] * anti[i - 1, j]
                    fz += xv[i - 1] * inner[i - 1, j]
                if j > 0:
                    fa -= anti[i, j - 1] * xv[j - 1]
                    fz -= inner[i, j - 1] * xv[j - 1]
                if j + 1 < n:
                    fa -= anti[i, j + 1] * xv[j]
                    fz -= inner[i, j + 1] * xv[j]
                o[i, j] = v + fric * fa + diff * fz


@njit(cache=True)
def stage_add(base, k, coef, out):
    """out = base + coef * k, elementwise."""
    flat_base = base.ravel()
    flat_k = k.ravel()
    flat_out = out.ravel()
    for idx in range(flat_base.size):
        flat_out[idx] = flat_base[idx] + coef * flat_k[idx]


@njit(cache=True)
def rk4_combine(rho, k1, k2, k3, k4, dt):
    """rho += dt/6 * (k1 + 2 k2 + 2 k3 + k4), elementwise in place."""
    f = dt / 6.0
    flat = rho.ravel()
    f1 = k1.ravel()
    f2 = k2.ravel()
    f3 = k3.ravel()
    f4 = k4.ravel()
    for idx in range(flat.size):
        flat[idx] += f * (f1[idx] + 2.0 * (f2[idx] + f3[idx]) + f4[idx])
