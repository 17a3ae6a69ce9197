"""Compiled sweep and iteration kernels.

These mirror the scalar node updates in solvers.py and the vectorized
operators in discretization.py exactly (same ordering pattern, same
candidate, selection, and filter logic) and exist purely for speed; the
python paths remain the reference and the two are compared in tests.

General Hamiltonians are python callables, which compiled kernels cannot
invoke, so the HJ kernels evaluate a small set of closed-form Hamiltonians
selected by an integer id (Hamiltonian.kernel_form); problems with other
Hamiltonians stay on the python paths.
"""

import numpy as np
from numba import njit

from .discretization import _DERIV_WEIGHTS

_W2 = np.ascontiguousarray(_DERIV_WEIGHTS[2], dtype=np.float64)
_W3 = np.ascontiguousarray(_DERIV_WEIGHTS[3], dtype=np.float64)
_W4 = np.ascontiguousarray(_DERIV_WEIGHTS[4], dtype=np.float64)


@njit(cache=True)
def _two_term(a, ea, b, eb, f):
    if b < a or (b == a and eb < ea):
        a, ea, b, eb = b, eb, a, ea
    z = a + ea * f
    if z <= b:
        return z
    A = 1.0 / (ea * ea)
    B = 1.0 / (eb * eb)
    disc = (A + B) * f * f - A * B * (a - b) ** 2
    if disc < 0.0:
        disc = 0.0
    return ((A * a + B * b) + np.sqrt(disc)) / (A + B)


@njit(cache=True)
def _all_finite(u):
    for v in u.flat:
        if not np.isfinite(v):
            return False
    return True


@njit(cache=True)
def _direction(ordn):
    # Orderings 0-3 run i outermost with sign pairs (+,+), (+,-), (-,-),
    # (-,+); orderings 4-7 repeat the pattern with j outermost.
    k = ordn % 4
    si = 1 if k < 2 else -1
    sj = 1 if (k == 0 or k == 3) else -1
    return ordn < 4, si, sj


@njit(cache=True)
def sweep_eikonal_monotone_2d(u, fixed, f, h, tol, max_cycles):
    N = u.shape[0]
    change = np.inf
    for cycle in range(max_cycles):
        change = 0.0
        for ordn in range(8):
            outer_i, si, sj = _direction(ordn)
            for p in range(N):
                for q in range(N):
                    if outer_i:
                        i = p if si > 0 else N - 1 - p
                        j = q if sj > 0 else N - 1 - q
                    else:
                        j = p if sj > 0 else N - 1 - p
                        i = q if si > 0 else N - 1 - q
                    if fixed[i, j]:
                        continue
                    a = np.inf
                    if i >= 1:
                        a = u[i - 1, j]
                    if i <= N - 2 and u[i + 1, j] < a:
                        a = u[i + 1, j]
                    b = np.inf
                    if j >= 1:
                        b = u[i, j - 1]
                    if j <= N - 2 and u[i, j + 1] < b:
                        b = u[i, j + 1]
                    z = _two_term(a, h, b, h, f[i, j])
                    if z < u[i, j]:
                        d = u[i, j] - z
                        if d > change:
                            change = d
                        u[i, j] = z
        if not _all_finite(u):
            return cycle + 1, np.nan, False
        if change <= tol:
            return cycle + 1, change, True
    return max_cycles, change, False


@njit(cache=True)
def sweep_eikonal_upwind2_2d(u, fixed, f, h, theta, mode, guard, tol, max_cycles):
    """Order-2 upwind sweep; mode 0 is pure accurate, mode 1 filtered.

    Pure mode skips one-sided stencils touching values above guard (still
    uninitialized); filtered mode needs no guard since garbage candidates
    fail the filter test and fall back to the monotone solve.
    """
    N = u.shape[0]
    change = np.inf
    for cycle in range(max_cycles):
        change = 0.0
        for ordn in range(8):
            outer_i, si, sj = _direction(ordn)
            for p in range(N):
                for q in range(N):
                    if outer_i:
                        i = p if si > 0 else N - 1 - p
                        j = q if sj > 0 else N - 1 - q
                    else:
                        j = p if sj > 0 else N - 1 - p
                        i = q if si > 0 else N - 1 - q
                    if fixed[i, j]:
                        continue
                    fi = f[i, j]
                    am = np.inf
                    if i >= 1:
                        am = u[i - 1, j]
                    if i <= N - 2 and u[i + 1, j] < am:
                        am = u[i + 1, j]
                    bm = np.inf
                    if j >= 1:
                        bm = u[i, j - 1]
                    if j <= N - 2 and u[i, j + 1] < bm:
                        bm = u[i, j + 1]
                    zM = _two_term(am, h, bm, h, fi)

                    wx = np.inf
                    has_x = False
                    if i >= 2:
                        u1 = u[i - 1, j]
                        u2 = u[i - 2, j]
                        if mode == 1 or (u1 < guard and u2 < guard):
                            wx = (4.0 * u1 - u2) / 3.0
                            has_x = True
                    if i <= N - 3:
                        u1 = u[i + 1, j]
                        u2 = u[i + 2, j]
                        if mode == 1 or (u1 < guard and u2 < guard):
                            w = (4.0 * u1 - u2) / 3.0
                            if w < wx:
                                wx = w
                            has_x = True
                    wy = np.inf
                    has_y = False
                    if j >= 2:
                        u1 = u[i, j - 1]
                        u2 = u[i, j - 2]
                        if mode == 1 or (u1 < guard and u2 < guard):
                            wy = (4.0 * u1 - u2) / 3.0
                            has_y = True
                    if j <= N - 3:
                        u1 = u[i, j + 1]
                        u2 = u[i, j + 2]
                        if mode == 1 or (u1 < guard and u2 < guard):
                            w = (4.0 * u1 - u2) / 3.0
                            if w < wy:
                                wy = w
                            has_y = True
                    ax = wx if has_x else am
                    ex = 2.0 * h / 3.0 if has_x else h
                    ay = wy if has_y else bm
                    ey = 2.0 * h / 3.0 if has_y else h
                    zA = _two_term(ax, ex, ay, ey, fi)

                    if mode == 0:
                        z = zA
                    else:
                        # Branch test at the tentative accurate value. The
                        # operator-side availability ignores the guard, like
                        # the scalar evaluation.
                        axM = (zA - am) / h
                        if axM < 0.0:
                            axM = 0.0
                        ayM = (zA - bm) / h
                        if ayM < 0.0:
                            ayM = 0.0
                        FM = np.sqrt(axM * axM + ayM * ayM)
                        if has_x:
                            axA = 1.5 * (zA - wx) / h
                        else:
                            axA = axM
                        if has_y:
                            ayA = 1.5 * (zA - wy) / h
                        else:
                            ayA = ayM
                        FA = np.sqrt(axA * axA + ayA * ayA)
                        z = zA if abs(FA - FM) <= theta else zM
                    if z < u[i, j]:
                        d = u[i, j] - z
                        if d > change:
                            change = d
                        u[i, j] = z
        if not _all_finite(u):
            return cycle + 1, np.nan, False
        if change <= tol:
            return cycle + 1, change, True
    return max_cycles, change, False


@njit(cache=True)
def _axis_mono(w, e, center):
    # max{(center - w)/h, -(e - center)/h, 0} with h folded in by the caller
    a = center - w
    b = center - e
    m = a if a > b else b
    return m if m > 0.0 else 0.0


@njit(cache=True)
def _undiv_diff(v, start, order):
    # Undivided forward difference of the given order (2..4) at start.
    if order == 2:
        return v[start + 2] - 2.0 * v[start + 1] + v[start]
    if order == 3:
        return v[start + 3] - 3.0 * v[start + 2] + 3.0 * v[start + 1] - v[start]
    return (
        v[start + 4]
        - 4.0 * v[start + 3]
        + 6.0 * v[start + 2]
        - 4.0 * v[start + 1]
        + v[start]
    )


@njit(cache=True)
def _eno_side(v, N, i, side, n, W):
    """Order-n ENO one-sided derivative (times h) at index i along v.

    Mirrors the vectorized selection: the two-node stencil grows toward the
    smaller undivided difference, with extensions that would leave the range
    forced the other way. W is the (n+1)x(n+1) derivative-weight table.
    Returns (value * h, valid); callers divide by the spacing.
    """
    if N < n + 1:
        return 0.0, False
    if side > 0:
        if i > N - 2:
            return 0.0, False
        left = i if i <= N - 2 else N - 2
    else:
        if i < 1:
            return 0.0, False
        left = i - 1
    for r in range(1, n):
        hi_start = N - (r + 2)
        can_left = left - 1 >= 0
        can_right = left + r + 1 <= N - 1
        lo = left - 1
        if lo < 0:
            lo = 0
        elif lo > hi_start:
            lo = hi_start
        hi = left
        if hi > hi_start:
            hi = hi_start
        ddL = abs(_undiv_diff(v, lo, r + 1))
        ddR = abs(_undiv_diff(v, hi, r + 1))
        if side > 0:
            prefer_left = ddL < ddR
        else:
            prefer_left = ddL <= ddR
        if can_left and ((not can_right) or prefer_left):
            left -= 1
    pos = i - left
    acc = 0.0
    for k in range(n + 1):
        acc += W[pos, k] * v[left + k]
    return acc, True


@njit(cache=True)
def _weights_for(n):
    if n == 3:
        return _W3
    if n == 4:
        return _W4
    return _W2


@njit(cache=True)
def sweep_defect_eikonal_1d(
    u, fixed, f, h, theta, kind, n, has_filter, omega, d, tol, max_cycles
):
    """Defect-corrected Gauss-Seidel for 1D accurate eikonal schemes.

    kind 0 uses the order-2 centered derivative, kind 1 the order-n ENO
    pair. Each visit re-expresses the selected (filtered or pure accurate)
    operator as the monotone one plus a frozen defect and applies the
    explicit monotone local solve with the corrected right-hand side.
    Updates are plain assignments: the defect breaks the causal ordering
    that justifies the eikonal min-update.
    """
    N = u.shape[0]
    W = _weights_for(n)
    change = np.inf
    for cycle in range(max_cycles):
        change = 0.0
        for ordn in range(2):
            for p in range(N):
                i = p if ordn == 0 else N - 1 - p
                if fixed[i]:
                    continue
                FM = _axis_mono(u[i - 1], u[i + 1], u[i]) / h
                if kind == 0:
                    FA = abs(u[i + 1] - u[i - 1]) / (2.0 * h)
                else:
                    vm, okm = _eno_side(u, N, i, -1, n, W)
                    vp, okp = _eno_side(u, N, i, 1, n, W)
                    FA = FM
                    if okm or okp:
                        FA = -np.inf
                        if okm and vm / h > FA:
                            FA = vm / h
                        if okp and -vp / h > FA:
                            FA = -vp / h
                if has_filter == 0 or abs(FA - FM) <= theta:
                    dn = FA - FM
                else:
                    dn = 0.0
                di = (1.0 - omega) * d[i] + omega * dn
                d[i] = di
                w = u[i - 1] if u[i - 1] < u[i + 1] else u[i + 1]
                z = w + h * (f[i] - di)
                delta = abs(z - u[i])
                if delta > change:
                    change = delta
                u[i] = z
        if not _all_finite(u):
            return cycle + 1, np.nan, False
        if change <= tol:
            return cycle + 1, change, True
    return max_cycles, change, False


@njit(cache=True)
def _h_eval(hid, x, p):
    # Closed-form Hamiltonians available to compiled kernels.
    if hid == 1:
        return p * p
    return np.cos(p) ** 2 + abs(p)


@njit(cache=True)
def _clamp_slope(pc, bound):
    # Central slopes where |dH/dp| exceeds sigma make the Gauss-Seidel map
    # expansive (runaway at fine h); clamping the argument at the crossover
    # keeps the map nonexpansive without moving the fixed point, whose
    # slopes sit inside the bound. bound is inf for sublinear Hamiltonians.
    if pc > bound:
        return bound
    if pc < -bound:
        return -bound
    return pc


@njit(cache=True)
def sweep_hj_monotone_1d(u, fixed, f, x, h, sigma, hid, pbound, tol, max_cycles):
    """Gauss-Seidel sweeps with the Lax-Friedrichs local solve.

    The central slope is z-free, so each visit is the closed-form update
    z = (h/sigma) (f - H(central)) + (east + west)/2.
    """
    N = u.shape[0]
    change = np.inf
    for cycle in range(max_cycles):
        change = 0.0
        for ordn in range(2):
            for p in range(N):
                i = p if ordn == 0 else N - 1 - p
                if fixed[i]:
                    continue
                pc = _clamp_slope((u[i + 1] - u[i - 1]) / (2.0 * h), pbound)
                Hval = _h_eval(hid, x[i], pc)
                z = (h / sigma) * (f[i] - Hval) + 0.5 * (u[i + 1] + u[i - 1])
                delta = abs(z - u[i])
                if delta > change:
                    change = delta
                u[i] = z
        if not _all_finite(u):
            return cycle + 1, np.nan, False
        if change <= tol:
            return cycle + 1, change, True
    return max_cycles, change, False


@njit(cache=True)
def sweep_hj_defect_up2_1d(
    u, fixed, f, x, h, sigma, hid, pbound, theta, has_filter, omega, d, tol, max_cycles
):
    """Defect-corrected Gauss-Seidel for the 1D order-2 upwind HJ scheme.

    The Lax-Friedrichs local solve absorbs the lagged gap between the
    (filtered) upwind operator and the monotone one, mirroring the eikonal
    defect sweeps.
    """
    N = u.shape[0]
    change = np.inf
    for cycle in range(max_cycles):
        change = 0.0
        for ordn in range(2):
            for p in range(N):
                i = p if ordn == 0 else N - 1 - p
                if fixed[i]:
                    continue
                pp1 = (u[i + 1] - u[i]) / h
                pm1 = (u[i] - u[i - 1]) / h
                FM = _h_eval(hid, x[i], 0.5 * (pp1 + pm1)) - 0.5 * sigma * (pp1 - pm1)
                if i + 2 <= N - 1:
                    dp = (-1.5 * u[i] + 2.0 * u[i + 1] - 0.5 * u[i + 2]) / h
                else:
                    dp = pp1
                if i - 2 >= 0:
                    dm = (1.5 * u[i] - 2.0 * u[i - 1] + 0.5 * u[i - 2]) / h
                else:
                    dm = pm1
                FA = _h_eval(hid, x[i], 0.5 * (dp + dm)) - 0.5 * sigma * (dp - dm)
                if has_filter == 0 or abs(FA - FM) <= theta:
                    dn = FA - FM
                else:
                    dn = 0.0
                di = (1.0 - omega) * d[i] + omega * dn
                d[i] = di
                pc = _clamp_slope((u[i + 1] - u[i - 1]) / (2.0 * h), pbound)
                Hc = _h_eval(hid, x[i], pc)
                z = (h / sigma) * (f[i] - di - Hc) + 0.5 * (u[i + 1] + u[i - 1])
                delta = abs(z - u[i])
                if delta > change:
                    change = delta
                u[i] = z
        if not _all_finite(u):
            return cycle + 1, np.nan, False
        if change <= tol:
            return cycle + 1, change, True
    return max_cycles, change, False


@njit(cache=True)
def _hj_residual_pass(u, fixed, f, x, h, sigma, hid, kind, n, theta, has_filter, W, res):
    """Residual of the selected 1D HJ operator; kind 0 centered, 1 ENO, 2 monotone."""
    N = u.shape[0]
    res_norm = 0.0
    for i in range(N):
        if fixed[i]:
            res[i] = 0.0
            continue
        pp1 = (u[i + 1] - u[i]) / h
        pm1 = (u[i] - u[i - 1]) / h
        if kind == 2 or has_filter != 0:
            FM = _h_eval(hid, x[i], 0.5 * (pp1 + pm1)) - 0.5 * sigma * (pp1 - pm1)
        else:
            FM = 0.0
        if kind == 2:
            F = FM
        else:
            if kind == 0:
                FA = _h_eval(hid, x[i], (u[i + 1] - u[i - 1]) / (2.0 * h))
            else:
                vm, okm = _eno_side(u, N, i, -1, n, W)
                vp, okp = _eno_side(u, N, i, 1, n, W)
                dm = vm / h if okm else pm1
                dp = vp / h if okp else pp1
                FA = _h_eval(hid, x[i], 0.5 * (dp + dm)) - 0.5 * sigma * (dp - dm)
            if has_filter != 0:
                F = FA if abs(FA - FM) <= theta else FM
            else:
                F = FA
        r = F - f[i]
        res[i] = r
        if abs(r) > res_norm:
            res_norm = abs(r)
    return res_norm


@njit(cache=True)
def _eik_residual_pass(u, fixed, f, h, kind, n, theta, has_filter, W, res):
    """Residual of the selected 1D eikonal operator; kind 0 centered, 1 ENO."""
    N = u.shape[0]
    res_norm = 0.0
    for i in range(N):
        if fixed[i]:
            res[i] = 0.0
            continue
        FM = _axis_mono(u[i - 1], u[i + 1], u[i]) / h
        if kind == 0:
            FA = abs(u[i + 1] - u[i - 1]) / (2.0 * h)
        else:
            vm, okm = _eno_side(u, N, i, -1, n, W)
            vp, okp = _eno_side(u, N, i, 1, n, W)
            FA = FM
            if okm or okp:
                FA = -np.inf
                if okm and vm / h > FA:
                    FA = vm / h
                if okp and -vp / h > FA:
                    FA = -vp / h
        if has_filter == 0 or abs(FA - FM) <= theta:
            F = FA
        else:
            F = FM
        r = F - f[i]
        res[i] = r
        if abs(r) > res_norm:
            res_norm = abs(r)
    return res_norm


@njit(cache=True)
def _jacobi_drive(u, fixed, res, alpha, best_u, avg_u, state, tol, stall_window):
    """Shared Jacobi bookkeeping: stall tracking, orbit average, update step.

    state holds (best, since_best, avg_count). Non-convergent iterations on
    these operators either hover near a fixed point or wander a bounded
    orbit; the time average over the stall window is the representative
    state in both regimes, so that is what a stalled run returns. Returns
    0 to continue, 1 converged, 2 stalled, 3 diverged.
    """
    N = u.shape[0]
    res_norm = 0.0
    for i in range(N):
        if abs(res[i]) > res_norm:
            res_norm = abs(res[i])
    if res_norm <= tol:
        return 1, res_norm
    if not np.isfinite(res_norm):
        return 3, res_norm
    if res_norm < 0.99 * state[0]:
        state[0] = res_norm
        state[1] = 0.0
        state[2] = 0.0
        for i in range(N):
            best_u[i] = u[i]
            avg_u[i] = 0.0
    else:
        state[1] += 1.0
        state[2] += 1.0
        for i in range(N):
            avg_u[i] += u[i]
        if state[1] >= stall_window:
            return 2, res_norm
    for i in range(N):
        if not fixed[i]:
            u[i] -= alpha * res[i]
    return 0, res_norm


@njit(cache=True)
def jacobi_hj_1d(
    u, fixed, f, x, h, sigma, hid, kind, n, theta, has_filter,
    alpha, tol, max_iter, stall_window,
):
    """Damped Jacobi on the selected 1D HJ operator with stall detection.

    kind 0 is the centered derivative, kind 1 the order-n ENO pair (invalid
    sides fall back to first-order one-sided slopes, matching the vectorized
    operator), kind 2 the monotone Lax-Friedrichs operator alone. A stalled
    run returns the orbit average over the stall window; a diverged run the
    best residual state seen.
    """
    N = u.shape[0]
    W = _weights_for(n)
    res = np.zeros(N)
    best_u = u.copy()
    avg_u = np.zeros(N)
    state = np.array([np.inf, 0.0, 0.0])
    it = 0
    flag = 0
    res_norm = np.inf
    for it in range(1, max_iter + 1):
        res_norm = _hj_residual_pass(
            u, fixed, f, x, h, sigma, hid, kind, n, theta, has_filter, W, res
        )
        flag, res_norm = _jacobi_drive(
            u, fixed, res, alpha, best_u, avg_u, state, tol, stall_window
        )
        if flag != 0:
            break
    if flag == 2 and state[2] > 0.0:
        for i in range(N):
            u[i] = avg_u[i] / state[2]
        if _all_finite(u):
            res_norm = _hj_residual_pass(
                u, fixed, f, x, h, sigma, hid, kind, n, theta, has_filter, W, res
            )
        else:
            u[:] = best_u
            res_norm = state[0]
    elif flag != 1 and not res_norm <= state[0]:
        u[:] = best_u
        res_norm = state[0]
    return it, res_norm, flag == 1


@njit(cache=True)
def jacobi_eikonal_1d(
    u, fixed, f, h, kind, n, theta, has_filter,
    alpha, tol, max_iter, stall_window,
):
    """Damped Jacobi on the selected 1D eikonal operator; see jacobi_hj_1d."""
    N = u.shape[0]
    W = _weights_for(n)
    res = np.zeros(N)
    best_u = u.copy()
    avg_u = np.zeros(N)
    state = np.array([np.inf, 0.0, 0.0])
    it = 0
    flag = 0
    res_norm = np.inf
    for it in range(1, max_iter + 1):
        res_norm = _eik_residual_pass(
            u, fixed, f, h, kind, n, theta, has_filter, W, res
        )
        flag, res_norm = _jacobi_drive(
            u, fixed, res, alpha, best_u, avg_u, state, tol, stall_window
        )
        if flag != 0:
            break
    if flag == 2 and state[2] > 0.0:
        for i in range(N):
            u[i] = avg_u[i] / state[2]
        if _all_finite(u):
            res_norm = _eik_residual_pass(
                u, fixed, f, h, kind, n, theta, has_filter, W, res
            )
        else:
            u[:] = best_u
            res_norm = state[0]
    elif flag != 1 and not res_norm <= state[0]:
        u[:] = best_u
        res_norm = state[0]
    return it, res_norm, flag == 1


@njit(cache=True)
def _axis_accurate2(v, N, i, h, kind, axM):
    """Order-2 accurate |dv/dx| along one line with the edge fallbacks.

    kind 0 centered (grid-edge nodes fall back to the one-sided rule),
    1 order-2 ENO, 2 one-sided order-2; where no stencil fits at all the
    monotone axis term axM is returned.
    """
    if kind == 0:
        if 1 <= i <= N - 2:
            return abs(v[i + 1] - v[i - 1]) / (2.0 * h)
        kind = 2
    best = -np.inf
    has = False
    if kind == 2:
        if i >= 2:
            dm = (1.5 * v[i] - 2.0 * v[i - 1] + 0.5 * v[i - 2]) / h
            if dm > best:
                best = dm
            has = True
        if i <= N - 3:
            dp = (-1.5 * v[i] + 2.0 * v[i + 1] - 0.5 * v[i + 2]) / h
            if -dp > best:
                best = -dp
            has = True
    else:
        vm, okm = _eno_side(v, N, i, -1, 2, _W2)
        vp, okp = _eno_side(v, N, i, 1, 2, _W2)
        if okm:
            if vm / h > best:
                best = vm / h
            has = True
        if okp:
            if -vp / h > best:
                best = -vp / h
            has = True
    return best if has else axM


@njit(cache=True)
def sweep_eikonal_defect2_2d(u, fixed, f, h, theta, kind_acc, has_filter, omega, d, tol, max_cycles):
    """Defect-corrected sweeps for the 2D order-2 accurate eikonal schemes.

    kind_acc: 0 centered, 1 ENO, 2 one-sided upwind. Writes are plain
    assignments (see the 1D variant); grid-edge nodes use whichever
    one-sided terms exist, matching the pointwise operator.
    """
    N = u.shape[0]
    change = np.inf
    for cycle in range(max_cycles):
        change = 0.0
        for ordn in range(8):
            outer_i, si, sj = _direction(ordn)
            for p in range(N):
                for q in range(N):
                    if outer_i:
                        i = p if si > 0 else N - 1 - p
                        j = q if sj > 0 else N - 1 - q
                    else:
                        j = p if sj > 0 else N - 1 - p
                        i = q if si > 0 else N - 1 - q
                    if fixed[i, j]:
                        continue
                    ui = u[i, j]
                    am = np.inf
                    axM = 0.0
                    if i >= 1:
                        am = u[i - 1, j]
                        t = (ui - am) / h
                        if t > axM:
                            axM = t
                    if i <= N - 2:
                        uE = u[i + 1, j]
                        if uE < am:
                            am = uE
                        t = (ui - uE) / h
                        if t > axM:
                            axM = t
                    bm = np.inf
                    ayM = 0.0
                    if j >= 1:
                        bm = u[i, j - 1]
                        t = (ui - bm) / h
                        if t > ayM:
                            ayM = t
                    if j <= N - 2:
                        uN = u[i, j + 1]
                        if uN < bm:
                            bm = uN
                        t = (ui - uN) / h
                        if t > ayM:
                            ayM = t
                    FM = np.sqrt(axM * axM + ayM * ayM)
                    axA = _axis_accurate2(u[:, j], N, i, h, kind_acc, axM)
                    ayA = _axis_accurate2(u[i, :], N, j, h, kind_acc, ayM)
                    FA = np.sqrt(axA * axA + ayA * ayA)
                    if has_filter == 0 or abs(FA - FM) <= theta:
                        dn = FA - FM
                    else:
                        dn = 0.0
                    dij = (1.0 - omega) * d[i, j] + omega * dn
                    d[i, j] = dij
                    z = _two_term(am, h, bm, h, f[i, j] - dij)
                    delta = abs(z - ui)
                    if delta > change:
                        change = delta
                    u[i, j] = z
        if not _all_finite(u):
            return cycle + 1, np.nan, False
        if change <= tol:
            return cycle + 1, change, True
    return max_cycles, change, False
