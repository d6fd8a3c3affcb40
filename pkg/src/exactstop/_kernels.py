"""Compiled inner loops shared by the public model, engine and Monte-Carlo APIs.

Everything here operates on plain floats and arrays so it can run under
numba in ``nogil`` mode. Public wrappers live in :mod:`exactstop.models`,
:mod:`exactstop.engine` and :mod:`exactstop.montecarlo`.
"""

import math

import numpy as np
from numba import njit

LINE = 0
ELLIPSE = 1

# relative pivot threshold below which the 5x6 conic system counts as rank deficient
_PIVOT_TOL = 1e-10
_MIN_SEGMENT = 1e-9
_CEIL_SLACK = 1e-9


# ---------------------------------------------------------------------------
# random sampling


@njit(cache=True, nogil=True)
def uniform_index(rng, m):
    """Uniform integer in [0, m) from one 53-bit double (bias below m * 2**-53)."""
    j = int(rng.random() * m)
    if j >= m:
        j = m - 1
    return j


@njit(cache=True, nogil=True)
def partial_shuffle(rng, perm, k, picks):
    """First k steps of a Fisher-Yates shuffle of ``perm``; swap targets go to ``picks``."""
    n = perm.shape[0]
    for i in range(k):
        j = i + uniform_index(rng, n - i)
        picks[i] = j
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp


@njit(cache=True, nogil=True)
def undo_shuffle(perm, k, picks):
    for i in range(k - 1, -1, -1):
        j = picks[i]
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp


# ---------------------------------------------------------------------------
# stopping math


@njit(cache=True, nogil=True)
def approx_prob(n, inliers, k):
    return (inliers / n) ** k


@njit(cache=True, nogil=True)
def exact_prob(n, inliers, k):
    if inliers < k:
        return 0.0
    prob = 1.0
    for i in range(k):
        prob *= (inliers - i) / (n - i)
    return prob


@njit(cache=True, nogil=True)
def iterations_for(prob, log_fail, cap):
    """Smallest N with (1 - prob)**N <= 1 - s, clamped to ``cap``.

    ``log_fail`` is log(1 - s). Returns ``cap`` when prob is zero.
    """
    if prob >= 1.0:
        return min(1.0, cap)
    if prob <= 0.0:
        return cap
    x = log_fail / math.log1p(-prob)
    # also catches overflow to inf for subnormal prob
    if x >= cap:
        return cap
    n_iter = float(math.ceil(x - _CEIL_SLACK * max(1.0, x)))
    if n_iter < 1.0:
        n_iter = 1.0
    return min(n_iter, cap)


# ---------------------------------------------------------------------------
# line model: normal . x = offset


@njit(cache=True, nogil=True)
def fit_line_into(x1, y1, x2, y2, out):
    dx = x2 - x1
    dy = y2 - y1
    length = math.hypot(dx, dy)
    if length < _MIN_SEGMENT:
        return False
    nx = -dy / length
    ny = dx / length
    if ny < 0.0 or (ny == 0.0 and nx < 0.0):
        nx = -nx
        ny = -ny
    out[0] = nx + 0.0  # no negative zero
    out[1] = ny
    out[2] = nx * 0.5 * (x1 + x2) + ny * 0.5 * (y1 + y2)
    return True


# ---------------------------------------------------------------------------
# ellipse model: conic a x^2 + b xy + c y^2 + d x + e y + f = 0


@njit(cache=True, nogil=True)
def _conic_nullspace(m, sol):
    """Null vector of a 5x6 matrix by fully pivoted elimination (``m`` is overwritten)."""
    cols = np.arange(6)
    first = 0.0
    for r in range(5):
        best = -1.0
        pi = r
        pj = r
        for i in range(r, 5):
            for j in range(r, 6):
                v = abs(m[i, j])
                if v > best:
                    best = v
                    pi = i
                    pj = j
        if r == 0:
            first = best
            if first == 0.0:
                return False
        if best <= _PIVOT_TOL * first:
            return False
        if pi != r:
            for j in range(6):
                tmp = m[r, j]
                m[r, j] = m[pi, j]
                m[pi, j] = tmp
        if pj != r:
            for i in range(5):
                tmp = m[i, r]
                m[i, r] = m[i, pj]
                m[i, pj] = tmp
            tc = cols[r]
            cols[r] = cols[pj]
            cols[pj] = tc
        for i in range(r + 1, 5):
            factor = m[i, r] / m[r, r]
            if factor != 0.0:
                for j in range(r, 6):
                    m[i, j] -= factor * m[r, j]
    x = np.empty(6)
    x[5] = 1.0
    for r in range(4, -1, -1):
        acc = m[r, 5]
        for j in range(r + 1, 5):
            acc += m[r, j] * x[j]
        x[r] = -acc / m[r, r]
    for j in range(6):
        sol[cols[j]] = x[j]
    return True


@njit(cache=True, nogil=True)
def canonicalize_conic(conic):
    """Scale to unit norm with a >= 0 (first nonzero coefficient positive if a == 0)."""
    norm = 0.0
    for i in range(6):
        norm += conic[i] * conic[i]
    norm = math.sqrt(norm)
    if norm == 0.0:
        return False
    sign = 1.0
    for i in range(6):
        if conic[i] != 0.0:
            if conic[i] < 0.0:
                sign = -1.0
            break
    for i in range(6):
        conic[i] = sign * conic[i] / norm
    return True


@njit(cache=True, nogil=True)
def conic_geometry(conic, geo):
    """Centre, major-axis direction and semi-axes of an ellipse conic.

    Writes ``geo = [cx, cy, cos(phi), sin(phi), major, minor]`` and returns
    False when the conic is not a real, non-degenerate ellipse.
    """
    a = conic[0]
    b = conic[1]
    c = conic[2]
    d = conic[3]
    e = conic[4]
    f = conic[5]
    disc = 4.0 * a * c - b * b
    if not disc > 0.0:
        return False
    cx = (b * e - 2.0 * c * d) / disc
    cy = (b * d - 2.0 * a * e) / disc
    fc = f + 0.5 * (d * cx + e * cy)
    half_sum = 0.5 * (a + c)
    radius = math.hypot(0.5 * (a - c), 0.5 * b)
    lam_hi = half_sum + radius
    lam_lo = half_sum - radius
    if lam_hi < 0.0:
        # both eigenvalues negative: flip to the equivalent positive form
        lam_hi, lam_lo = -lam_lo, -lam_hi
        fc = -fc
    if not (lam_lo > 0.0 and fc < 0.0):
        return False
    major = math.sqrt(-fc / lam_lo)
    minor = math.sqrt(-fc / lam_hi)
    if not (math.isfinite(major) and math.isfinite(minor)):
        return False
    # eigenvector of the larger eigenvalue points along the minor axis
    theta = 0.5 * math.atan2(b, a - c)
    phi = theta + 0.5 * math.pi
    geo[0] = cx
    geo[1] = cy
    geo[2] = math.cos(phi)
    geo[3] = math.sin(phi)
    geo[4] = major
    geo[5] = minor
    return True


@njit(cache=True, nogil=True)
def fit_conic_into(pts, out):
    """Ellipse through five points. Returns False for degenerate or non-ellipse samples."""
    mx = 0.0
    my = 0.0
    for i in range(5):
        mx += pts[i, 0]
        my += pts[i, 1]
    mx /= 5.0
    my /= 5.0
    scale = 0.0
    for i in range(5):
        scale += math.hypot(pts[i, 0] - mx, pts[i, 1] - my)
    scale /= 5.0
    if not scale > 0.0:
        return False
    m = np.empty((5, 6))
    for i in range(5):
        u = (pts[i, 0] - mx) / scale
        v = (pts[i, 1] - my) / scale
        m[i, 0] = u * u
        m[i, 1] = u * v
        m[i, 2] = v * v
        m[i, 3] = u
        m[i, 4] = v
        m[i, 5] = 1.0
    q = np.empty(6)
    if not _conic_nullspace(m, q):
        return False
    # undo the normalisation u = (x - mx) / scale, multiplied through by scale^2
    a, b, c, d, e, f = q[0], q[1], q[2], q[3], q[4], q[5]
    out[0] = a
    out[1] = b
    out[2] = c
    out[3] = -2.0 * a * mx - b * my + d * scale
    out[4] = -2.0 * c * my - b * mx + e * scale
    out[5] = (a * mx * mx + b * mx * my + c * my * my
              - d * scale * mx - e * scale * my + f * scale * scale)
    if not canonicalize_conic(out):
        return False
    geo = np.empty(6)
    return conic_geometry(out, geo)


@njit(cache=True, nogil=True)
def _robust_length(v0, v1):
    return math.hypot(v0, v1)


@njit(cache=True, nogil=True)
def _bisect_root(r0, d, z0, z1, g):
    # root in t = s + 1 rather than s; keeps full precision when the point
    # sits near the centre and the multiplier approaches -1
    n0 = r0 * z0
    t0 = z1
    t1 = 1.0 if g < 0.0 else _robust_length(n0, z1)
    t = t0
    for _ in range(2200):
        t = 0.5 * (t0 + t1)
        if t == t0 or t == t1:
            break
        ratio0 = n0 / (t + d)
        ratio1 = z1 / t
        g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0
        if g > 0.0:
            t0 = t
        elif g < 0.0:
            t1 = t
        else:
            break
    return t


@njit(cache=True, nogil=True)
def canonical_distance(e0, e1, y0, y1):
    """Distance from (y0, y1) to the axis-aligned ellipse with semi-axes e0 >= e1.

    Closest-point condition solved by bisection on the Lagrange parameter
    (first-quadrant reduction, works for interior points as well).
    """
    y0 = abs(y0)
    y1 = abs(y1)
    # distance is 1-Lipschitz, so flushing negligible coordinates costs at most
    # 1e-150 * e and keeps the root-finding out of subnormal arithmetic
    if y0 < 1e-150 * e0:
        y0 = 0.0
    if y1 < 1e-150 * e1:
        y1 = 0.0
    if e0 == e1:
        return abs(math.hypot(y0, y1) - e0)
    if y1 > 0.0:
        if y0 > 0.0:
            z0 = y0 / e0
            z1 = y1 / e1
            g = z0 * z0 + z1 * z1 - 1.0
            if g != 0.0:
                r0 = (e0 / e1) * (e0 / e1)
                d = ((e0 - e1) / e1) * ((e0 + e1) / e1)
                t = _bisect_root(r0, d, z0, z1, g)
                x0 = r0 * y0 / (t + d)
                x1 = y1 / t
                return math.hypot(x0 - y0, x1 - y1)
            return 0.0
        return abs(y1 - e1)
    numer0 = e0 * y0
    denom0 = e0 * e0 - e1 * e1
    if numer0 < denom0:
        xde0 = numer0 / denom0
        x0 = e0 * xde0
        x1 = e1 * math.sqrt(max(0.0, 1.0 - xde0 * xde0))
        return math.hypot(x0 - y0, x1)
    return abs(y0 - e0)


@njit(cache=True, nogil=True)
def ellipse_point_distance(geo, x, y):
    dx = x - geo[0]
    dy = y - geo[1]
    u = geo[2] * dx + geo[3] * dy
    v = -geo[3] * dx + geo[2] * dy
    return canonical_distance(geo[4], geo[5], u, v)


@njit(cache=True, nogil=True)
def ellipse_distances(geo, pts, out):
    for i in range(pts.shape[0]):
        out[i] = ellipse_point_distance(geo, pts[i, 0], pts[i, 1])


# ---------------------------------------------------------------------------
# hypothesis verification


@njit(cache=True, nogil=True)
def count_line(params, pts, cutoff):
    """Inlier count and residual sum (geometric units) for a line hypothesis."""
    count = 0
    total = 0.0
    for i in range(pts.shape[0]):
        d = abs(params[0] * pts[i, 0] + params[1] * pts[i, 1] - params[2])
        if d <= cutoff:
            count += 1
            total += d
    return count, total


@njit(cache=True, nogil=True)
def count_ellipse(geo, pts, cutoff):
    """Inlier count and residual sum for an ellipse hypothesis.

    A point at radial scale r (r = 1 on the curve) lies between |r - 1| * minor
    and |r - 1| * major from the curve; points whose lower bound already exceeds
    the cutoff skip the exact distance.
    """
    cx = geo[0]
    cy = geo[1]
    cs = geo[2]
    sn = geo[3]
    major = geo[4]
    minor = geo[5]
    count = 0
    total = 0.0
    for i in range(pts.shape[0]):
        dx = pts[i, 0] - cx
        dy = pts[i, 1] - cy
        u = cs * dx + sn * dy
        v = -sn * dx + cs * dy
        r = math.sqrt((u / major) ** 2 + (v / minor) ** 2)
        if abs(r - 1.0) * minor > cutoff:
            continue
        d = canonical_distance(major, minor, u, v)
        if d <= cutoff:
            count += 1
            total += d
    return count, total


# ---------------------------------------------------------------------------
# RANSAC loop


@njit(cache=True, nogil=True)
def ransac_loop(rng, pts, family, sigma, threshold, log_fail, max_iter, stop_on_approx):
    """Hypothesize-and-verify loop recording the best model at both stopping points.

    Returns ``(params_a, count_a, iters_a, params_e, count_e, iters_e, failures)``.
    ``params`` hold 3 line or 6 conic coefficients; a count of -1 marks that
    no verifiable hypothesis existed at that stop. With ``stop_on_approx`` the
    loop ends at the approximate stop (the exact outputs then mirror it).
    """
    n = pts.shape[0]
    k = 2 if family == LINE else 5
    n_par = 3 if family == LINE else 6
    cutoff = threshold * sigma
    perm = np.arange(n)
    picks = np.empty(k, np.int64)
    sample = np.empty((k, 2))
    cand = np.empty(n_par)
    geo = np.empty(6)
    best = np.zeros(n_par)
    best_count = -1
    best_resid = math.inf
    snap_a = np.zeros(n_par)
    snap_a_count = -1
    iters_a = -1.0
    need_a = max_iter
    need_e = max_iter
    failures = 0
    it = 0.0
    while True:
        it += 1.0
        partial_shuffle(rng, perm, k, picks)
        for j in range(k):
            sample[j, 0] = pts[perm[j], 0]
            sample[j, 1] = pts[perm[j], 1]
        undo_shuffle(perm, k, picks)
        if family == LINE:
            ok = fit_line_into(sample[0, 0], sample[0, 1], sample[1, 0], sample[1, 1], cand)
        else:
            ok = fit_conic_into(sample, cand)
            if ok:
                ok = conic_geometry(cand, geo)
        if not ok:
            failures += 1
        else:
            if family == LINE:
                count, total = count_line(cand, pts, cutoff)
            else:
                count, total = count_ellipse(geo, pts, cutoff)
            if count >= k + 1:
                resid = total / (sigma * count)
                if count > best_count or (count == best_count and resid < best_resid):
                    improved = count > best_count
                    best_count = count
                    best_resid = resid
                    for j in range(n_par):
                        best[j] = cand[j]
                    if improved:
                        need_a = iterations_for(approx_prob(n, count, k), log_fail, max_iter)
                        need_e = iterations_for(exact_prob(n, count, k), log_fail, max_iter)
        if iters_a < 0.0 and it >= need_a:
            iters_a = it
            snap_a_count = best_count
            for j in range(n_par):
                snap_a[j] = best[j]
            if stop_on_approx:
                return snap_a, snap_a_count, iters_a, snap_a.copy(), snap_a_count, iters_a, failures
        if it >= need_e:
            return snap_a, snap_a_count, iters_a, best, best_count, it, failures


# ---------------------------------------------------------------------------
# solver-free Monte-Carlo


@njit(cache=True, nogil=True)
def count_successes(rng, n, inliers, k, n_iter, trials):
    """Trials (out of ``trials``) in which one of ``n_iter`` uniform k-subsets was all-inlier.

    Items ``0 .. inliers-1`` are the inliers. Each subset is drawn element by
    element without replacement and abandoned at its first outlier.
    """
    perm = np.arange(n)
    picks = np.empty(k, np.int64)
    hits = 0
    for _ in range(trials):
        success = False
        for _ in range(n_iter):
            drawn = 0
            clean = True
            for i in range(k):
                j = i + uniform_index(rng, n - i)
                picks[i] = j
                tmp = perm[i]
                perm[i] = perm[j]
                perm[j] = tmp
                drawn += 1
                if perm[i] >= inliers:
                    clean = False
                    break
            undo_shuffle(perm, drawn, picks)
            if clean:
                success = True
                break
        if success:
            hits += 1
    return hits
