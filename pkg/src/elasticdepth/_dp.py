"""Compiled kernels for elastic registration on a uniform lattice.

A warping is a monotone lattice path from (0, 0) to (N-1, N-1); node
``(i, j)`` means ``gamma(t_i) = t_j``.  Between consecutive nodes the path is
a straight segment of slope ``m = dj / di``.

Both square-root functions are treated as piecewise linear between their
samples, and the cost of a segment is the exact integral of
``|q1(t) - sqrt(m) q2(gamma(t))|^2`` over it.  Expanding the square gives

* the integral of ``|q1|^2`` over the rows spanned, a prefix sum;
* the integral of ``|q2|^2`` over the columns spanned, also a prefix sum,
  since warping preserves the L2 norm;
* a cross term ``sum_r q1[k + r] . W[s, r, :, l]`` where ``W`` holds the
  integrals of the hat function of node ``r`` against the warped ``q2``.

``W`` depends only on the step ``s`` and the starting column ``l``, so it is
tabulated once per pair.  Because the warped norm is exact, a path cannot
lower its cost by skipping over features of ``q2`` between samples.
"""

from math import gcd, sqrt

import numpy as np
from numba import njit


def coprime_steps(max_step=6):
    """Lattice steps ``(di, dj)`` with both entries in 1..max_step and coprime.

    The diagonal step comes first so that exact ties resolve towards the
    identity warping.
    """
    steps = [
        (a, b)
        for a in range(1, max_step + 1)
        for b in range(1, max_step + 1)
        if gcd(a, b) == 1 and (a, b) != (1, 1)
    ]
    return np.array([(1, 1)] + steps, dtype=np.int64)


def step_tables(steps):
    """Integration pieces shared by all segments of each step.

    Along a segment with step ``(a, b)`` and local coordinate ``u`` in
    ``[0, a]``, ``q1`` has knots at the integers and the warped ``q2`` at
    multiples of ``a / b``.  Between consecutive knots of the union both are
    linear, so products integrate exactly.  For piece ``p`` the tables hold
    its row ``r`` (it lies in ``[r, r + 1]``), its length, the value of the
    hat function of node ``r`` at both ends, and where both ends land in
    ``q2`` as ``offset + frac`` columns from the segment start.
    """
    steps = np.asarray(steps, dtype=np.int64)
    n_steps = len(steps)
    width = int((steps[:, 0] + steps[:, 1]).max())
    count = np.zeros(n_steps, dtype=np.int64)
    row = np.zeros((n_steps, width), dtype=np.int64)
    length = np.zeros((n_steps, width))
    hat = np.zeros((n_steps, width, 2))
    offset = np.zeros((n_steps, width, 2), dtype=np.int64)
    frac = np.zeros((n_steps, width, 2))
    for s, (a, b) in enumerate(steps):
        # knots in units of 1 / b along u
        knots = sorted({r * b for r in range(a + 1)} | {j * a for j in range(b + 1)})
        count[s] = len(knots) - 1
        for p, (k0, k1) in enumerate(zip(knots[:-1], knots[1:])):
            r = k0 // b
            row[s, p] = r
            length[s, p] = (k1 - k0) / b
            for e, k in enumerate((k0, k1)):
                hat[s, p, e] = r + 1 - k / b
                offset[s, p, e] = k // a
                frac[s, p, e] = (k % a) / a
    lookup = np.full((int(steps.max()) + 1,) * 2, -1, dtype=np.int64)
    for s, (a, b) in enumerate(steps):
        lookup[a, b] = s
    root = np.sqrt(steps[:, 1] / steps[:, 0])
    return steps, count, row, length, hat, offset, frac, root, lookup


@njit(cache=True, nogil=True)
def _warped_table(q2, steps, count, row, length, hat, offset, frac, root):
    # W[s, r, d, l]: integral over the segment (in units of h) of the hat
    # function of node r times coordinate d of sqrt(m) q2(gamma)
    n, dim = q2.shape
    n_steps = steps.shape[0]
    width = int(steps[:, 0].max()) + 1
    table = np.zeros((n_steps, width, dim, n))
    g0 = np.empty(dim)
    g1 = np.empty(dim)
    for s in range(n_steps):
        b = steps[s, 1]
        scale = root[s] / 6.0
        for l in range(n - b):
            for d in range(dim):
                g1[d] = q2[l, d]
            for p in range(count[s]):
                # the end of one piece is the start of the next
                idx = l + offset[s, p, 1]
                fr = frac[s, p, 1]
                for d in range(dim):
                    g0[d] = g1[d]
                    v = q2[idx, d]
                    if fr != 0.0:
                        v += fr * (q2[idx + 1, d] - v)
                    g1[d] = v
                r = row[s, p]
                w = scale * length[s, p]
                h0 = hat[s, p, 0]
                h1 = hat[s, p, 1]
                k0 = 1.0 - h0
                k1 = 1.0 - h1
                for d in range(dim):
                    a = g0[d]
                    c = g1[d]
                    table[s, r, d, l] += w * (2.0 * h0 * a + h0 * c + h1 * a + 2.0 * h1 * c)
                    table[s, r + 1, d, l] += w * (2.0 * k0 * a + k0 * c + k1 * a + 2.0 * k1 * c)
    return table


def warped_table(q2, tables):
    """Hat-function integrals of the warped `q2` for every step and column."""
    return _warped_table(q2, *tables[:8])


def rotate_table(table, rotation):
    """Table of ``q2 @ rotation.T`` from the table of ``q2`` (it is linear)."""
    return np.ascontiguousarray(np.einsum("ab,srbl->sral", rotation, table))


@njit(cache=True, nogil=True)
def _prefix_norm(q):
    # exact integral of |q|^2 for piecewise linear q, in units of h
    n, dim = q.shape
    prefix = np.zeros(n)
    for t in range(1, n):
        acc = 0.0
        for d in range(dim):
            x = q[t - 1, d]
            y = q[t, d]
            acc += x * x + x * y + y * y
        prefix[t] = prefix[t - 1] + acc / 3.0
    return prefix


@njit(cache=True, nogil=True)
def _segment(q1, table, prefix1, prefix2, s, a, b, k, l, h):
    dim = q1.shape[1]
    cross = 0.0
    for r in range(a + 1):
        acc = 0.0
        for d in range(dim):
            acc += q1[k + r, d] * table[s, r, d, l]
        cross += acc
    base = prefix1[k + a] - prefix1[k]
    return h * (base + (prefix2[l + b] - prefix2[l]) - 2.0 * cross)


@njit(cache=True, nogil=True)
def _dp_tables(q1, table, prefix2, steps, h):
    # Row by row; for each step the segment costs of all columns are built
    # with the same operation order as _segment, vectorized over columns.
    n, dim = q1.shape
    prefix1 = _prefix_norm(q1)
    ms = 0
    for s in range(steps.shape[0]):
        ms = max(ms, steps[s, 0], steps[s, 1])
    energy = np.full((n, n), np.inf)
    back = np.full((n, n), -1, dtype=np.int64)
    energy[0, 0] = 0.0
    cross = np.empty(n)
    acc = np.empty(n)
    best = np.empty(n)
    arg = np.empty(n, dtype=np.int64)
    for i in range(1, n):
        best[:] = np.inf
        arg[:] = -1
        for s in range(steps.shape[0]):
            a = steps[s, 0]
            b = steps[s, 1]
            k = i - a
            if k < 0:
                continue
            m = n - b
            cross[:m] = 0.0
            for r in range(a + 1):
                acc[:m] = 0.0
                for d in range(dim):
                    c1 = q1[k + r, d]
                    line = table[s, r, d]
                    for l in range(m):
                        acc[l] += c1 * line[l]
                for l in range(m):
                    cross[l] += acc[l]
            base = prefix1[i] - prefix1[k]
            for l in range(m):
                prev = energy[k, l]
                if prev == np.inf:
                    continue
                c = prev + h * (base + (prefix2[l + b] - prefix2[l]) - 2.0 * cross[l])
                j = l + b
                if c < best[j]:
                    best[j] = c
                    arg[j] = s
        for j in range(1, n):
            # cells no path with slopes in [1/ms, ms] can pass through
            if (
                j > ms * i
                or i > ms * j
                or n - 1 - j > ms * (n - 1 - i)
                or n - 1 - i > ms * (n - 1 - j)
            ):
                continue
            energy[i, j] = best[j]
            back[i, j] = arg[j]
    return energy, back


@njit(cache=True, nogil=True)
def _backtrack(back, steps):
    n = back.shape[0]
    path_i = np.empty(2 * n, dtype=np.int64)
    path_j = np.empty(2 * n, dtype=np.int64)
    count = 0
    i = n - 1
    j = n - 1
    while True:
        path_i[count] = i
        path_j[count] = j
        count += 1
        if i == 0 and j == 0:
            break
        s = back[i, j]
        i -= steps[s, 0]
        j -= steps[s, 1]
    return path_i[:count][::-1].copy(), path_j[:count][::-1].copy()


def dp_path(q1, q2, tables, h, table=None):
    """Minimum-cost lattice path; returns ``(cost, path_i, path_j)``.

    `tables` comes from :func:`step_tables`; `table` optionally supplies
    the precomputed :func:`warped_table` of `q2`. If no admissible path
    reaches the far corner a ``ValueError`` is raised.
    """
    if table is None:
        table = warped_table(q2, tables)
    energy, back = _dp_tables(q1, table, _prefix_norm(q2), tables[0], h)
    if not np.isfinite(energy[-1, -1]):
        raise ValueError("no admissible warping path for this grid and step set")
    path_i, path_j = _backtrack(back, tables[0])
    return energy[-1, -1], path_i, path_j


def path_cost(q1, q2, tables, h, path_i, path_j):
    """Cost of a given lattice path, accumulated exactly as the DP does."""
    lookup = tables[8]
    table = warped_table(q2, tables)
    prefix1 = _prefix_norm(q1)
    prefix2 = _prefix_norm(q2)
    total = 0.0
    for s in range(len(path_i) - 1):
        k, l = int(path_i[s]), int(path_j[s])
        a, b = int(path_i[s + 1]) - k, int(path_j[s + 1]) - l
        total = total + _segment(q1, table, prefix1, prefix2, lookup[a, b], a, b, k, l, h)
    return total


def path_positions(path_i, path_j):
    """Column position of the path at every row, in index units."""
    return np.interp(np.arange(path_i[-1] + 1), path_i, path_j).astype(float)


@njit(cache=True, nogil=True)
def _at(q2, x, d):
    idx = int(x)
    if idx >= q2.shape[0] - 1:
        idx = q2.shape[0] - 2
    fr = x - idx
    v = q2[idx, d]
    if fr != 0.0:
        v += fr * (q2[idx + 1, d] - v)
    return v


@njit(cache=True, nogil=True)
def _interval_cross(q1, q2, i, x0, x1, out):
    # out[u, w] = integral over row interval [i, i + 1] (units of h) of
    # q1_u(t) sqrt(m) q2_w(gamma(t)) with gamma linear from x0 to x1
    dim = q1.shape[1]
    m = x1 - x0
    root = sqrt(m) / 6.0
    out[:, :] = 0.0
    u0 = 0.0
    xa = x0
    j = np.floor(x0) + 1.0
    while True:
        if j < x1:
            u1 = (j - x0) / m
            xb = j
        else:
            u1 = 1.0
            xb = x1
        du = root * (u1 - u0)
        for a in range(dim):
            a0 = (1.0 - u0) * q1[i, a] + u0 * q1[i + 1, a]
            a1 = (1.0 - u1) * q1[i, a] + u1 * q1[i + 1, a]
            for b in range(dim):
                g0 = _at(q2, xa, b)
                g1 = _at(q2, xb, b)
                out[a, b] += du * (2.0 * a0 * g0 + a0 * g1 + a1 * g0 + 2.0 * a1 * g1)
        if j >= x1:
            break
        u0 = u1
        xa = xb
        j += 1.0


@njit(cache=True, nogil=True)
def _interval_inner(q1, q2, i, x0, x1):
    # trace of _interval_cross without the matrix
    dim = q1.shape[1]
    m = x1 - x0
    total = 0.0
    u0 = 0.0
    xa = x0
    j = np.floor(x0) + 1.0
    while True:
        if j < x1:
            u1 = (j - x0) / m
            xb = j
        else:
            u1 = 1.0
            xb = x1
        du = u1 - u0
        for d in range(dim):
            a0 = (1.0 - u0) * q1[i, d] + u0 * q1[i + 1, d]
            a1 = (1.0 - u1) * q1[i, d] + u1 * q1[i + 1, d]
            g0 = _at(q2, xa, d)
            g1 = _at(q2, xb, d)
            total += du * (2.0 * a0 * g0 + a0 * g1 + a1 * g0 + 2.0 * a1 * g1)
        if j >= x1:
            break
        u0 = u1
        xa = xb
        j += 1.0
    return sqrt(m) * total / 6.0


@njit(cache=True, nogil=True)
def node_terms(q1, q2, pos, h):
    """Exact ``(cross, norm1, norm2)`` for a warping given at every node.

    `pos` holds ``gamma(t_i)`` in index units; ``gamma`` is linear between
    nodes. ``cross[a, b]`` integrates ``q1_a sqrt(gamma') q2_b(gamma)``.
    """
    dim = q1.shape[1]
    cross = np.zeros((dim, dim))
    part = np.empty((dim, dim))
    for i in range(q1.shape[0] - 1):
        _interval_cross(q1, q2, i, pos[i], pos[i + 1], part)
        cross += part
    return h * cross, h * _prefix_norm(q1)[-1], h * _prefix_norm(q2)[-1]


@njit(cache=True, nogil=True)
def node_residual(q1, q2, pos, h):
    """Exact ``integral |q1 - sqrt(gamma') q2(gamma)|^2`` for node positions.

    Summing squared differences directly avoids the cancellation of
    ``norm1 + norm2 - 2 cross``, so identical inputs give exactly zero.
    """
    dim = q1.shape[1]
    total = 0.0
    for i in range(q1.shape[0] - 1):
        x0 = pos[i]
        x1 = pos[i + 1]
        m = x1 - x0
        root = sqrt(m)
        u0 = 0.0
        xa = x0
        j = np.floor(x0) + 1.0
        while True:
            if j < x1:
                u1 = (j - x0) / m
                xb = j
            else:
                u1 = 1.0
                xb = x1
            acc = 0.0
            for d in range(dim):
                e0 = (1.0 - u0) * q1[i, d] + u0 * q1[i + 1, d] - root * _at(q2, xa, d)
                e1 = (1.0 - u1) * q1[i, d] + u1 * q1[i + 1, d] - root * _at(q2, xb, d)
                acc += e0 * e0 + e0 * e1 + e1 * e1
            total += (u1 - u0) * acc / 3.0
            if j >= x1:
                break
            u0 = u1
            xa = xb
            j += 1.0
    return h * total


@njit(cache=True, nogil=True)
def refine_positions(q1, q2, pos, max_slope, tol):
    """Local continuous refinement of a warping given at every node.

    Only the cross term of the cost depends on the warping, so each
    interior node in turn is moved to increase the integral of
    ``<q1, sqrt(gamma') q2(gamma)>`` over its two adjacent intervals,
    keeping both slopes in ``[1 / max_slope, max_slope]``. Each node tries
    steps to either side, then the vertex of the parabola through the
    three values, and shrinks its step when nothing improves; it stops
    once every step is below `tol` (index units). Moves are accepted only
    when they increase the integral, so the cost never goes up.
    """
    n = q1.shape[0]
    pos = pos.copy()
    steps = np.full(n, 0.25)
    part = np.empty(n - 1)
    for i in range(n - 1):
        part[i] = _interval_inner(q1, q2, i, pos[i], pos[i + 1])
    lo_slope = 1.0 / max_slope
    # gains at rounding level are not moves
    scale = 0.0
    for i in range(n - 1):
        scale += abs(part[i])
    eps = 1e-13 * scale
    for _ in range(100 * n):
        active = False
        for i in range(1, n - 1):
            s = steps[i]
            if s < tol:
                continue
            active = True
            left = pos[i - 1]
            right = pos[i + 1]
            lo = max(left + lo_slope, right - max_slope)
            hi = min(left + max_slope, right - lo_slope)
            cur = pos[i]
            if hi <= lo:
                steps[i] = 0.0
                continue
            best = part[i - 1] + part[i]
            bx, bl, br = cur, part[i - 1], part[i]
            xm = max(cur - s, lo)
            xp = min(cur + s, hi)
            lm = _interval_inner(q1, q2, i - 1, left, xm)
            rm = _interval_inner(q1, q2, i, xm, right)
            lp = _interval_inner(q1, q2, i - 1, left, xp)
            rp = _interval_inner(q1, q2, i, xp, right)
            cm = lm + rm
            cp = lp + rp
            if cm > best + eps and cm >= cp:
                bx, bl, br = xm, lm, rm
                steps[i] = 2.0 * s if xm > lo else s
            elif cp > best + eps:
                bx, bl, br = xp, lp, rp
                steps[i] = 2.0 * s if xp < hi else s
            else:
                steps[i] = 0.25 * s
                if xm < cur < xp:
                    num = (cur - xm) ** 2 * (cp - best) - (cur - xp) ** 2 * (cm - best)
                    den = (cur - xm) * (cp - best) - (cur - xp) * (cm - best)
                    if den != 0.0:
                        x = cur - 0.5 * num / den
                        if xm < x < xp:
                            l2 = _interval_inner(q1, q2, i - 1, left, x)
                            r2 = _interval_inner(q1, q2, i, x, right)
                            if l2 + r2 > best + eps:
                                bx, bl, br = x, l2, r2
                                steps[i] = max(abs(x - cur), 0.25 * s)
            if bx != cur:
                pos[i] = bx
                part[i - 1] = bl
                part[i] = br
                # neighbours may have room to move again
                steps[i - 1] = max(steps[i - 1], abs(bx - cur))
                steps[i + 1] = max(steps[i + 1], abs(bx - cur))
        if not active:
            break
    return pos


@njit(cache=True, nogil=True)
def root_slope_integral(pos):
    """Exact integral of ``sqrt(gamma')`` for node positions in index units."""
    total = 0.0
    for i in range(pos.shape[0] - 1):
        total += sqrt(pos[i + 1] - pos[i])
    return total / (pos.shape[0] - 1)
