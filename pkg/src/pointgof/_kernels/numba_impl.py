"""JIT kernels for the hot inner loops.

Pair statistics use a flat spatial grid (cell size >= the largest query
radius) so the work is linear in points times neighbors.  The Gibbs
sampler implements the backward free birth-death construction: the free
process restricted to a cell is a space-time Poisson process (snapshot
alive at time 0, plus death events at rate tau*|cell| per unit time,
each with an Exp(1) lifetime backwards), generated lazily per cell down
to the earliest query time.  All randomness is reduced to uniform draws
so the pure-Python twin in ``python_impl`` consumes the exact same
stream and produces bit-identical output.
"""

import math

import numpy as np
from numba import njit

from .common import (
    CORR_NONE,
    CORR_TRANSLATION,
    CORR_RIGID,
    CORR_BORDER,
    CORR_ISOTROPIC,
    FAM_PAIR,
    FAM_AREA,
    FAM_HARDKBALL,
)

TWOPI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# edge-weight helpers


@njit(cache=True)
def _translation_weight(volume, L, dx, d):
    w = 1.0
    for k in range(d):
        w *= L - abs(dx[k])
    return volume / w


@njit(cache=True)
def _rotation_overlap(L, t, nodes):
    acc = 0.0
    h = TWOPI / nodes
    for i in range(nodes):
        th = i * h
        acc += (L - t * abs(math.cos(th))) * (L - t * abs(math.sin(th)))
    return acc / nodes


@njit(cache=True)
def _arc_fraction(cx, cy, half, radius):
    starts = np.empty(4)
    lengths = np.empty(4)
    m = 0
    for side in range(4):
        if side == 0:
            dist = half - cx
            th = 0.0
        elif side == 1:
            dist = half - cy
            th = 0.5 * math.pi
        elif side == 2:
            dist = half + cx
            th = math.pi
        else:
            dist = half + cy
            th = 1.5 * math.pi
        c = dist / radius
        if c < 1.0:
            if c < -1.0:
                c = -1.0
            al = math.acos(c)
            starts[m] = (th - al) % TWOPI
            lengths[m] = 2.0 * al
            m += 1
    if m == 0:
        return 1.0
    # insertion sort by start
    for i in range(1, m):
        s = starts[i]
        l = lengths[i]
        j = i - 1
        while j >= 0 and starts[j] > s:
            starts[j + 1] = starts[j]
            lengths[j + 1] = lengths[j]
            j -= 1
        starts[j + 1] = s
        lengths[j + 1] = l
    ma = np.empty(4)
    mb = np.empty(4)
    nm = 0
    for i in range(m):
        a = starts[i]
        b = starts[i] + lengths[i]
        if nm > 0 and a <= mb[nm - 1]:
            if b > mb[nm - 1]:
                mb[nm - 1] = b
        else:
            ma[nm] = a
            mb[nm] = b
            nm += 1
    excluded = 0.0
    for i in range(nm):
        excluded += mb[i] - ma[i]
    overhang = mb[nm - 1] - TWOPI
    if overhang > 0.0:
        for i in range(nm - 1):
            lo = ma[i] if ma[i] < overhang else overhang
            hi = mb[i] if mb[i] < overhang else overhang
            excluded -= hi - lo
    if excluded > TWOPI:
        excluded = TWOPI
    frac = 1.0 - excluded / TWOPI
    return frac if frac > 0.0 else 0.0


# ---------------------------------------------------------------------------
# pair statistics


@njit(cache=True)
def _flat_cell(pos, i, d, half, csize, nc):
    c = 0
    for k in range(d):
        q = int((pos[i, k] + half) / csize)
        if q < 0:
            q = 0
        elif q >= nc:
            q = nc - 1
        c = c * nc + q
    return c


@njit(cache=True)
def pair_weight_bins(
    pos, cell_start, cell_items, nc, csize, L, volume, grid, corr, rot_nodes
):
    """Accumulate edge weights of ordered pairs into distance bins.

    For r-independent corrections the result is a per-bin weight array
    whose cumulative sum at index j equals the weighted count of ordered
    pairs with distance <= grid[j].  For the border correction the bins
    are range-increments: a pair at distance s with first-point boundary
    distance b contributes 1 to every grid index j with
    grid[j] >= s and grid[j] <= b.
    """
    n, d = pos.shape
    G = grid.shape[0]
    bins = np.zeros(G + 1)
    if n == 0 or G == 0 or grid[G - 1] <= 0.0:
        return bins
    rmax = grid[G - 1]
    half = 0.5 * L
    ncells_tot = 1
    for _ in range(d):
        ncells_tot *= nc
    lo = np.empty(d, np.int64)
    hi = np.empty(d, np.int64)
    idx = np.empty(d, np.int64)
    dx = np.empty(d)
    for i in range(n):
        jhi = -2
        if corr == CORR_BORDER:
            b = half - abs(pos[i, 0])
            for k in range(1, d):
                bb = half - abs(pos[i, k])
                if bb < b:
                    b = bb
            jhi = np.searchsorted(grid, b, side="right") - 1
            if jhi < 0:
                continue
        for k in range(d):
            q = int((pos[i, k] + half) / csize)
            if q < 0:
                q = 0
            elif q >= nc:
                q = nc - 1
            lo[k] = q - 1 if q > 0 else 0
            hi[k] = q + 1 if q < nc - 1 else nc - 1
            idx[k] = lo[k]
        while True:
            c = 0
            for k in range(d):
                c = c * nc + idx[k]
            for p in range(cell_start[c], cell_start[c + 1]):
                j = cell_items[p]
                if j == i:
                    continue
                d2 = 0.0
                for k in range(d):
                    dx[k] = pos[j, k] - pos[i, k]
                    d2 += dx[k] * dx[k]
                if d2 == 0.0:
                    continue
                dist = math.sqrt(d2)
                if dist > rmax:
                    continue
                jlo = np.searchsorted(grid, dist, side="left")
                if corr == CORR_BORDER:
                    if jlo <= jhi:
                        bins[jlo] += 1.0
                        bins[jhi + 1] -= 1.0
                    continue
                if corr == CORR_NONE:
                    w = 1.0
                elif corr == CORR_TRANSLATION:
                    w = _translation_weight(volume, L, dx, d)
                elif corr == CORR_RIGID:
                    w = volume / _rotation_overlap(L, dist, rot_nodes)
                else:
                    frac = _arc_fraction(pos[i, 0], pos[i, 1], half, dist)
                    if frac <= 0.0:
                        return np.full(G + 1, np.nan)
                    w = 1.0 / frac
                bins[jlo] += w
            k = d - 1
            while k >= 0:
                idx[k] += 1
                if idx[k] <= hi[k]:
                    break
                idx[k] = lo[k]
                k -= 1
            if k < 0:
                break
    return bins


@njit(cache=True)
def pcf_bins(pos, cell_start, cell_items, nc, csize, L, volume, grid, delta):
    """Kernel-smoothed, translation-weighted pair sums per grid radius."""
    n, d = pos.shape
    G = grid.shape[0]
    out = np.zeros(G)
    if n == 0 or G == 0:
        return out
    rmax = grid[G - 1] + delta
    half = 0.5 * L
    lo = np.empty(d, np.int64)
    hi = np.empty(d, np.int64)
    idx = np.empty(d, np.int64)
    dx = np.empty(d)
    c0 = 0.75 / delta
    for i in range(n):
        for k in range(d):
            q = int((pos[i, k] + half) / csize)
            if q < 0:
                q = 0
            elif q >= nc:
                q = nc - 1
            lo[k] = q - 1 if q > 0 else 0
            hi[k] = q + 1 if q < nc - 1 else nc - 1
            idx[k] = lo[k]
        while True:
            c = 0
            for k in range(d):
                c = c * nc + idx[k]
            for p in range(cell_start[c], cell_start[c + 1]):
                j = cell_items[p]
                if j == i:
                    continue
                d2 = 0.0
                for k in range(d):
                    dx[k] = pos[j, k] - pos[i, k]
                    d2 += dx[k] * dx[k]
                if d2 == 0.0:
                    continue
                dist = math.sqrt(d2)
                if dist > rmax:
                    continue
                w = _translation_weight(volume, L, dx, d)
                ja = np.searchsorted(grid, dist - delta, side="left")
                jb = np.searchsorted(grid, dist + delta, side="left")
                for g in range(ja, jb):
                    t = (grid[g] - dist) / delta
                    out[g] += c0 * (1.0 - t * t) * w
            k = d - 1
            while k >= 0:
                idx[k] += 1
                if idx[k] <= hi[k]:
                    break
                idx[k] = lo[k]
                k -= 1
            if k < 0:
                break
    return out


@njit(cache=True)
def nn_diff_bins(pos, cell_start, cell_items, nc, csize, L, grid):
    """Border-weighted nearest-neighbor indicator counts (range bins)."""
    n, d = pos.shape
    G = grid.shape[0]
    bins = np.zeros(G + 1)
    if n == 0 or G == 0:
        return bins
    rmax = grid[G - 1]
    half = 0.5 * L
    lo = np.empty(d, np.int64)
    hi = np.empty(d, np.int64)
    idx = np.empty(d, np.int64)
    for i in range(n):
        b = half - abs(pos[i, 0])
        for k in range(1, d):
            bb = half - abs(pos[i, k])
            if bb < b:
                b = bb
        jhi = np.searchsorted(grid, b, side="right") - 1
        if jhi < 0:
            continue
        nnd2 = np.inf
        for k in range(d):
            q = int((pos[i, k] + half) / csize)
            if q < 0:
                q = 0
            elif q >= nc:
                q = nc - 1
            lo[k] = q - 1 if q > 0 else 0
            hi[k] = q + 1 if q < nc - 1 else nc - 1
            idx[k] = lo[k]
        while True:
            c = 0
            for k in range(d):
                c = c * nc + idx[k]
            for p in range(cell_start[c], cell_start[c + 1]):
                j = cell_items[p]
                if j == i:
                    continue
                d2 = 0.0
                for k in range(d):
                    dd = pos[j, k] - pos[i, k]
                    d2 += dd * dd
                if 0.0 < d2 < nnd2:
                    nnd2 = d2
            k = d - 1
            while k >= 0:
                idx[k] += 1
                if idx[k] <= hi[k]:
                    break
                idx[k] = lo[k]
                k -= 1
            if k < 0:
                break
        if nnd2 > rmax * rmax:
            continue
        jlo = np.searchsorted(grid, math.sqrt(nnd2), side="left")
        if jlo <= jhi:
            bins[jlo] += 1.0
            bins[jhi + 1] -= 1.0
    return bins


# ---------------------------------------------------------------------------
# Gibbs interaction deltas


@njit(cache=True)
def _phi_step(dist, breaks, values):
    for b in range(breaks.shape[0]):
        if dist <= breaks[b]:
            return values[b]
    return 0.0


@njit(cache=True)
def _circle_contains_all(cx, cy, r, xs, ys, m, eps):
    r2 = (r + eps) * (r + eps)
    for i in range(m):
        dx = xs[i] - cx
        dy = ys[i] - cy
        if dx * dx + dy * dy > r2:
            return False
    return True


@njit(cache=True)
def _meb_radius(xs, ys, m):
    """Minimum enclosing circle radius of m planar points (brute force
    over the <=3 support points; exact for the small sets used here)."""
    if m == 0:
        return 0.0
    if m == 1:
        return 0.0
    eps = 1e-12
    best = np.inf
    for i in range(m):
        for j in range(i + 1, m):
            cx = 0.5 * (xs[i] + xs[j])
            cy = 0.5 * (ys[i] + ys[j])
            dx = xs[i] - cx
            dy = ys[i] - cy
            r = math.sqrt(dx * dx + dy * dy)
            if r < best and _circle_contains_all(cx, cy, r, xs, ys, m, eps * (1.0 + r)):
                best = r
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                ax, ay = xs[i], ys[i]
                bx, by = xs[j], ys[j]
                cx_, cy_ = xs[k], ys[k]
                den = 2.0 * (ax * (by - cy_) + bx * (cy_ - ay) + cx_ * (ay - by))
                if den == 0.0:
                    continue
                a2 = ax * ax + ay * ay
                b2 = bx * bx + by * by
                c2 = cx_ * cx_ + cy_ * cy_
                ux = (a2 * (by - cy_) + b2 * (cy_ - ay) + c2 * (ay - by)) / den
                uy = (a2 * (cx_ - bx) + b2 * (ax - cx_) + c2 * (bx - ax)) / den
                dx = ax - ux
                dy = ay - uy
                r = math.sqrt(dx * dx + dy * dy)
                if r < best and _circle_contains_all(ux, uy, r, xs, ys, m, eps * (1.0 + r)):
                    best = r
    return best


@njit(cache=True)
def _hardkball_hit(x0, y0, nx, ny, m, R, kball):
    """True when some radius-R ball contains (x0, y0) and kball-1 of the
    m neighbor points."""
    need = kball - 1
    if m < need:
        return False
    xs = np.empty(kball)
    ys = np.empty(kball)
    xs[0] = x0
    ys[0] = y0
    sel = np.empty(need, np.int64)
    for t in range(need):
        sel[t] = t
    while True:
        for t in range(need):
            xs[t + 1] = nx[sel[t]]
            ys[t + 1] = ny[sel[t]]
        if _meb_radius(xs, ys, kball) <= R:
            return True
        t = need - 1
        while t >= 0 and sel[t] == m - need + t:
            t -= 1
        if t < 0:
            return False
        sel[t] += 1
        for u in range(t + 1, need):
            sel[u] = sel[u - 1] + 1


@njit(cache=True)
def _config_has_kball(nx, ny, m, R, kball):
    """True when some radius-R ball already contains kball of the points."""
    if m < kball:
        return False
    xs = np.empty(kball)
    ys = np.empty(kball)
    sel = np.empty(kball, np.int64)
    for t in range(kball):
        sel[t] = t
    while True:
        for t in range(kball):
            xs[t] = nx[sel[t]]
            ys[t] = ny[sel[t]]
        if _meb_radius(xs, ys, kball) <= R:
            return True
        t = kball - 1
        while t >= 0 and sel[t] == m - kball + t:
            t -= 1
        if t < 0:
            return False
        sel[t] += 1
        for u in range(t + 1, kball):
            sel[u] = sel[u - 1] + 1


@njit(cache=True)
def _area_uncovered(x0, y0, nx, ny, m, R, res):
    """Uncovered area of the disk about (x0,y0), by an res*res sample
    grid over the disk's bounding square; exact pi*R^2 when m == 0."""
    if m == 0:
        return math.pi * R * R
    inside = 0
    unc = 0
    R2 = R * R
    step = 2.0 * R / res
    for i in range(res):
        px = x0 - R + (i + 0.5) * step
        dx0 = px - x0
        for j in range(res):
            py = y0 - R + (j + 0.5) * step
            dy0 = py - y0
            if dx0 * dx0 + dy0 * dy0 > R2:
                continue
            inside += 1
            covered = False
            for q in range(m):
                ddx = px - nx[q]
                ddy = py - ny[q]
                if ddx * ddx + ddy * ddy <= R2:
                    covered = True
                    break
            if not covered:
                unc += 1
    return math.pi * R * R * unc / inside


@njit(cache=True)
def _delta_energy(family, x, nbr_pos, n_nbr, breaks, values, fR, fk, area_res):
    """Energy increment of inserting x into the neighbor configuration."""
    if family == FAM_PAIR:
        acc = 0.0
        d = x.shape[0]
        for q in range(n_nbr):
            d2 = 0.0
            for k in range(d):
                dd = nbr_pos[q, k] - x[k]
                d2 += dd * dd
            acc += _phi_step(math.sqrt(d2), breaks, values)
            if acc == np.inf:
                return np.inf
        return acc
    nx = nbr_pos[:n_nbr, 0].copy()
    ny = nbr_pos[:n_nbr, 1].copy()
    if family == FAM_AREA:
        return _area_uncovered(x[0], x[1], nx, ny, n_nbr, fR, area_res)
    if _config_has_kball(nx, ny, n_nbr, fR, fk):
        return 0.0
    if _hardkball_hit(x[0], x[1], nx, ny, n_nbr, fR, fk):
        return np.inf
    return 0.0


# ---------------------------------------------------------------------------
# free birth-death machinery


@njit(cache=True)
def _exp_draw():
    return -math.log(1.0 - np.random.random())


@njit(cache=True)
def _poisson_block(lam):
    L = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        k += 1
        p *= np.random.random()
        if p <= L:
            break
    return k - 1


@njit(cache=True)
def _poisson_draw(lam):
    total = 0
    while lam > 50.0:
        total += _poisson_block(50.0)
        lam -= 50.0
    return total + _poisson_block(lam)


@njit(cache=True)
def gibbs_domain(
    seed,
    d,
    hw,
    crop_half,
    rpsi,
    tau,
    beta,
    family,
    breaks,
    values,
    fR,
    fk,
    area_res,
    cellside_target,
    budget,
):
    """Perfect simulation of the Gibbs process on D = [-hw, hw]^d.

    Backward pass: lazily reveal the free birth-death process per cell
    (alive-at-0 snapshot plus death events back in time) while chasing
    ancestor clans of the alive-at-0 points.  Forward pass: thin the
    closure in birth order with acceptance exp(-beta * Delta).  Returns
    the accepted alive-at-0 points cropped to [-crop_half, crop_half]^d
    plus (closure size, generated points, max generation, clan extent).
    Raises no exceptions; a negative closure size signals the event
    budget was exceeded.
    """
    np.random.seed(seed)
    nc = max(1, int(math.ceil(2.0 * hw / cellside_target)))
    cs = 2.0 * hw / nc
    ncell = 1
    for _ in range(d):
        ncell *= nc
    cellvol = cs ** d
    rate = tau * cellvol

    cap = int(tau * (2.0 * hw) ** d * 6.0) + 4096
    pos = np.empty((cap, d))
    birth = np.empty(cap)
    death = np.empty(cap)
    coin = np.empty(cap)
    nxt = np.full(cap, -1, np.int64)
    status = np.zeros(cap, np.uint8)
    gen = np.zeros(cap, np.int64)
    anc_head = np.full(cap, -1, np.int64)
    queue = np.empty(cap, np.int64)
    head = np.full(ncell, -1, np.int64)
    frontier = np.zeros(ncell)

    e_cap = cap * 2
    e_to = np.empty(e_cap, np.int64)
    e_next = np.empty(e_cap, np.int64)
    ne = 0

    m = 0
    events = 0
    corner = np.empty(d)
    # alive-at-0 snapshot, cell-major order
    for c in range(ncell):
        cc = c
        for k in range(d - 1, -1, -1):
            corner[k] = -hw + (cc % nc) * cs
            cc //= nc
        kdraw = _poisson_draw(rate)
        for _ in range(kdraw):
            if m >= cap:
                ncap = cap * 2
                pos2 = np.empty((ncap, d))
                pos2[:cap] = pos
                pos = pos2
                b2 = np.empty(ncap)
                b2[:cap] = birth
                birth = b2
                d2_ = np.empty(ncap)
                d2_[:cap] = death
                death = d2_
                c2 = np.empty(ncap)
                c2[:cap] = coin
                coin = c2
                nx2 = np.full(ncap, -1, np.int64)
                nx2[:cap] = nxt
                nxt = nx2
                st2 = np.zeros(ncap, np.uint8)
                st2[:cap] = status
                status = st2
                g2 = np.zeros(ncap, np.int64)
                g2[:cap] = gen
                gen = g2
                ah2 = np.full(ncap, -1, np.int64)
                ah2[:cap] = anc_head
                anc_head = ah2
                q2 = np.empty(ncap, np.int64)
                q2[:cap] = queue
                queue = q2
                cap = ncap
            for k in range(d):
                pos[m, k] = corner[k] + cs * np.random.random()
            birth[m] = -_exp_draw()
            death[m] = np.inf
            coin[m] = np.random.random()
            nxt[m] = head[c]
            head[c] = m
            status[m] = 1
            m += 1
            events += 1
    n_init = m
    if events > budget:
        return np.empty((0, d)), -1, events, 0, 0.0
    for i in range(n_init):
        queue[i] = i
    qh = 0
    qt = n_init

    lo = np.empty(d, np.int64)
    hi = np.empty(d, np.int64)
    idx = np.empty(d, np.int64)
    r2 = rpsi * rpsi
    budget_hit = False

    while qh < qt and not budget_hit:
        i = queue[qh]
        qh += 1
        t = birth[i]
        for k in range(d):
            q = int((pos[i, k] - rpsi + hw) / cs)
            lo[k] = 0 if q < 0 else (nc - 1 if q >= nc else q)
            q = int((pos[i, k] + rpsi + hw) / cs)
            hi[k] = 0 if q < 0 else (nc - 1 if q >= nc else q)
            idx[k] = lo[k]
        while True:
            c = 0
            for k in range(d):
                c = c * nc + idx[k]
            if frontier[c] > t:
                dt = frontier[c] - t
                kdraw = _poisson_draw(rate * dt)
                cc = c
                for k in range(d - 1, -1, -1):
                    corner[k] = -hw + (cc % nc) * cs
                    cc //= nc
                for _ in range(kdraw):
                    if m >= cap:
                        ncap = cap * 2
                        pos2 = np.empty((ncap, d))
                        pos2[:cap] = pos
                        pos = pos2
                        b2 = np.empty(ncap)
                        b2[:cap] = birth
                        birth = b2
                        d2_ = np.empty(ncap)
                        d2_[:cap] = death
                        death = d2_
                        c2 = np.empty(ncap)
                        c2[:cap] = coin
                        coin = c2
                        nx2 = np.full(ncap, -1, np.int64)
                        nx2[:cap] = nxt
                        nxt = nx2
                        st2 = np.zeros(ncap, np.uint8)
                        st2[:cap] = status
                        status = st2
                        g2 = np.zeros(ncap, np.int64)
                        g2[:cap] = gen
                        gen = g2
                        ah2 = np.full(ncap, -1, np.int64)
                        ah2[:cap] = anc_head
                        anc_head = ah2
                        q2 = np.empty(ncap, np.int64)
                        q2[:cap] = queue
                        queue = q2
                        cap = ncap
                    dth = t + np.random.random() * dt
                    for k in range(d):
                        pos[m, k] = corner[k] + cs * np.random.random()
                    birth[m] = dth - _exp_draw()
                    death[m] = dth
                    coin[m] = np.random.random()
                    nxt[m] = head[c]
                    head[c] = m
                    m += 1
                    events += 1
                    if events > budget:
                        budget_hit = True
                        break
                frontier[c] = t
            if budget_hit:
                break
            j = head[c]
            while j >= 0:
                if j != i and birth[j] < t and death[j] > t:
                    d2 = 0.0
                    for k in range(d):
                        dd = pos[j, k] - pos[i, k]
                        d2 += dd * dd
                    if d2 <= r2:
                        if ne >= e_cap:
                            ncap2 = e_cap * 2
                            et2 = np.empty(ncap2, np.int64)
                            et2[:e_cap] = e_to
                            e_to = et2
                            en2 = np.empty(ncap2, np.int64)
                            en2[:e_cap] = e_next
                            e_next = en2
                            e_cap = ncap2
                        e_to[ne] = j
                        e_next[ne] = anc_head[i]
                        anc_head[i] = ne
                        ne += 1
                        if status[j] == 0:
                            status[j] = 1
                            gen[j] = gen[i] + 1
                            queue[qt] = j
                            qt += 1
                j = nxt[j]
            k = d - 1
            while k >= 0:
                idx[k] += 1
                if idx[k] <= hi[k]:
                    break
                idx[k] = lo[k]
                k -= 1
            if k < 0:
                break

    if budget_hit:
        return np.empty((0, d)), -1, events, 0, 0.0

    # forward thinning in birth order
    n_clo = qt
    bb = np.empty(n_clo)
    for a in range(n_clo):
        bb[a] = birth[queue[a]]
    order = np.argsort(bb)
    accepted = np.zeros(cap, np.uint8)
    nbr = np.empty((64, d))
    for a in range(n_clo):
        i = queue[order[a]]
        if beta == 0.0:
            accepted[i] = 1
            continue
        nn = 0
        e = anc_head[i]
        while e >= 0:
            j = e_to[e]
            if accepted[j] == 1:
                if nn >= nbr.shape[0]:
                    nbr2 = np.empty((nbr.shape[0] * 2, d))
                    nbr2[: nbr.shape[0]] = nbr
                    nbr = nbr2
                for k in range(d):
                    nbr[nn, k] = pos[j, k]
                nn += 1
            e = e_next[e]
        delta = _delta_energy(family, pos[i], nbr, nn, breaks, values, fR, fk, area_res)
        if delta == np.inf:
            p = 0.0
        else:
            p = math.exp(-beta * delta)
        accepted[i] = 1 if coin[i] < p else 0

    # stats: clan extent as bounding-box diagonal of the closure + 2 r
    maxgen = 0
    lo_b = np.full(d, np.inf)
    hi_b = np.full(d, -np.inf)
    for a in range(n_clo):
        i = queue[a]
        if gen[i] > maxgen:
            maxgen = gen[i]
        for k in range(d):
            if pos[i, k] < lo_b[k]:
                lo_b[k] = pos[i, k]
            if pos[i, k] > hi_b[k]:
                hi_b[k] = pos[i, k]
    diag = 0.0
    if n_clo > 0:
        for k in range(d):
            diag += (hi_b[k] - lo_b[k]) ** 2
        diag = math.sqrt(diag) + 2.0 * rpsi

    out_n = 0
    for i in range(n_init):
        if accepted[i] == 1:
            ok = True
            for k in range(d):
                if abs(pos[i, k]) > crop_half:
                    ok = False
                    break
            if ok:
                out_n += 1
    out = np.empty((out_n, d))
    w = 0
    for i in range(n_init):
        if accepted[i] == 1:
            ok = True
            for k in range(d):
                if abs(pos[i, k]) > crop_half:
                    ok = False
                    break
            if ok:
                for k in range(d):
                    out[w, k] = pos[i, k]
                w += 1
    return out, n_clo, events, maxgen, diag


@njit(cache=True)
def clan_probe(seed, d, rpsi, tau, cellside, budget, reps):
    """Ancestor clans of a point born at time 0 at the origin, on the
    unconstrained domain (cells materialize on demand).  Returns per-rep
    (clan size incl. the root, spatial clan extent diam + 2 r, ancestor
    generations); sizes[i] = -1 flags an exceeded event budget."""
    np.random.seed(seed)
    sizes = np.empty(reps, np.int64)
    diams = np.empty(reps)
    gens = np.empty(reps, np.int64)
    cs = cellside
    rate = tau * cs ** d
    OFF = np.int64(1) << np.int64(20)
    MOD = OFF * 2
    for rep in range(reps):
        cap = 1024
        pos = np.empty((cap, d))
        birth = np.empty(cap)
        death = np.empty(cap)
        nxt = np.full(cap, -1, np.int64)
        status = np.zeros(cap, np.uint8)
        gen = np.zeros(cap, np.int64)
        queue = np.empty(cap, np.int64)
        head = {np.int64(0): np.int64(-1)}
        frontier = {np.int64(0): 0.0}
        head.pop(np.int64(0))
        frontier.pop(np.int64(0))

        # root: born at time 0 at the origin
        for k in range(d):
            pos[0, k] = 0.0
        birth[0] = 0.0
        death[0] = np.inf
        status[0] = 1
        m = 1
        queue[0] = 0
        qh = 0
        qt = 1
        events = 0
        lo = np.empty(d, np.int64)
        hi = np.empty(d, np.int64)
        idx = np.empty(d, np.int64)
        corner = np.empty(d)
        r2 = rpsi * rpsi
        failed = False
        while qh < qt and not failed:
            i = queue[qh]
            qh += 1
            t = birth[i]
            for k in range(d):
                lo[k] = int(math.floor((pos[i, k] - rpsi) / cs))
                hi[k] = int(math.floor((pos[i, k] + rpsi) / cs))
                idx[k] = lo[k]
            while True:
                key = np.int64(0)
                for k in range(d):
                    key = key * MOD + (idx[k] + OFF)
                if key not in head:
                    # materialize: alive-at-0 snapshot of this cell
                    head[key] = np.int64(-1)
                    frontier[key] = 0.0
                    for k in range(d):
                        corner[k] = idx[k] * cs
                    kdraw = _poisson_draw(rate)
                    for _ in range(kdraw):
                        if m >= cap:
                            ncap = cap * 2
                            pos2 = np.empty((ncap, d))
                            pos2[:cap] = pos
                            pos = pos2
                            b2 = np.empty(ncap)
                            b2[:cap] = birth
                            birth = b2
                            d2_ = np.empty(ncap)
                            d2_[:cap] = death
                            death = d2_
                            nx2 = np.full(ncap, -1, np.int64)
                            nx2[:cap] = nxt
                            nxt = nx2
                            st2 = np.zeros(ncap, np.uint8)
                            st2[:cap] = status
                            status = st2
                            g2 = np.zeros(ncap, np.int64)
                            g2[:cap] = gen
                            gen = g2
                            q2 = np.empty(ncap, np.int64)
                            q2[:cap] = queue
                            queue = q2
                            cap = ncap
                        for k in range(d):
                            pos[m, k] = corner[k] + cs * np.random.random()
                        birth[m] = -_exp_draw()
                        death[m] = np.inf
                        nxt[m] = head[key]
                        head[key] = m
                        m += 1
                        events += 1
                if frontier[key] > t:
                    dt = frontier[key] - t
                    kdraw = _poisson_draw(rate * dt)
                    for k in range(d):
                        corner[k] = idx[k] * cs
                    for _ in range(kdraw):
                        if m >= cap:
                            ncap = cap * 2
                            pos2 = np.empty((ncap, d))
                            pos2[:cap] = pos
                            pos = pos2
                            b2 = np.empty(ncap)
                            b2[:cap] = birth
                            birth = b2
                            d2_ = np.empty(ncap)
                            d2_[:cap] = death
                            death = d2_
                            nx2 = np.full(ncap, -1, np.int64)
                            nx2[:cap] = nxt
                            nxt = nx2
                            st2 = np.zeros(ncap, np.uint8)
                            st2[:cap] = status
                            status = st2
                            g2 = np.zeros(ncap, np.int64)
                            g2[:cap] = gen
                            gen = g2
                            q2 = np.empty(ncap, np.int64)
                            q2[:cap] = queue
                            queue = q2
                            cap = ncap
                        dth = t + np.random.random() * dt
                        for k in range(d):
                            pos[m, k] = corner[k] + cs * np.random.random()
                        birth[m] = dth - _exp_draw()
                        death[m] = dth
                        nxt[m] = head[key]
                        head[key] = m
                        m += 1
                        events += 1
                    frontier[key] = t
                if events > budget:
                    failed = True
                    break
                j = head[key]
                while j >= 0:
                    if j != i and birth[j] < t and death[j] > t:
                        d2 = 0.0
                        for k in range(d):
                            dd = pos[j, k] - pos[i, k]
                            d2 += dd * dd
                        if d2 <= r2:
                            if status[j] == 0:
                                status[j] = 1
                                gen[j] = gen[i] + 1
                                queue[qt] = j
                                qt += 1
                    j = nxt[j]
                k = d - 1
                while k >= 0:
                    idx[k] += 1
                    if idx[k] <= hi[k]:
                        break
                    idx[k] = lo[k]
                    k -= 1
                if k < 0:
                    break
        if failed:
            sizes[rep] = -1
            diams[rep] = np.nan
            gens[rep] = -1
            continue
        sizes[rep] = qt
        maxgen = 0
        maxd2 = 0.0
        for a in range(qt):
            ia = queue[a]
            if gen[ia] > maxgen:
                maxgen = gen[ia]
            for b in range(a + 1, qt):
                ib = queue[b]
                d2 = 0.0
                for k in range(d):
                    dd = pos[ia, k] - pos[ib, k]
                    d2 += dd * dd
                if d2 > maxd2:
                    maxd2 = d2
        diams[rep] = math.sqrt(maxd2) + 2.0 * rpsi
        gens[rep] = maxgen
    return sizes, diams, gens
