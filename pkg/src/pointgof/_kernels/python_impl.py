"""Pure numpy/scipy twin of the JIT kernels.

Pair statistics are vectorized over cKDTree pair lists.  The Gibbs
routines are direct loop transcriptions of the JIT code that draw the
same uniforms in the same order from the classic Mersenne Twister, so
both backends return bit-identical samples for a given seed.
"""

import math

import numpy as np
from scipy.spatial import cKDTree

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
_BIG = 1e30


# ---------------------------------------------------------------------------
# vectorized edge weights


def _ordered_pairs(pos, rmax):
    """Ordered pairs (i, j), i != j, with 0 < |x_i - x_j| <= rmax."""
    pairs = cKDTree(pos).query_pairs(rmax, output_type="ndarray")
    if len(pairs) == 0:
        return (np.empty(0, np.int64),) * 2 + (np.empty(0),)
    ii = np.concatenate([pairs[:, 0], pairs[:, 1]])
    jj = np.concatenate([pairs[:, 1], pairs[:, 0]])
    dist = np.sqrt(((pos[ii] - pos[jj]) ** 2).sum(axis=1))
    keep = dist > 0.0
    return ii[keep], jj[keep], dist[keep]


def translation_weights(pos, ii, jj, L, volume):
    edges = L - np.abs(pos[ii] - pos[jj])
    return volume / np.prod(edges, axis=1)


def rotation_overlaps(L, t, nodes):
    theta = np.arange(nodes) * (TWOPI / nodes)
    ac = np.abs(np.cos(theta))
    as_ = np.abs(np.sin(theta))
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape)
    chunk = max(1, 2_000_000 // nodes)
    for s in range(0, len(t), chunk):
        tt = t[s : s + chunk, None]
        out[s : s + chunk] = ((L - tt * ac) * (L - tt * as_)).mean(axis=1)
    return out


def arc_fractions(cx, cy, half, radius):
    """Vectorized circle-in-square arc fractions (see geometry module)."""
    cx = np.asarray(cx, dtype=float)
    P = cx.shape[0]
    dists = np.stack([half - cx, half - cy, half + cx, half + cy], axis=1)
    thetas = np.array([0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi])
    c = dists / radius[:, None]
    active = c < 1.0
    al = np.arccos(np.clip(c, -1.0, 1.0))
    starts = np.where(active, (thetas[None, :] - al) % TWOPI, _BIG)
    lens = np.where(active, 2.0 * al, 0.0)
    order = np.argsort(starts, axis=1)
    s = np.take_along_axis(starts, order, axis=1)
    e = s + np.take_along_axis(lens, order, axis=1)

    rows = np.arange(P)
    ma = np.full((P, 4), _BIG)
    mb = np.full((P, 4), _BIG)
    cnt = (s[:, 0] < _BIG).astype(np.int64)
    ma[:, 0] = np.where(cnt > 0, s[:, 0], _BIG)
    mb[:, 0] = np.where(cnt > 0, e[:, 0], _BIG)
    for k in range(1, 4):
        a, b = s[:, k], e[:, k]
        valid = a < _BIG
        last = np.maximum(cnt - 1, 0)
        lastb = mb[rows, last]
        extend = valid & (cnt > 0) & (a <= lastb)
        mb[rows[extend], last[extend]] = np.maximum(lastb[extend], b[extend])
        new = valid & ~extend
        ma[rows[new], cnt[new]] = a[new]
        mb[rows[new], cnt[new]] = b[new]
        cnt[new] += 1

    slot = np.arange(4)[None, :]
    used = slot < cnt[:, None]
    excluded = np.where(used, mb - ma, 0.0).sum(axis=1)
    lastb = mb[rows, np.maximum(cnt - 1, 0)]
    overhang = np.where(cnt > 0, lastb - TWOPI, 0.0)
    has_over = overhang > 0.0
    if has_over.any():
        ov = overhang[:, None]
        earlier = slot < (cnt - 1)[:, None]
        dbl = np.where(
            earlier & has_over[:, None],
            np.minimum(mb, ov) - np.minimum(ma, ov),
            0.0,
        )
        excluded -= np.clip(dbl, 0.0, None).sum(axis=1)
    excluded = np.minimum(excluded, TWOPI)
    frac = 1.0 - excluded / TWOPI
    frac[cnt == 0] = 1.0
    return np.maximum(frac, 0.0)


# ---------------------------------------------------------------------------
# pair statistics (same contracts as the JIT kernels)


def pair_weight_bins(
    pos, cell_start, cell_items, nc, csize, L, volume, grid, corr, rot_nodes
):
    G = len(grid)
    bins = np.zeros(G + 1)
    n, d = pos.shape
    if n == 0 or G == 0 or grid[-1] <= 0.0:
        return bins
    ii, jj, dist = _ordered_pairs(pos, grid[-1])
    if len(ii) == 0:
        return bins
    jlo = np.searchsorted(grid, dist, side="left")
    if corr == CORR_BORDER:
        half = 0.5 * L
        bdist = half - np.abs(pos).max(axis=1)
        jhi = np.searchsorted(grid, bdist[ii], side="right") - 1
        keep = jlo <= jhi
        np.add.at(bins, jlo[keep], 1.0)
        np.add.at(bins, jhi[keep] + 1, -1.0)
        return bins
    if corr == CORR_NONE:
        w = np.ones(len(ii))
    elif corr == CORR_TRANSLATION:
        w = translation_weights(pos, ii, jj, L, volume)
    elif corr == CORR_RIGID:
        w = volume / rotation_overlaps(L, dist, rot_nodes)
    elif corr == CORR_ISOTROPIC:
        frac = arc_fractions(pos[ii, 0], pos[ii, 1], 0.5 * L, dist)
        if (frac <= 0.0).any():
            return np.full(G + 1, np.nan)
        w = 1.0 / frac
    else:
        raise ValueError(f"unknown correction id {corr}")
    np.add.at(bins, jlo, w)
    return bins


def pcf_bins(pos, cell_start, cell_items, nc, csize, L, volume, grid, delta):
    G = len(grid)
    out = np.zeros(G)
    n, d = pos.shape
    if n == 0 or G == 0:
        return out
    ii, jj, dist = _ordered_pairs(pos, grid[-1] + delta)
    if len(ii) == 0:
        return out
    w = translation_weights(pos, ii, jj, L, volume)
    ja = np.searchsorted(grid, dist - delta, side="left")
    jb = np.searchsorted(grid, dist + delta, side="left")
    c0 = 0.75 / delta
    width = int(jb.max() - ja.min()) if len(ja) else 0
    for off in range(max((jb - ja).max(initial=0), 0)):
        g = ja + off
        m = g < jb
        if not m.any():
            break
        t = (grid[g[m]] - dist[m]) / delta
        np.add.at(out, g[m], c0 * (1.0 - t * t) * w[m])
    return out


def nn_diff_bins(pos, cell_start, cell_items, nc, csize, L, grid):
    G = len(grid)
    bins = np.zeros(G + 1)
    n, d = pos.shape
    if n == 0 or G == 0:
        return bins
    half = 0.5 * L
    bdist = half - np.abs(pos).max(axis=1)
    jhi = np.searchsorted(grid, bdist, side="right") - 1
    if n == 1:
        return bins
    nnd, _ = cKDTree(pos).query(pos, k=2)
    nnd = nnd[:, 1]
    jlo = np.searchsorted(grid, nnd, side="left")
    keep = (jlo <= jhi) & (nnd <= grid[-1])
    np.add.at(bins, jlo[keep], 1.0)
    np.add.at(bins, jhi[keep] + 1, -1.0)
    return bins


# ---------------------------------------------------------------------------
# Gibbs interaction deltas


def phi_step(dist, breaks, values):
    idx = np.searchsorted(breaks, dist, side="left")
    if np.isscalar(dist):
        return values[idx] if idx < len(breaks) else 0.0
    out = np.zeros(np.shape(dist))
    inside = idx < len(breaks)
    out[inside] = values[idx[inside]]
    return out


def _circle_contains_all(cx, cy, r, xs, ys, eps):
    return ((xs - cx) ** 2 + (ys - cy) ** 2 <= (r + eps) ** 2).all()


def meb_radius(xs, ys):
    """Minimum enclosing circle radius, brute force over support pairs
    and triples (exact in the plane)."""
    m = len(xs)
    if m <= 1:
        return 0.0
    eps = 1e-12
    best = np.inf
    for i in range(m):
        for j in range(i + 1, m):
            cx = 0.5 * (xs[i] + xs[j])
            cy = 0.5 * (ys[i] + ys[j])
            r = math.hypot(xs[i] - cx, ys[i] - cy)
            if r < best and _circle_contains_all(cx, cy, r, xs, ys, eps * (1 + r)):
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
                r = math.hypot(ax - ux, ay - uy)
                if r < best and _circle_contains_all(ux, uy, r, xs, ys, eps * (1 + r)):
                    best = r
    return best


def _subsets_hit(x0, y0, nx, ny, R, need, include_center):
    from itertools import combinations

    pts = list(range(len(nx)))
    if len(pts) < need:
        return False
    for sel in combinations(pts, need):
        xs = np.array(([x0] if include_center else []) + [nx[s] for s in sel])
        ys = np.array(([y0] if include_center else []) + [ny[s] for s in sel])
        if meb_radius(xs, ys) <= R:
            return True
    return False


def hardkball_hit(x0, y0, nx, ny, R, kball):
    return _subsets_hit(x0, y0, nx, ny, R, kball - 1, include_center=True)


def config_has_kball(nx, ny, R, kball):
    return _subsets_hit(0.0, 0.0, nx, ny, R, kball, include_center=False)


def area_uncovered(x0, y0, nx, ny, R, res):
    if len(nx) == 0:
        return math.pi * R * R
    step = 2.0 * R / res
    ax = x0 - R + (np.arange(res) + 0.5) * step
    ay = y0 - R + (np.arange(res) + 0.5) * step
    gx, gy = np.meshgrid(ax, ay, indexing="ij")
    inside = (gx - x0) ** 2 + (gy - y0) ** 2 <= R * R
    covered = np.zeros_like(inside)
    for qx, qy in zip(nx, ny):
        covered |= (gx - qx) ** 2 + (gy - qy) ** 2 <= R * R
    n_in = int(inside.sum())
    n_unc = int((inside & ~covered).sum())
    return math.pi * R * R * n_unc / n_in


def delta_energy(family, x, nbr_pos, breaks, values, fR, fk, area_res):
    """Energy increment of inserting x; mirrors the JIT helper."""
    nbr_pos = np.asarray(nbr_pos, dtype=float).reshape(-1, len(x))
    if family == FAM_PAIR:
        if len(nbr_pos) == 0:
            return 0.0
        dist = np.sqrt(((nbr_pos - np.asarray(x)) ** 2).sum(axis=1))
        vals = phi_step(dist, breaks, values)
        return float(vals.sum())
    nx, ny = nbr_pos[:, 0], nbr_pos[:, 1]
    if family == FAM_AREA:
        return area_uncovered(x[0], x[1], nx, ny, fR, area_res)
    if family == FAM_HARDKBALL:
        if config_has_kball(nx, ny, fR, fk):
            return 0.0
        return np.inf if hardkball_hit(x[0], x[1], nx, ny, fR, fk) else 0.0
    raise ValueError(f"unknown family id {family}")


# ---------------------------------------------------------------------------
# free birth-death machinery (RNG-exact mirror of the JIT version)


def _exp_draw(rs):
    return -math.log(1.0 - rs.random_sample())


def _poisson_block(rs, lam):
    L = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        k += 1
        p *= rs.random_sample()
        if p <= L:
            break
    return k - 1


def _poisson_draw(rs, lam):
    total = 0
    while lam > 50.0:
        total += _poisson_block(rs, 50.0)
        lam -= 50.0
    return total + _poisson_block(rs, lam)


class _PointStore:
    def __init__(self, d):
        self.pos = []
        self.birth = []
        self.death = []
        self.coin = []
        self.d = d

    def add(self, pos, birth, death, coin):
        self.pos.append(pos)
        self.birth.append(birth)
        self.death.append(death)
        self.coin.append(coin)
        return len(self.pos) - 1


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
    rs = np.random.RandomState(seed)
    nc = max(1, int(math.ceil(2.0 * hw / cellside_target)))
    cs = 2.0 * hw / nc
    ncell = nc**d
    rate = tau * cs**d

    store = _PointStore(d)
    cell_pts = [[] for _ in range(ncell)]
    frontier = np.zeros(ncell)
    status = {}
    gen = {}
    ancestors = {}
    events = 0

    def cell_corner(c):
        corner = [0.0] * d
        for k in range(d - 1, -1, -1):
            corner[k] = -hw + (c % nc) * cs
            c //= nc
        return corner

    for c in range(ncell):
        corner = cell_corner(c)
        for _ in range(_poisson_draw(rs, rate)):
            p = [corner[k] + cs * rs.random_sample() for k in range(d)]
            b = -_exp_draw(rs)
            u = rs.random_sample()
            i = store.add(p, b, math.inf, u)
            cell_pts[c].append(i)
            status[i] = 1
            gen[i] = 0
            events += 1
    n_init = len(store.pos)
    if events > budget:
        return np.empty((0, d)), -1, events, 0, 0.0
    queue = list(range(n_init))
    qh = 0
    r2 = rpsi * rpsi

    def cell_box(x):
        rngs = []
        for k in range(d):
            a = int((x[k] - rpsi + hw) / cs)
            b = int((x[k] + rpsi + hw) / cs)
            a = min(max(a, 0), nc - 1)
            b = min(max(b, 0), nc - 1)
            rngs.append(range(a, b + 1))
        return rngs

    def flat_cells(rngs):
        cells = [0]
        for k in range(d):
            cells = [c * nc + q for c in cells for q in rngs[k]]
        return cells

    budget_hit = False
    while qh < len(queue) and not budget_hit:
        i = queue[qh]
        qh += 1
        t = store.birth[i]
        xi = store.pos[i]
        anc = []
        for c in flat_cells(cell_box(xi)):
            if frontier[c] > t:
                dt = frontier[c] - t
                kdraw = _poisson_draw(rs, rate * dt)
                corner = cell_corner(c)
                for _ in range(kdraw):
                    dth = t + rs.random_sample() * dt
                    p = [corner[k] + cs * rs.random_sample() for k in range(d)]
                    b = dth - _exp_draw(rs)
                    u = rs.random_sample()
                    j = store.add(p, b, dth, u)
                    cell_pts[c].append(j)
                    events += 1
                    if events > budget:
                        budget_hit = True
                        break
                frontier[c] = t
            if budget_hit:
                break
            # match the JIT scan order: newest cell entries first
            for j in reversed(cell_pts[c]):
                if j != i and store.birth[j] < t < store.death[j]:
                    d2 = sum((store.pos[j][k] - xi[k]) ** 2 for k in range(d))
                    if d2 <= r2:
                        anc.append(j)
                        if status.get(j, 0) == 0:
                            status[j] = 1
                            gen[j] = gen[i] + 1
                            queue.append(j)
        ancestors[i] = anc

    if budget_hit:
        return np.empty((0, d)), -1, events, 0, 0.0

    order = sorted(queue, key=lambda i: store.birth[i])
    accepted = {}
    for i in order:
        if beta == 0.0:
            accepted[i] = True
            continue
        # newest-first, matching the JIT edge-list traversal order
        nbr = [store.pos[j] for j in reversed(ancestors[i]) if accepted.get(j, False)]
        delta = delta_energy(
            family,
            store.pos[i],
            np.array(nbr).reshape(-1, d),
            breaks,
            values,
            fR,
            fk,
            area_res,
        )
        accepted[i] = store.coin[i] < (0.0 if delta == np.inf else math.exp(-beta * delta))

    clo_pos = np.array([store.pos[i] for i in queue]).reshape(-1, d)
    maxgen = max((gen[i] for i in queue), default=0)
    diag = 0.0
    if len(clo_pos):
        span = clo_pos.max(axis=0) - clo_pos.min(axis=0)
        diag = float(np.sqrt((span**2).sum())) + 2.0 * rpsi
    out = [
        store.pos[i]
        for i in range(n_init)
        if accepted[i] and all(abs(store.pos[i][k]) <= crop_half for k in range(d))
    ]
    return np.array(out).reshape(-1, d), len(queue), events, maxgen, diag


def clan_probe(seed, d, rpsi, tau, cellside, budget, reps):
    rs = np.random.RandomState(seed)
    sizes = np.empty(reps, np.int64)
    diams = np.empty(reps)
    gens = np.empty(reps, np.int64)
    cs = cellside
    rate = tau * cs**d
    r2 = rpsi * rpsi
    for rep in range(reps):
        pos = [[0.0] * d]
        birth = [0.0]
        death = [math.inf]
        gen = [0]
        status = {0: 1}
        cell_pts = {}
        frontier = {}
        queue = [0]
        qh = 0
        events = 0
        failed = False
        while qh < len(queue) and not failed:
            i = queue[qh]
            qh += 1
            t = birth[i]
            xi = pos[i]
            rngs = [
                range(
                    int(math.floor((xi[k] - rpsi) / cs)),
                    int(math.floor((xi[k] + rpsi) / cs)) + 1,
                )
                for k in range(d)
            ]
            keys = [()]
            for k in range(d):
                keys = [q + (v,) for q in keys for v in rngs[k]]
            for key in keys:
                if key not in cell_pts:
                    cell_pts[key] = []
                    frontier[key] = 0.0
                    corner = [key[k] * cs for k in range(d)]
                    for _ in range(_poisson_draw(rs, rate)):
                        p = [corner[k] + cs * rs.random_sample() for k in range(d)]
                        b = -_exp_draw(rs)
                        pos.append(p)
                        birth.append(b)
                        death.append(math.inf)
                        gen.append(0)
                        cell_pts[key].append(len(pos) - 1)
                        events += 1
                if frontier[key] > t:
                    dt = frontier[key] - t
                    kdraw = _poisson_draw(rs, rate * dt)
                    corner = [key[k] * cs for k in range(d)]
                    for _ in range(kdraw):
                        dth = t + rs.random_sample() * dt
                        p = [corner[k] + cs * rs.random_sample() for k in range(d)]
                        b = dth - _exp_draw(rs)
                        pos.append(p)
                        birth.append(b)
                        death.append(dth)
                        gen.append(0)
                        cell_pts[key].append(len(pos) - 1)
                        events += 1
                    frontier[key] = t
                if events > budget:
                    failed = True
                    break
                for j in reversed(cell_pts[key]):
                    if j != i and birth[j] < t < death[j]:
                        d2 = sum((pos[j][k] - xi[k]) ** 2 for k in range(d))
                        if d2 <= r2 and status.get(j, 0) == 0:
                            status[j] = 1
                            gen[j] = gen[i] + 1
                            queue.append(j)
        if failed:
            sizes[rep] = -1
            diams[rep] = np.nan
            gens[rep] = -1
            continue
        sizes[rep] = len(queue)
        pts = np.array([pos[i] for i in queue])
        maxd = 0.0
        for a in range(len(queue)):
            dd = np.sqrt(((pts[a + 1 :] - pts[a]) ** 2).sum(axis=1))
            if len(dd) and dd.max() > maxd:
                maxd = float(dd.max())
        diams[rep] = maxd + 2.0 * rpsi
        gens[rep] = max(gen[i] for i in queue)
    return sizes, diams, gens
