"""Shared constants and the spatial-grid builder used by both backends."""

import numpy as np

CORR_NONE = 0
CORR_TRANSLATION = 1
CORR_RIGID = 2
CORR_BORDER = 3
CORR_ISOTROPIC = 4

FAM_PAIR = 0
FAM_AREA = 1
FAM_HARDKBALL = 2

#: sample-grid resolution (per axis) for the area-interaction increment
AREA_GRID_RES = 64


def build_cell_index(pos: np.ndarray, L: float, rmax: float):
    """Flat spatial grid with cell size >= rmax over [-L/2, L/2]^d.

    Returns (nc, csize, cell_start, cell_items): points of cell c are
    ``cell_items[cell_start[c]:cell_start[c+1]]`` in ascending index
    order, with c the row-major flat index over the d-dimensional grid.
    """
    n, d = pos.shape
    nc = max(1, int(L / rmax)) if rmax > 0 else 1
    csize = L / nc
    half = 0.5 * L
    q = ((pos + half) / csize).astype(np.int64)
    np.clip(q, 0, nc - 1, out=q)
    flat = np.zeros(n, dtype=np.int64)
    for k in range(d):
        flat = flat * nc + q[:, k]
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=nc**d)
    cell_start = np.zeros(nc**d + 1, dtype=np.int64)
    np.cumsum(counts, out=cell_start[1:])
    return nc, csize, cell_start, order
