"""Pure-numpy versions of the compiled kernels in ``_ckernels.pyx``."""
import numpy as np


def cast_rays(origin, dirs, boxes, ground, max_range):
    """First hit of every ray against the ground plane and a set of yawed boxes.

    ``boxes`` rows are ``(cx, cy, cos_yaw, sin_yaw, half_len, half_wid, z0, z1)``.
    Returns ``(t, tag)``: hit distance (inf for a miss) and surface tag
    (-1 miss, 0 ground, j + 1 for box row j).
    """
    origin = np.asarray(origin, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    boxes = np.asarray(boxes, dtype=float).reshape(-1, 8)
    ox, oy, oz = origin
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    n = len(dirs)
    best = np.full(n, np.inf)
    tag = np.full(n, -1, dtype=np.int32)

    if ground:
        down = dz < 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            tg = np.where(down, -oz / dz, np.inf)
        hit = down & (tg > 0.0)
        best[hit] = tg[hit]
        tag[hit] = 0

    for j, (cx, cy, c, s, hx, hy, z0, z1) in enumerate(boxes):
        lox = c * (ox - cx) + s * (oy - cy)
        loy = -s * (ox - cx) + c * (oy - cy)
        ldx = c * dx + s * dy
        ldy = -s * dx + c * dy
        tnear = np.full(n, -np.inf)
        tfar = np.full(n, np.inf)
        valid = np.ones(n, dtype=bool)
        for lo, hi, o, d in ((-hx, hx, lox, ldx), (-hy, hy, loy, ldy), (z0, z1, oz, dz)):
            par = np.abs(d) < 1e-300
            if np.isscalar(o):
                o = np.full(n, o)
            valid &= ~(par & ((o < lo) | (o > hi)))
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (lo - o) / d
                t2 = (hi - o) / d
            t1, t2 = np.where(par, -np.inf, np.minimum(t1, t2)), np.where(par, np.inf, np.maximum(t1, t2))
            tnear = np.maximum(tnear, t1)
            tfar = np.minimum(tfar, t2)
        hit = valid & (tnear <= tfar) & (tnear > 0.0) & (tnear < best)
        best[hit] = tnear[hit]
        tag[hit] = j + 1

    keep = (tag >= 0) & (best <= max_range)
    best[~keep] = np.inf
    tag[~keep] = -1
    return best, tag


def closeness_scores(points, thetas, clamp):
    """Summed reciprocal closeness per candidate angle (radians)."""
    pts = np.asarray(points, dtype=float)
    th = np.asarray(thetas, dtype=float)
    c, s = np.cos(th)[:, None], np.sin(th)[:, None]
    p1 = pts[:, 0] * c + pts[:, 1] * s
    p2 = -pts[:, 0] * s + pts[:, 1] * c
    out = np.zeros(len(th))
    for proj in (p1, p2):
        lo = proj.min(axis=1, keepdims=True)
        hi = proj.max(axis=1, keepdims=True)
        d = np.minimum(hi - proj, proj - lo)
        out += (1.0 / np.maximum(d, clamp)).sum(axis=1)
    return out
