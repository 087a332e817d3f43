"""Pure numpy kernel backend.

Mirrors the API of the compiled extension (``fiblight._core``): spherical
Fibonacci lattice ops, the path-tracing radiance estimator and the per-pixel
frame sampler. Everything here is vectorized numpy; the compiled core exists
because baking and large frames are hot loops.
"""

import numpy as np

BACKEND_NAME = "pure"

PHI = (1.0 + np.sqrt(5.0)) / 2.0
_SQRT5 = np.sqrt(5.0)

# ---------------------------------------------------------------------------
# counter-based RNG (splitmix64 streams)
# ---------------------------------------------------------------------------

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_KEY_I = _U64(0xC2B2AE3D27D4EB4F)
_KEY_J = _U64(0x165667B19E3779F9)
_KEY_S = _U64(0x27D4EB2F165667C5)
_INV53 = 1.0 / (1 << 53)


def _fmix(x):
    x = (x ^ (x >> _U64(30))) * _MIX1
    x = (x ^ (x >> _U64(27))) * _MIX2
    return x ^ (x >> _U64(31))


def stream_keys(seed, a, b, c):
    """Initial splitmix64 states for counter streams (seed, a, b, c)."""
    with np.errstate(over="ignore"):
        x = _fmix(_U64(seed & 0xFFFFFFFFFFFFFFFF) ^ (np.asarray(a, _U64) * _KEY_I))
        x = _fmix(x ^ (np.asarray(b, _U64) * _KEY_J))
        x = _fmix(x ^ (np.asarray(c, _U64) * _KEY_S))
    return x


def draw_uniform(states):
    """Advance each stream one step; returns uniforms in [0, 1)."""
    with np.errstate(over="ignore"):
        states += _GAMMA
        z = _fmix(states.copy())
    return (z >> _U64(11)).astype(np.float64) * _INV53


# ---------------------------------------------------------------------------
# spherical Fibonacci lattice
# ---------------------------------------------------------------------------


def _madfrac(a, b):
    x = a * b
    return x - np.floor(x)


def sf_points(idx, n):
    """Cartesian unit vectors for lattice indices ``idx`` of an n-point set."""
    i = np.asarray(idx, dtype=np.float64)
    phi = 2.0 * np.pi * _madfrac(i, PHI - 1.0)
    z = 1.0 - (2.0 * i + 1.0) / n
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([np.cos(phi) * s, np.sin(phi) * s, z], axis=-1)


def _local_grid(z, n):
    """Fibonacci numbers (F_{k-1}, F_k, F_{k+1}) of the lattice zone at height z."""
    st2 = np.maximum(1.0 - z * z, 1e-300)
    k = np.maximum(2.0, np.floor(
        np.log(n * np.pi * _SQRT5 * st2) / np.log(PHI * PHI)))
    fk = np.power(PHI, k) / _SQRT5
    f0 = np.round(fk)
    f1 = np.round(fk * PHI)
    return f0, f1


def _cell_corners(p, n):
    """Indices of the 4 lattice cell corners around each query point (Q, 4)."""
    phi = np.arctan2(p[:, 1], p[:, 0])
    z = p[:, 2]
    f0, f1 = _local_grid(z, n)
    b0p = 2.0 * np.pi * (_madfrac(f0 + 1.0, PHI - 1.0) - (PHI - 1.0))
    b1p = 2.0 * np.pi * (_madfrac(f1 + 1.0, PHI - 1.0) - (PHI - 1.0))
    b0z = -2.0 * f0 / n
    b1z = -2.0 * f1 / n
    det = b0p * b1z - b1p * b0z
    dz = z - (1.0 - 1.0 / n)
    c0 = np.floor((b1z * phi - b1p * dz) / det)
    c1 = np.floor((-b0z * phi + b0p * dz) / det)
    corners = np.empty((p.shape[0], 4), dtype=np.float64)
    for s, (u0, u1) in enumerate(((0, 0), (1, 0), (0, 1), (1, 1))):
        zc = b0z * (c0 + u0) + b1z * (c1 + u1) + (1.0 - 1.0 / n)
        zc = np.clip(zc, -1.0, 1.0) * 2.0 - zc
        corners[:, s] = np.floor(0.5 * n * (1.0 - zc))
    return np.clip(corners, 0.0, float(n - 1)).astype(np.int64), f0, f1


def inverse_nearest_batch(p, n):
    """Nearest lattice index per query point; ties broken by smallest index."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    cand, _, _ = _cell_corners(p, n)
    q = sf_points(cand, n)
    d2 = np.sum((q - p[:, None, :]) ** 2, axis=-1)
    # smallest distance, then smallest index: scan columns in index order
    order = np.argsort(cand, axis=1, kind="stable")
    cs = np.take_along_axis(cand, order, axis=1)
    ds = np.take_along_axis(d2, order, axis=1)
    best = np.argmin(ds, axis=1)
    return np.take_along_axis(cs, best[:, None], axis=1)[:, 0]


_POLE_CAP = 32


def neighbors_batch(p, n, k):
    """k nearest lattice indices and chordal distances, ascending (d, index)."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    corners, f0, f1 = _cell_corners(p, n)
    cols = [np.zeros_like(f0), f1 - f0, -(f1 - f0), f0, -f0,
            f1, -f1, f0 + f1, -(f0 + f1)]
    if k > 5:
        # second ring of lattice deltas, needed beyond the 5 nearest
        cols += [2 * f0, -2 * f0, 2 * f1, -2 * f1,
                 2 * f0 + f1, -(2 * f0 + f1), f0 + 2 * f1, -(f0 + 2 * f1),
                 2 * f0 - f1, -(2 * f0 - f1)]
    offs = np.stack(cols, axis=1).astype(np.int64)
    cand = (corners[:, :, None] + offs[:, None, :]).reshape(p.shape[0], -1)
    cap = np.arange(_POLE_CAP, dtype=np.int64)
    caps = np.concatenate([cap, n - 1 - cap])
    cand = np.concatenate(
        [cand, np.broadcast_to(caps, (p.shape[0], caps.size))], axis=1)
    cand = np.clip(cand, 0, n - 1)
    q = sf_points(cand, n)
    d2 = np.sum((q - p[:, None, :]) ** 2, axis=-1)
    order = np.argsort(cand, axis=1, kind="stable")
    cs = np.take_along_axis(cand, order, axis=1)
    ds = np.take_along_axis(d2, order, axis=1)
    ds[:, 1:][cs[:, 1:] == cs[:, :-1]] = np.inf  # duplicate candidates
    sel = np.argsort(ds, axis=1, kind="stable")[:, :k]
    idx = np.take_along_axis(cs, sel, axis=1)
    dist = np.sqrt(np.take_along_axis(ds, sel, axis=1))
    return idx, dist


# ---------------------------------------------------------------------------
# path tracing
# ---------------------------------------------------------------------------

_CHUNK = 1 << 22  # cap on rays x triangles per brute-force sweep


def _onb(nrm):
    """Deterministic orthonormal basis rows (t1, t2) for unit normals (A, 3)."""
    nx, ny, nz = nrm[:, 0], nrm[:, 1], nrm[:, 2]
    s = np.copysign(1.0, nz)
    a = -1.0 / (s + nz)
    b = nx * ny * a
    t1 = np.stack([1.0 + s * nx * nx * a, s * b, -s * nx], axis=1)
    t2 = np.stack([b, s + ny * ny * a, -ny], axis=1)
    return t1, t2


def _intersect_brute(o, d, pack, eps):
    """Closest triangle hit per ray; returns (t, tri) with t=inf on miss."""
    A = o.shape[0]
    T = pack.v0.shape[0]
    t_best = np.full(A, np.inf)
    tri_best = np.full(A, -1, dtype=np.int64)
    if T == 0 or A == 0:
        return t_best, tri_best
    step = max(1, _CHUNK // T)
    for lo in range(0, A, step):
        hi = min(A, lo + step)
        ob, db = o[lo:hi, None, :], d[lo:hi, None, :]
        pvec = np.cross(db, pack.e2[None, :, :])
        det = np.sum(pack.e1[None, :, :] * pvec, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / det
            tvec = ob - pack.v0[None, :, :]
            u = np.sum(tvec * pvec, axis=-1) * inv
            qvec = np.cross(tvec, pack.e1[None, :, :])
            v = np.sum(db * qvec, axis=-1) * inv
            t = np.sum(pack.e2[None, :, :] * qvec, axis=-1) * inv
        with np.errstate(invalid="ignore"):
            ok = (np.abs(det) > 1e-14) & (u >= 0.0) & (v >= 0.0) \
                & (u + v <= 1.0) & (t > eps)
        t = np.where(ok, t, np.inf)
        j = np.argmin(t, axis=1)
        rows = np.arange(hi - lo)
        t_best[lo:hi] = t[rows, j]
        tri_best[lo:hi] = np.where(np.isfinite(t_best[lo:hi]), j, -1)
    return t_best, tri_best


def _occluded(o, d, dist, pack, eps):
    t, _ = _intersect_brute(o, d, pack, eps)
    return t < dist - eps


def trace_radiance(origins, dirs, states, pack, max_depth):
    """Radiance estimate per ray (one sample each), advancing ``states``.

    Estimator: emission on the first hit, next-event estimation toward
    emissive triangles at every hit, cosine-weighted diffuse bounces,
    hard depth cutoff. Non-finite results are zeroed and counted.
    """
    K = origins.shape[0]
    L = np.zeros((K, 3))
    beta = np.ones((K, 3))
    o = np.array(origins, dtype=np.float64)
    d = np.array(dirs, dtype=np.float64)
    alive = np.ones(K, dtype=bool)
    eps = pack.eps
    has_lights = pack.lt_ids.size > 0
    for seg in range(max_depth):
        ia = np.flatnonzero(alive)
        if ia.size == 0:
            break
        t, tri = _intersect_brute(o[ia], d[ia], pack, eps)
        miss = ~np.isfinite(t)
        L[ia[miss]] += beta[ia[miss]] * pack.env[None, :]
        alive[ia[miss]] = False
        ih = ia[~miss]
        if ih.size == 0:
            # keep draw order stable: nothing left to draw for
            continue
        trih = tri[~miss]
        sub = states[ih]  # fancy indexing copies; written back below
        x = o[ih] + t[~miss, None] * d[ih]
        ng = pack.nrm[trih]
        nf = np.where(np.sum(ng * d[ih], axis=1)[:, None] > 0.0, -ng, ng)
        mat = pack.mat[trih]
        if seg == 0:
            L[ih] += beta[ih] * pack.emit[mat]
        alb = pack.alb[mat]
        if has_lights:
            u0 = draw_uniform(sub)
            u1 = draw_uniform(sub)
            u2 = draw_uniform(sub)
            pick = np.minimum(
                np.searchsorted(pack.lt_cdf, u0, side="right"),
                pack.lt_ids.size - 1)
            lt = pack.lt_ids[pick]
            fold = u1 + u2 > 1.0
            u1 = np.where(fold, 1.0 - u1, u1)
            u2 = np.where(fold, 1.0 - u2, u2)
            q = pack.v0[lt] + u1[:, None] * pack.e1[lt] + u2[:, None] * pack.e2[lt]
            wi = q - x
            dist2 = np.sum(wi * wi, axis=1)
            dist = np.sqrt(dist2)
            ok = dist > eps
            wi = np.where(ok[:, None], wi / np.maximum(dist, eps)[:, None], 0.0)
            cos_s = np.sum(nf * wi, axis=1)
            cos_l = np.abs(np.sum(pack.nrm[lt] * wi, axis=1))
            ok &= cos_s > 0.0
            io = np.flatnonzero(ok)
            if io.size:
                shadowed = _occluded(
                    x[io] + nf[io] * eps, wi[io], dist[io], pack, eps)
                io = io[~shadowed]
            contrib = np.zeros_like(x)
            if io.size:
                g = cos_s[io] * cos_l[io] \
                    / np.maximum(dist2[io], max(pack.lt_clamp, eps * eps))
                contrib[io] = (alb[io] / np.pi) * pack.emit[pack.mat[lt[io]]] \
                    * (g * pack.lt_area)[:, None]
            L[ih] += beta[ih] * contrib
        # diffuse bounce
        b1 = draw_uniform(sub)
        b2 = draw_uniform(sub)
        states[ih] = sub
        if seg == max_depth - 1:
            alive[ih] = False
            continue
        beta[ih] *= alb
        r = np.sqrt(b1)
        ang = 2.0 * np.pi * b2
        zc = np.sqrt(np.maximum(0.0, 1.0 - b1))
        t1, t2 = _onb(nf)
        nd = (r * np.cos(ang))[:, None] * t1 + (r * np.sin(ang))[:, None] * t2 \
            + zc[:, None] * nf
        o[ih] = x + nf * eps
        d[ih] = nd
        dead = np.max(beta[ih], axis=1) <= 0.0
        alive[ih[dead]] = False
    bad = ~np.all(np.isfinite(L), axis=1)
    L[bad] = 0.0
    return L, int(np.count_nonzero(bad))


# ---------------------------------------------------------------------------
# frame sampling
# ---------------------------------------------------------------------------


def _tent(d, h):
    return np.maximum(0.0, 1.0 - d / h)


def render_pixels(texels, m, n, hemi, radius, center, eye, right, up, fwd,
                  tan_half, width, height, filtered, h_m, h_n):
    """Sample a full frame from the baked texture.

    Returns (linear RGB image (H, W, 3), coverage (H, W), texel fetch count,
    eye-inside-sphere flag).
    """
    rows = texels.shape[0]
    px = (np.arange(width) + 0.5) / width * 2.0 - 1.0
    py = 1.0 - (np.arange(height) + 0.5) / height * 2.0
    aspect = width / height
    u = np.repeat(py, width)[:, None] * tan_half * up[None, :]
    v = np.tile(px, height)[:, None] * tan_half * aspect * right[None, :]
    d = fwd[None, :] + u + v
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    oc = eye - center
    b = d @ oc
    c = oc @ oc - radius * radius
    disc = b * b - c
    hit = disc > 1e-12
    s = np.sqrt(np.maximum(disc, 0.0))
    t0 = -b - s
    t1 = -b + s
    inside = c < 0.0
    front = hit & (t1 > 1e-12) & (inside | (t0 > 1e-12))
    Q = np.flatnonzero(front)
    img = np.zeros((height * width, 3))
    cov = np.zeros(height * width, dtype=bool)
    fetches = 0
    if Q.size:
        if inside:
            h_o = np.broadcast_to(oc / np.linalg.norm(oc), (Q.size, 3))
        else:
            h_o = (eye + t0[Q, None] * d[Q] - center) / radius
        h_d = (eye + t1[Q, None] * d[Q] - center) / radius
        h_o = h_o / np.linalg.norm(h_o, axis=1, keepdims=True)
        h_d = h_d / np.linalg.norm(h_d, axis=1, keepdims=True)
        i0 = inverse_nearest_batch(h_o, m)
        j0 = inverse_nearest_batch(h_d, n)
        covered = i0 < rows
        Qc = np.flatnonzero(covered)
        if Qc.size:
            near_tex = texels[i0[Qc], j0[Qc]]
            near_rgb = near_tex[:, :3].astype(np.float64) / 255.0
            near_ok = near_tex[:, 3] > 0
            if filtered:
                kk = min(5, min(m, n))
                io, do = neighbors_batch(h_o[Qc], m, kk)
                jo, dd = neighbors_batch(h_d[Qc], n, kk)
                fetches += Qc.size * kk * kk
                wo = _tent(do, h_m)
                wd = _tent(dd, h_n)
                row_ok = io < rows
                ic = np.minimum(io, rows - 1)
                tex = texels[ic[:, :, None], jo[:, None, :]]
                w = wo[:, :, None] * wd[:, None, :] \
                    * row_ok[:, :, None] * (tex[:, :, :, 3] > 0)
                wsum = np.sum(w, axis=(1, 2))
                rgb = np.sum(
                    w[..., None] * tex[..., :3].astype(np.float64) / 255.0,
                    axis=(1, 2))
                good = wsum > 0.0
                out = np.where(good[:, None], rgb / np.maximum(wsum, 1e-300)[:, None],
                               near_rgb)
                ok = good | near_ok
            else:
                fetches += Qc.size
                out = near_rgb
                ok = near_ok
            sel = Q[Qc]
            img[sel] = np.where(ok[:, None], out, 0.0)
            cov[sel] = ok
    return (img.reshape(height, width, 3), cov.reshape(height, width),
            fetches, bool(inside))
