# cython: language_level=3
"""Compiled kernel backend.

Same API surface as ``fiblight._pure``: spherical Fibonacci lattice ops,
the path-tracing radiance estimator (BVH-accelerated here) and the
per-pixel frame sampler.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport (INFINITY, M_PI, atan2, cos, fabs, floor, log, pow,
                        round as c_round, sin, sqrt)

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double PHI = (1.0 + sqrt(5.0)) / 2.0
cdef double SQRT5 = sqrt(5.0)

ctypedef unsigned long long u64

# ---------------------------------------------------------------------------
# counter-based RNG (splitmix64 streams)
# ---------------------------------------------------------------------------

cdef u64 GAMMA = 0x9E3779B97F4A7C15ULL
cdef u64 MIX1 = 0xBF58476D1CE4E5B9ULL
cdef u64 MIX2 = 0x94D049BB133111EBULL
cdef u64 KEY_I = 0xC2B2AE3D27D4EB4FULL
cdef u64 KEY_J = 0x165667B19E3779F9ULL
cdef u64 KEY_S = 0x27D4EB2F165667C5ULL
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline u64 fmix(u64 x) noexcept nogil:
    x = (x ^ (x >> 30)) * MIX1
    x = (x ^ (x >> 27)) * MIX2
    return x ^ (x >> 31)


cdef inline double draw(u64* state) noexcept nogil:
    state[0] += GAMMA
    return <double>(fmix(state[0]) >> 11) * INV53


def stream_keys(seed, a, b, c):
    """Initial splitmix64 states for counter streams (seed, a, b, c)."""
    a_, b_, c_ = np.broadcast_arrays(np.asarray(a, np.uint64),
                                     np.asarray(b, np.uint64),
                                     np.asarray(c, np.uint64))
    shape = a_.shape
    cdef u64[::1] av = np.ascontiguousarray(a_).ravel()
    cdef u64[::1] bv = np.ascontiguousarray(b_).ravel()
    cdef u64[::1] cv = np.ascontiguousarray(c_).ravel()
    out = np.empty(av.shape[0], dtype=np.uint64)
    cdef u64[::1] ov = out
    cdef u64 sd = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t q
    for q in range(av.shape[0]):
        ov[q] = fmix(fmix(fmix(sd ^ (av[q] * KEY_I)) ^ (bv[q] * KEY_J))
                     ^ (cv[q] * KEY_S))
    return out.reshape(shape)


def draw_uniform(states):
    """Advance each stream one step; returns uniforms in [0, 1)."""
    cdef u64[::1] sv = states.ravel()
    out = np.empty(sv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t q
    for q in range(sv.shape[0]):
        sv[q] += GAMMA
        ov[q] = <double>(fmix(sv[q]) >> 11) * INV53
    return out.reshape(states.shape)


# ---------------------------------------------------------------------------
# spherical Fibonacci lattice
# ---------------------------------------------------------------------------


cdef inline double madfrac(double a, double b) noexcept nogil:
    cdef double x = a * b
    return x - floor(x)


cdef inline void sf_point_c(double i, double n, double* out) noexcept nogil:
    cdef double phi = 2.0 * M_PI * madfrac(i, PHI - 1.0)
    cdef double z = 1.0 - (2.0 * i + 1.0) / n
    cdef double s2 = 1.0 - z * z
    cdef double s = sqrt(s2 if s2 > 0.0 else 0.0)
    out[0] = cos(phi) * s
    out[1] = sin(phi) * s
    out[2] = z


def sf_points(idx, n):
    """Cartesian unit vectors for lattice indices ``idx`` of an n-point set."""
    arr = np.ascontiguousarray(np.atleast_1d(idx), dtype=np.float64)
    out = np.empty((arr.shape[0], 3), dtype=np.float64)
    cdef double[::1] av = arr
    cdef double[:, ::1] ov = out
    cdef double nn = <double>n
    cdef Py_ssize_t q
    for q in range(av.shape[0]):
        sf_point_c(av[q], nn, &ov[q, 0])
    if np.ndim(idx) == 0:
        return out[0]
    return out


cdef inline void cell_corners_c(double x, double y, double z, double n,
                                long* corners, double* f0o, double* f1o) noexcept nogil:
    cdef double phi = atan2(y, x)
    cdef double st2 = 1.0 - z * z
    if st2 < 1e-300:
        st2 = 1e-300
    cdef double k = floor(log(n * M_PI * SQRT5 * st2) / log(PHI * PHI))
    if k < 2.0:
        k = 2.0
    cdef double fk = pow(PHI, k) / SQRT5
    cdef double f0 = c_round(fk)
    cdef double f1 = c_round(fk * PHI)
    cdef double b0p = 2.0 * M_PI * (madfrac(f0 + 1.0, PHI - 1.0) - (PHI - 1.0))
    cdef double b1p = 2.0 * M_PI * (madfrac(f1 + 1.0, PHI - 1.0) - (PHI - 1.0))
    cdef double b0z = -2.0 * f0 / n
    cdef double b1z = -2.0 * f1 / n
    cdef double det = b0p * b1z - b1p * b0z
    cdef double dz = z - (1.0 - 1.0 / n)
    cdef double c0 = floor((b1z * phi - b1p * dz) / det)
    cdef double c1 = floor((-b0z * phi + b0p * dz) / det)
    cdef int s, u0, u1
    cdef double zc, ic
    for s in range(4):
        u0 = s & 1
        u1 = s >> 1
        zc = b0z * (c0 + u0) + b1z * (c1 + u1) + (1.0 - 1.0 / n)
        if zc > 1.0:
            zc = 2.0 - zc
        elif zc < -1.0:
            zc = -2.0 - zc
        ic = floor(0.5 * n * (1.0 - zc))
        if ic < 0.0:
            ic = 0.0
        elif ic > n - 1.0:
            ic = n - 1.0
        corners[s] = <long>ic
    f0o[0] = f0
    f1o[0] = f1


cdef inline long inverse_nearest_c(double x, double y, double z, long n) noexcept nogil:
    cdef long corners[4]
    cdef double f0, f1
    cdef double q[3]
    cdef double d2, dx, dy, dzz
    cdef double best_d = INFINITY
    cdef long best_i = 0
    cdef int s
    cdef long ci
    cell_corners_c(x, y, z, <double>n, corners, &f0, &f1)
    for s in range(4):
        ci = corners[s]
        sf_point_c(<double>ci, <double>n, q)
        dx = q[0] - x
        dy = q[1] - y
        dzz = q[2] - z
        d2 = dx * dx + dy * dy + dzz * dzz
        if d2 < best_d or (d2 == best_d and ci < best_i):
            best_d = d2
            best_i = ci
    return best_i


def inverse_nearest_batch(p, n):
    """Nearest lattice index per query point; ties broken by smallest index."""
    arr = np.ascontiguousarray(p, dtype=np.float64)
    out = np.empty(arr.shape[0], dtype=np.int64)
    cdef double[:, ::1] pv = arr
    cdef long[::1] ov = out
    cdef long nn = n
    cdef Py_ssize_t q
    with nogil:
        for q in range(pv.shape[0]):
            ov[q] = inverse_nearest_c(pv[q, 0], pv[q, 1], pv[q, 2], nn)
    return out


DEF MAXCAND = 160
DEF POLECAP = 32


cdef inline int neighbor_select_c(double x, double y, double z, long n, int k,
                                  long* out_idx, double* out_d) noexcept nogil:
    """k nearest lattice points from a constant-size candidate set.

    Returns the number of distinct neighbors written (== k for n >= k).
    """
    cdef long corners[4]
    cdef double f0, f1
    cell_corners_c(x, y, z, <double>n, corners, &f0, &f1)
    cdef long cand[MAXCAND]
    cdef double cd2[MAXCAND]
    cdef long offs[19]
    cdef int nc = 0, s, o, m, noffs = 9
    cdef long ci, lo_c = n, hi_c = -1
    offs[0] = 0
    offs[1] = <long>(f1 - f0)
    offs[2] = -offs[1]
    offs[3] = <long>f0
    offs[4] = -offs[3]
    offs[5] = <long>f1
    offs[6] = -offs[5]
    offs[7] = <long>(f0 + f1)
    offs[8] = -offs[7]
    if k > 5:
        # second ring of lattice deltas, needed beyond the 5 nearest
        offs[9] = 2 * <long>f0
        offs[10] = -offs[9]
        offs[11] = 2 * <long>f1
        offs[12] = -offs[11]
        offs[13] = 2 * <long>f0 + <long>f1
        offs[14] = -offs[13]
        offs[15] = <long>f0 + 2 * <long>f1
        offs[16] = -offs[15]
        offs[17] = 2 * <long>f0 - <long>f1
        offs[18] = -offs[17]
        noffs = 19
    for s in range(4):
        if corners[s] < lo_c:
            lo_c = corners[s]
        if corners[s] > hi_c:
            hi_c = corners[s]
        for o in range(noffs):
            ci = corners[s] + offs[o]
            if ci < 0:
                ci = 0
            elif ci >= n:
                ci = n - 1
            cand[nc] = ci
            nc += 1
    if lo_c < 2 * POLECAP:
        for o in range(POLECAP):
            if o < n:
                cand[nc] = o
                nc += 1
    if hi_c > n - 1 - 2 * POLECAP:
        for o in range(POLECAP):
            if n - 1 - o >= 0:
                cand[nc] = n - 1 - o
                nc += 1
    cdef double q[3]
    cdef double dx, dy, dz
    for s in range(nc):
        sf_point_c(<double>cand[s], <double>n, q)
        dx = q[0] - x
        dy = q[1] - y
        dz = q[2] - z
        cd2[s] = dx * dx + dy * dy + dz * dz
    # insertion sort by (distance, index)
    cdef double dv
    cdef long iv
    for s in range(1, nc):
        dv = cd2[s]
        iv = cand[s]
        m = s - 1
        while m >= 0 and (cd2[m] > dv or (cd2[m] == dv and cand[m] > iv)):
            cd2[m + 1] = cd2[m]
            cand[m + 1] = cand[m]
            m -= 1
        cd2[m + 1] = dv
        cand[m + 1] = iv
    cdef int written = 0
    cdef long prev = -1
    for s in range(nc):
        if cand[s] == prev:
            continue
        out_idx[written] = cand[s]
        out_d[written] = sqrt(cd2[s])
        prev = cand[s]
        written += 1
        if written == k:
            break
    return written


def neighbors_batch(p, n, k):
    """k nearest lattice indices and chordal distances, ascending (d, index)."""
    arr = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t nq = arr.shape[0]
    idx = np.empty((nq, k), dtype=np.int64)
    dist = np.empty((nq, k), dtype=np.float64)
    cdef double[:, ::1] pv = arr
    cdef long[:, ::1] iv = idx
    cdef double[:, ::1] dv = dist
    cdef long nn = n
    cdef int kk = k
    cdef Py_ssize_t q
    with nogil:
        for q in range(nq):
            neighbor_select_c(pv[q, 0], pv[q, 1], pv[q, 2], nn, kk,
                              &iv[q, 0], &dv[q, 0])
    return idx, dist


# ---------------------------------------------------------------------------
# path tracing
# ---------------------------------------------------------------------------


cdef struct SceneView:
    double* v0
    double* e1
    double* e2
    double* nrm
    int* mat
    double* alb
    double* emit
    double* env
    int* lt_ids
    double* lt_cdf
    double lt_area
    double lt_clamp
    double eps
    Py_ssize_t ntri
    Py_ssize_t nlt
    double* bmin
    double* bmax
    int* bleft
    int* bright
    int* bfirst
    int* bcount
    Py_ssize_t nnode


cdef inline bint aabb_hit(SceneView* sv, Py_ssize_t node, double* o,
                          double* inv, double tmax) noexcept nogil:
    cdef double t0 = 1e-12, t1 = tmax
    cdef double lo, hi, tmp
    cdef int ax
    for ax in range(3):
        lo = (sv.bmin[node * 3 + ax] - o[ax]) * inv[ax]
        hi = (sv.bmax[node * 3 + ax] - o[ax]) * inv[ax]
        if lo > hi:
            tmp = lo
            lo = hi
            hi = tmp
        if lo > t0:
            t0 = lo
        if hi < t1:
            t1 = hi
        if t0 > t1:
            return False
    return True


cdef inline void tri_hit(SceneView* sv, Py_ssize_t tri, double* o, double* d,
                         double* t_best, long* tri_best) noexcept nogil:
    cdef double* v0 = sv.v0 + tri * 3
    cdef double* e1 = sv.e1 + tri * 3
    cdef double* e2 = sv.e2 + tri * 3
    cdef double px = d[1] * e2[2] - d[2] * e2[1]
    cdef double py = d[2] * e2[0] - d[0] * e2[2]
    cdef double pz = d[0] * e2[1] - d[1] * e2[0]
    cdef double det = e1[0] * px + e1[1] * py + e1[2] * pz
    if fabs(det) <= 1e-14:
        return
    cdef double inv = 1.0 / det
    cdef double tx = o[0] - v0[0]
    cdef double ty = o[1] - v0[1]
    cdef double tz = o[2] - v0[2]
    cdef double u = (tx * px + ty * py + tz * pz) * inv
    if u < 0.0 or u > 1.0:
        return
    cdef double qx = ty * e1[2] - tz * e1[1]
    cdef double qy = tz * e1[0] - tx * e1[2]
    cdef double qz = tx * e1[1] - ty * e1[0]
    cdef double v = (d[0] * qx + d[1] * qy + d[2] * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return
    cdef double t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv
    if t > sv.eps and t < t_best[0]:
        t_best[0] = t
        tri_best[0] = <long>tri


cdef inline double scene_intersect(SceneView* sv, double* o, double* d,
                                   long* tri_out) noexcept nogil:
    cdef double t_best = INFINITY
    cdef long tri_best = -1
    cdef double inv[3]
    cdef Py_ssize_t stack[64]
    cdef Py_ssize_t sp = 0, node, tri
    cdef int ax
    tri_out[0] = -1
    if sv.nnode == 0:
        return INFINITY
    for ax in range(3):
        inv[ax] = 1.0 / d[ax] if d[ax] != 0.0 else INFINITY
    stack[sp] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if not aabb_hit(sv, node, o, inv, t_best):
            continue
        if sv.bcount[node] > 0:
            for tri in range(sv.bfirst[node], sv.bfirst[node] + sv.bcount[node]):
                tri_hit(sv, tri, o, d, &t_best, &tri_best)
        else:
            stack[sp] = sv.bleft[node]
            stack[sp + 1] = sv.bright[node]
            sp += 2
    tri_out[0] = tri_best
    return t_best


cdef inline bint scene_occluded(SceneView* sv, double* o, double* d,
                                double dist) noexcept nogil:
    cdef long tri
    cdef double t = scene_intersect(sv, o, d, &tri)
    return t < dist - sv.eps


cdef inline void onb_c(double* n, double* t1, double* t2) noexcept nogil:
    cdef double s = 1.0 if n[2] >= 0.0 else -1.0
    cdef double a = -1.0 / (s + n[2])
    cdef double b = n[0] * n[1] * a
    t1[0] = 1.0 + s * n[0] * n[0] * a
    t1[1] = s * b
    t1[2] = -s * n[0]
    t2[0] = b
    t2[1] = s + n[1] * n[1] * a
    t2[2] = -n[1]


cdef void trace_one(SceneView* sv, double* o_in, double* d_in, u64* state,
                    int max_depth, double* L) noexcept nogil:
    cdef double o[3]
    cdef double d[3]
    cdef double beta[3]
    cdef double x[3]
    cdef double nf[3]
    cdef double wi[3]
    cdef double t1[3]
    cdef double t2[3]
    cdef double q[3]
    cdef long tri, lt, pick
    cdef int seg, ax, lo, hi, mid
    cdef double t, u0, u1, u2, b1, b2, dist2, dist, cos_s, cos_l, g, r, ang, zc
    cdef Py_ssize_t m
    for ax in range(3):
        o[ax] = o_in[ax]
        d[ax] = d_in[ax]
        beta[ax] = 1.0
        L[ax] = 0.0
    for seg in range(max_depth):
        t = scene_intersect(sv, o, d, &tri)
        if tri < 0:
            for ax in range(3):
                L[ax] += beta[ax] * sv.env[ax]
            return
        for ax in range(3):
            x[ax] = o[ax] + t * d[ax]
            nf[ax] = sv.nrm[tri * 3 + ax]
        if nf[0] * d[0] + nf[1] * d[1] + nf[2] * d[2] > 0.0:
            for ax in range(3):
                nf[ax] = -nf[ax]
        m = sv.mat[tri]
        if seg == 0:
            for ax in range(3):
                L[ax] += beta[ax] * sv.emit[m * 3 + ax]
        if sv.nlt > 0:
            u0 = draw(state)
            u1 = draw(state)
            u2 = draw(state)
            # binary search: first cdf entry > u0
            lo = 0
            hi = <int>sv.nlt - 1
            while lo < hi:
                mid = (lo + hi) >> 1
                if sv.lt_cdf[mid] > u0:
                    hi = mid
                else:
                    lo = mid + 1
            lt = sv.lt_ids[lo]
            if u1 + u2 > 1.0:
                u1 = 1.0 - u1
                u2 = 1.0 - u2
            dist2 = 0.0
            for ax in range(3):
                q[ax] = sv.v0[lt * 3 + ax] + u1 * sv.e1[lt * 3 + ax] \
                    + u2 * sv.e2[lt * 3 + ax]
                wi[ax] = q[ax] - x[ax]
                dist2 += wi[ax] * wi[ax]
            dist = sqrt(dist2)
            if dist > sv.eps:
                for ax in range(3):
                    wi[ax] /= dist
                cos_s = nf[0] * wi[0] + nf[1] * wi[1] + nf[2] * wi[2]
                cos_l = fabs(sv.nrm[lt * 3] * wi[0] + sv.nrm[lt * 3 + 1] * wi[1]
                             + sv.nrm[lt * 3 + 2] * wi[2])
                if cos_s > 0.0:
                    for ax in range(3):
                        q[ax] = x[ax] + nf[ax] * sv.eps
                    if not scene_occluded(sv, q, wi, dist):
                        g = cos_s * cos_l \
                            / max(dist2, max(sv.lt_clamp, sv.eps * sv.eps))
                        for ax in range(3):
                            L[ax] += beta[ax] * (sv.alb[m * 3 + ax] / M_PI) \
                                * sv.emit[sv.mat[lt] * 3 + ax] * g * sv.lt_area
        b1 = draw(state)
        b2 = draw(state)
        if seg == max_depth - 1:
            return
        for ax in range(3):
            beta[ax] *= sv.alb[m * 3 + ax]
        if beta[0] <= 0.0 and beta[1] <= 0.0 and beta[2] <= 0.0:
            return
        r = sqrt(b1)
        ang = 2.0 * M_PI * b2
        zc = sqrt(1.0 - b1 if b1 < 1.0 else 0.0)
        onb_c(nf, t1, t2)
        for ax in range(3):
            d[ax] = r * cos(ang) * t1[ax] + r * sin(ang) * t2[ax] + zc * nf[ax]
            o[ax] = x[ax] + nf[ax] * sv.eps


cdef int fill_scene_view(SceneView* sv, pack,
                         double[:, ::1] v0, double[:, ::1] e1,
                         double[:, ::1] e2, double[:, ::1] nrm,
                         int[::1] mat, double[:, ::1] alb,
                         double[:, ::1] emit, double[::1] env,
                         int[::1] lt_ids, double[::1] lt_cdf,
                         double[:, ::1] bmin, double[:, ::1] bmax,
                         int[::1] bleft, int[::1] bright,
                         int[::1] bfirst, int[::1] bcount) except -1:
    sv.ntri = v0.shape[0]
    sv.nlt = lt_ids.shape[0]
    sv.nnode = bmin.shape[0]
    sv.lt_area = pack.lt_area
    sv.lt_clamp = pack.lt_clamp
    sv.eps = pack.eps
    sv.env = &env[0]
    if sv.ntri > 0:
        sv.v0 = &v0[0, 0]
        sv.e1 = &e1[0, 0]
        sv.e2 = &e2[0, 0]
        sv.nrm = &nrm[0, 0]
        sv.mat = &mat[0]
    if alb.shape[0] > 0:
        sv.alb = &alb[0, 0]
        sv.emit = &emit[0, 0]
    if sv.nlt > 0:
        sv.lt_ids = &lt_ids[0]
        sv.lt_cdf = &lt_cdf[0]
    if sv.nnode > 0:
        sv.bmin = &bmin[0, 0]
        sv.bmax = &bmax[0, 0]
        sv.bleft = &bleft[0]
        sv.bright = &bright[0]
        sv.bfirst = &bfirst[0]
        sv.bcount = &bcount[0]
    return 0


def trace_radiance(origins, dirs, states, pack, max_depth):
    """Radiance estimate per ray (one sample each), advancing ``states``."""
    o = np.ascontiguousarray(origins, dtype=np.float64)
    d = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef double[:, ::1] ov = o
    cdef double[:, ::1] dv = d
    cdef u64[::1] stv = states
    out = np.empty((o.shape[0], 3), dtype=np.float64)
    cdef double[:, ::1] Lv = out
    cdef SceneView sv
    fill_scene_view(&sv, pack, pack.v0, pack.e1, pack.e2, pack.nrm, pack.mat,
                    pack.alb, pack.emit, pack.env, pack.lt_ids, pack.lt_cdf,
                    pack.bvh_min, pack.bvh_max, pack.bvh_left, pack.bvh_right,
                    pack.bvh_first, pack.bvh_count)
    cdef int depth = max_depth
    cdef Py_ssize_t k, nbad = 0
    cdef int ax
    cdef bint ok
    with nogil:
        for k in range(ov.shape[0]):
            trace_one(&sv, &ov[k, 0], &dv[k, 0], &stv[k], depth, &Lv[k, 0])
            ok = True
            for ax in range(3):
                if not (Lv[k, ax] == Lv[k, ax] and
                        -INFINITY < Lv[k, ax] < INFINITY):
                    ok = False
            if not ok:
                for ax in range(3):
                    Lv[k, ax] = 0.0
                nbad += 1
    return out, int(nbad)


# ---------------------------------------------------------------------------
# frame sampling
# ---------------------------------------------------------------------------


def render_pixels(texels, m, n, hemi, radius, center, eye, right, up, fwd,
                  tan_half, width, height, filtered, h_m, h_n):
    """Sample a full frame from the baked texture.

    Returns (linear RGB image (H, W, 3), coverage (H, W), texel fetch count,
    eye-inside-sphere flag).
    """
    cdef const unsigned char[:, :, ::1] tex = texels
    cdef Py_ssize_t rows = tex.shape[0]
    cdef long mm = m, nn = n
    cdef double R = radius
    cdef double[::1] O = np.ascontiguousarray(center, dtype=np.float64)
    cdef double[::1] E = np.ascontiguousarray(eye, dtype=np.float64)
    cdef double[::1] rt = np.ascontiguousarray(right, dtype=np.float64)
    cdef double[::1] upv = np.ascontiguousarray(up, dtype=np.float64)
    cdef double[::1] fw = np.ascontiguousarray(fwd, dtype=np.float64)
    cdef double th = tan_half
    cdef Py_ssize_t W = width, H = height
    cdef bint filt = filtered
    cdef double hM = h_m, hN = h_n
    img = np.zeros((H, W, 3), dtype=np.float64)
    cov = np.zeros((H, W), dtype=np.uint8)
    cdef double[:, :, ::1] iv = img
    cdef unsigned char[:, ::1] cv = cov
    cdef double aspect = <double>W / <double>H
    cdef double oc[3]
    cdef double dvec[3]
    cdef double ho[3]
    cdef double hd[3]
    cdef double b, c, disc, s, t0, t1, px, py, norm, wsum, w
    cdef bint inside
    cdef Py_ssize_t ix, iy, ax, a5, b5
    cdef long i0, j0, ii
    cdef long io_idx[9]
    cdef long jo_idx[9]
    cdef double io_d[9]
    cdef double jo_d[9]
    cdef double wo[9]
    cdef double wd[9]
    cdef double acc[3]
    cdef long fetches = 0
    cdef int kk = 5
    if mm < kk:
        kk = <int>mm
    if nn < kk:
        kk = <int>nn
    c = 0.0
    for ax in range(3):
        oc[ax] = E[ax] - O[ax]
        c += oc[ax] * oc[ax]
    c -= R * R
    inside = c < 0.0
    cdef double ho_in[3]
    if inside:
        norm = sqrt(c + R * R)
        for ax in range(3):
            ho_in[ax] = oc[ax] / norm
    with nogil:
        for iy in range(H):
            py = 1.0 - (<double>iy + 0.5) / <double>H * 2.0
            for ix in range(W):
                px = (<double>ix + 0.5) / <double>W * 2.0 - 1.0
                norm = 0.0
                for ax in range(3):
                    dvec[ax] = fw[ax] + py * th * upv[ax] \
                        + px * th * aspect * rt[ax]
                    norm += dvec[ax] * dvec[ax]
                norm = sqrt(norm)
                b = 0.0
                for ax in range(3):
                    dvec[ax] /= norm
                    b += dvec[ax] * oc[ax]
                disc = b * b - c
                if disc <= 1e-12:
                    continue
                s = sqrt(disc)
                t0 = -b - s
                t1 = -b + s
                if t1 <= 1e-12 or (not inside and t0 <= 1e-12):
                    continue
                norm = 0.0
                for ax in range(3):
                    if inside:
                        ho[ax] = ho_in[ax]
                    else:
                        ho[ax] = (E[ax] + t0 * dvec[ax] - O[ax]) / R
                    hd[ax] = (E[ax] + t1 * dvec[ax] - O[ax]) / R
                    norm += hd[ax] * hd[ax]
                norm = sqrt(norm)
                for ax in range(3):
                    hd[ax] /= norm
                if not inside:
                    norm = sqrt(ho[0] * ho[0] + ho[1] * ho[1] + ho[2] * ho[2])
                    for ax in range(3):
                        ho[ax] /= norm
                i0 = inverse_nearest_c(ho[0], ho[1], ho[2], mm)
                if i0 >= rows:
                    continue
                j0 = inverse_nearest_c(hd[0], hd[1], hd[2], nn)
                if filt:
                    neighbor_select_c(ho[0], ho[1], ho[2], mm, kk,
                                      io_idx, io_d)
                    neighbor_select_c(hd[0], hd[1], hd[2], nn, kk,
                                      jo_idx, jo_d)
                    fetches += kk * kk
                    for a5 in range(kk):
                        wo[a5] = 1.0 - io_d[a5] / hM
                        if wo[a5] < 0.0:
                            wo[a5] = 0.0
                        wd[a5] = 1.0 - jo_d[a5] / hN
                        if wd[a5] < 0.0:
                            wd[a5] = 0.0
                    wsum = 0.0
                    for ax in range(3):
                        acc[ax] = 0.0
                    for a5 in range(kk):
                        ii = io_idx[a5]
                        if ii >= rows or wo[a5] <= 0.0:
                            continue
                        for b5 in range(kk):
                            if tex[ii, jo_idx[b5], 3] == 0:
                                continue
                            w = wo[a5] * wd[b5]
                            if w <= 0.0:
                                continue
                            wsum += w
                            for ax in range(3):
                                acc[ax] += w * tex[ii, jo_idx[b5], ax] / 255.0
                    if wsum > 0.0:
                        for ax in range(3):
                            iv[iy, ix, ax] = acc[ax] / wsum
                        cv[iy, ix] = 1
                        continue
                    # fall back to nearest
                if not filt:
                    fetches += 1
                if tex[i0, j0, 3] > 0:
                    for ax in range(3):
                        iv[iy, ix, ax] = tex[i0, j0, ax] / 255.0
                    cv[iy, ix] = 1
    return img, cov.astype(bool), int(fetches), bool(inside)
