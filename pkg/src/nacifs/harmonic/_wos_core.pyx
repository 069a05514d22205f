# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled walk-on-spheres kernel. Must stay bit-compatible with _wos_py."""
from libc.math cimport sqrt
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport malloc, free

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix(uint64_t x) noexcept nogil:
    cdef uint64_t z = x + 0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double draw(uint64_t key, uint64_t* counter) noexcept nogil:
    cdef uint64_t x = key + counter[0] * GOLDEN
    counter[0] += 1
    return <double>(mix(x) >> 11) * INV_2_53


cdef inline void on_circle(uint64_t key, uint64_t* counter, double* ox, double* oy) noexcept nogil:
    cdef double x, y, s, r
    while True:
        x = 2.0 * draw(key, counter) - 1.0
        y = 2.0 * draw(key, counter) - 1.0
        s = x * x + y * y
        if s > 0.0 and s < 1.0:
            break
    r = sqrt(s)
    ox[0] = x / r
    oy[0] = y / r


cdef inline void reenter(double R, uint64_t key, uint64_t* counter, double* px, double* py) noexcept nogil:
    # Exterior Poisson kernel of |w| = R seen from p: push the uniform law on
    # the unit circle through the disk automorphism sending 0 to R p / |p|^2.
    cdef double x = px[0], y = py[0]
    cdef double rho2 = x * x + y * y
    cdef double ax = (R * x) / rho2, ay = (R * y) / rho2
    cdef double zx, zy
    on_circle(key, counter, &zx, &zy)
    cdef double nr = zx + ax, ni = zy + ay
    cdef double dr = 1.0 + ax * zx + ay * zy, di = ax * zy - ay * zx
    cdef double dd = dr * dr + di * di
    cdef double wr = (nr * dr + ni * di) / dd, wi = (ni * dr - nr * di) / dd
    px[0] = R * wr
    py[0] = R * wi


def reentry_samples(double px, double py, double R, uint64_t seed, int64_t first, int64_t count, double[::1] outx, double[::1] outy):
    cdef int64_t i
    cdef uint64_t key, counter
    cdef double x, y
    with nogil:
        for i in range(count):
            key = mix(seed ^ mix(<uint64_t>(first + i)))
            counter = 0
            x = px
            y = py
            reenter(R, key, &counter, &x, &y)
            outx[i] = x
            outy[i] = y


def run_walkers(
    const double[::1] cx, const double[::1] cy, const double[::1] hull, const double[::1] rad,
    const int64_t[::1] first_child, const int64_t[::1] n_child, int64_t leaf_start, int64_t max_stack,
    int launch, double x0, double y0, double r_launch, double r_out, double outer_radius,
    double eps_abs, int64_t max_steps, uint64_t seed, int64_t first, int64_t count,
    int64_t[::1] labels, int64_t[::1] steps,
):
    """Run walkers ``first .. first+count-1``; write hit leaf (or -1 outer
    circle, -2 stalled) and step counts."""
    # Best-first DFS: children are pushed farthest first so the nearest is
    # explored next; the stack carries each node's hull distance.
    cdef int64_t* stack = <int64_t*> malloc(max_stack * sizeof(int64_t))
    cdef double* sdist = <double*> malloc(max_stack * sizeof(double))
    if stack == NULL or sdist == NULL:
        free(stack)
        free(sdist)
        raise MemoryError()
    cdef int64_t i, node, sp, c, k, m, nc, base, step, best_leaf, label
    cdef uint64_t key, counter
    cdef double x, y, dx, dy, dist, best, rho, d_out, jx, jy
    try:
        with nogil:
            for i in range(count):
                key = mix(seed ^ mix(<uint64_t>(first + i)))
                counter = 0
                if launch:
                    on_circle(key, &counter, &jx, &jy)
                    x = r_launch * jx
                    y = r_launch * jy
                else:
                    x = x0
                    y = y0
                label = -2
                step = 0
                while step < max_steps:
                    step += 1
                    best = 1.0e300
                    best_leaf = -1
                    stack[0] = 0
                    sdist[0] = 0.0
                    sp = 1
                    while sp > 0:
                        sp -= 1
                        node = stack[sp]
                        if sdist[sp] > best:
                            continue
                        c = first_child[node]
                        nc = n_child[node]
                        base = sp
                        for k in range(nc):
                            dx = x - cx[c + k]
                            dy = y - cy[c + k]
                            dist = sqrt(dx * dx + dy * dy) - hull[c + k]
                            if dist > best:
                                continue
                            if first_child[c + k] < 0:
                                # leaf: ties go to the lowest index
                                if dist < best or (dist == best and c + k < best_leaf):
                                    best = dist
                                    best_leaf = c + k
                                continue
                            # insert keeping stack[base:sp] sorted by decreasing distance
                            m = sp
                            while m > base and sdist[m - 1] < dist:
                                stack[m] = stack[m - 1]
                                sdist[m] = sdist[m - 1]
                                m -= 1
                            stack[m] = c + k
                            sdist[m] = dist
                            sp += 1
                    if best < eps_abs * rad[best_leaf]:
                        label = best_leaf - leaf_start
                        break
                    rho = sqrt(x * x + y * y)
                    if not launch:
                        d_out = outer_radius - rho
                        if d_out < eps_abs * outer_radius:
                            label = -1
                            break
                        if d_out < best:
                            best = d_out
                    elif rho > r_out:
                        reenter(r_launch, key, &counter, &x, &y)
                        continue
                    on_circle(key, &counter, &jx, &jy)
                    x = x + best * jx
                    y = y + best * jy
                labels[i] = label
                steps[i] = step
    finally:
        free(stack)
        free(sdist)
