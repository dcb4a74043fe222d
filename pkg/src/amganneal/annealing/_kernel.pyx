# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False, nonecheck=False
"""Compiled annealing kernel.

Byte-for-byte behavioral twin of ``_engine.visit``: same random stream,
same floating-point operation order (the build disables FMA contraction),
same stamp-guarded scratch handling.  A seeded run must not depend on
which backend executes it, so any change here must be mirrored in the
pure-Python engine.
"""

from libc.math cimport exp

cdef unsigned long long _MULT = 6364136223846793005ULL
# Exactly representable double; uniform draws stay in [0, 1).
cdef double _TWO_NEG32 = 1.0 / 4294967296.0

REG_GLOBAL_STEP = 0
REG_BEST_COUNT = 1
REG_TRACE_LEN = 2
REG_SPLICE_SKIPS = 3
REG_VISIT_ID = 4
REG_GCOUNT = 5


cdef inline unsigned int _next_u32(unsigned long long *state,
                                   unsigned long long inc) noexcept nogil:
    cdef unsigned long long old = state[0]
    cdef unsigned int xorshifted, rot
    state[0] = old * _MULT + inc
    xorshifted = <unsigned int>(((old >> 18) ^ old) >> 27)
    rot = <unsigned int>(old >> 59)
    return (xorshifted >> rot) | (xorshifted << ((32 - rot) & 31))


cdef inline unsigned int _bounded(unsigned long long *state,
                                  unsigned long long inc,
                                  unsigned int bound) noexcept nogil:
    cdef unsigned int threshold = (-bound) % bound
    cdef unsigned int v
    while True:
        v = _next_u32(state, inc)
        if v >= threshold:
            return v % bound


cdef inline double _uniform01(unsigned long long *state,
                              unsigned long long inc) noexcept nogil:
    return _next_u32(state, inc) * _TWO_NEG32


cdef inline void _save_row(long long i, long long global_step,
                           long long[::1] save_stamp, long long[::1] save_rows,
                           double[::1] save_fsum, unsigned char[::1] save_sat,
                           double[::1] fsum, unsigned char[::1] sat,
                           long long *save_count) noexcept nogil:
    if save_stamp[i] != global_step:
        save_stamp[i] = global_step
        save_rows[save_count[0]] = i
        save_fsum[save_count[0]] = fsum[i]
        save_sat[save_count[0]] = sat[i]
        save_count[0] += 1


cdef inline void _toggle_add(long long p,
                             long long[::1] tp, long long[::1] tj, double[::1] tx,
                             long long[::1] closure_stamp, long long visit_id,
                             unsigned char[::1] eff, unsigned char[::1] member,
                             double[::1] fsum, unsigned char[::1] sat,
                             double[::1] diag_abs, double theta,
                             long long[::1] save_stamp, long long[::1] save_rows,
                             double[::1] save_fsum, unsigned char[::1] save_sat,
                             long long global_step,
                             long long *z, long long *save_count) noexcept nogil:
    cdef long long q, i
    cdef double f
    cdef unsigned char ns
    eff[p] = 1
    member[p] = 1
    z[0] += sat[p]
    for q in range(tp[p], tp[p + 1]):
        i = tj[q]
        if closure_stamp[i] != visit_id:
            continue
        _save_row(i, global_step, save_stamp, save_rows, save_fsum, save_sat,
                  fsum, sat, save_count)
        f = fsum[i] + tx[q]
        fsum[i] = f
        ns = 1 if diag_abs[i] >= theta * f else 0
        if ns != sat[i]:
            if member[i]:
                z[0] += 1 if ns else -1
            sat[i] = ns


cdef inline void _toggle_remove(long long p,
                                long long[::1] tp, long long[::1] tj, double[::1] tx,
                                long long[::1] closure_stamp, long long visit_id,
                                unsigned char[::1] eff, unsigned char[::1] member,
                                double[::1] fsum, unsigned char[::1] sat,
                                double[::1] diag_abs, double theta,
                                long long[::1] save_stamp, long long[::1] save_rows,
                                double[::1] save_fsum, unsigned char[::1] save_sat,
                                long long global_step,
                                long long *z, long long *save_count) noexcept nogil:
    cdef long long q, i
    cdef double f
    cdef unsigned char ns
    eff[p] = 0
    for q in range(tp[p], tp[p + 1]):
        i = tj[q]
        if closure_stamp[i] != visit_id:
            continue
        _save_row(i, global_step, save_stamp, save_rows, save_fsum, save_sat,
                  fsum, sat, save_count)
        f = fsum[i] - tx[q]
        fsum[i] = f
        ns = 1 if diag_abs[i] >= theta * f else 0
        if ns != sat[i]:
            if member[i]:
                z[0] += 1 if ns else -1
            sat[i] = ns
    z[0] -= sat[p]
    member[p] = 0


def visit(
    long long[::1] ap, long long[::1] aj, double[::1] ax,
    long long[::1] tp, long long[::1] tj, double[::1] tx,
    double[::1] diag_abs,
    long long[::1] sub_of,
    unsigned char[::1] eff, unsigned char[::1] src_f,
    unsigned char[::1] global_f, unsigned char[::1] best_f,
    unsigned char[::1] visited, long long[::1] n_bar, long long[::1] z_sub,
    double[::1] fsum, unsigned char[::1] sat, unsigned char[::1] member,
    long long[::1] omega_stamp, long long[::1] closure_stamp,
    long long[::1] closure_list,
    long long[::1] save_stamp, long long[::1] save_rows,
    double[::1] save_fsum, unsigned char[::1] save_sat,
    long long[::1] spl_stamp, long long[::1] spl_list,
    long long[::1] sel_buf, long long[::1] f_buf, long long[::1] c_buf,
    long long[::1] trace_step, long long[::1] trace_size, double[::1] trace_temp,
    double[::1] regs_f, long long[::1] regs_i, unsigned long long[::1] rng,
    long long[::1] pts, long long k, long long n_steps,
    double theta, double alpha, long long x, long long y,
):
    """Run ``n_steps`` annealing steps on subdomain ``k``.

    Rebuilds the tracked closure, halo assumptions, and row-sum caches
    from the live label arrays, then performs the step loop and writes
    all carried scalars back into the register arrays.
    """
    cdef long long n = diag_abs.shape[0]
    cdef long long m = pts.shape[0]
    cdef long long visit_id = regs_i[REG_VISIT_ID] + 1
    cdef double temp = regs_f[0]
    cdef unsigned long long rng_state = rng[0]
    cdef unsigned long long rng_inc = rng[1]
    cdef long long global_step = regs_i[REG_GLOBAL_STEP]
    cdef long long best_count = regs_i[REG_BEST_COUNT]
    cdef long long trace_len = regs_i[REG_TRACE_LEN]
    cdef long long splice_skips = regs_i[REG_SPLICE_SKIPS]
    cdef long long gcount = regs_i[REG_GCOUNT]

    cdef long long nclos, halo_f_count, z, nf, nc, save_count, saved_z
    cdef long long t, p, q, i, j, owner, d, nspl, step_idx
    cdef long long from_f, from_c
    cdef unsigned char flag, fi, fj
    cdef bint legal, improving, accepted, sound
    cdef unsigned int r
    cdef double s, u

    regs_i[REG_VISIT_ID] = visit_id

    with nogil:
        # Tracked rows: the subdomain plus the structural halo of its rows.
        nclos = 0
        for t in range(m):
            p = pts[t]
            omega_stamp[p] = visit_id
            closure_stamp[p] = visit_id
            closure_list[nclos] = p
            nclos += 1
        for t in range(m):
            p = pts[t]
            for q in range(ap[p], ap[p + 1]):
                j = aj[q]
                if closure_stamp[j] != visit_id:
                    closure_stamp[j] = visit_id
                    closure_list[nclos] = j
                    nclos += 1

        # Scored-row membership: inside points follow their live label, halo
        # points follow the assumption rule (pinned -> F, visited -> its slice
        # of the spliced global F-set, unvisited -> F).
        halo_f_count = 0
        for t in range(nclos):
            i = closure_list[t]
            if omega_stamp[i] == visit_id:
                member[i] = eff[i]
            else:
                owner = sub_of[i]
                if owner < 0:
                    flag = 1
                elif visited[owner]:
                    flag = src_f[i]
                else:
                    flag = 1
                member[i] = flag
                halo_f_count += flag

        # Row sums over the effective F-set.  Points outside the closure that
        # belong to unvisited subdomains carry no label yet and do not count.
        for t in range(nclos):
            i = closure_list[t]
            s = 0.0
            for q in range(ap[i], ap[i + 1]):
                j = aj[q]
                if omega_stamp[j] == visit_id:
                    flag = eff[j]
                else:
                    owner = sub_of[j]
                    if owner < 0:
                        flag = 1
                    elif visited[owner]:
                        flag = src_f[j]
                    elif closure_stamp[j] == visit_id:
                        flag = 1
                    else:
                        flag = 0
                if flag:
                    s += ax[q]
            fsum[i] = s
            sat[i] = 1 if diag_abs[i] >= theta * s else 0

        z = 0
        for t in range(nclos):
            i = closure_list[t]
            if member[i]:
                z += sat[i]

        nf = 0
        nc = 0
        for t in range(m):
            p = pts[t]
            if eff[p]:
                f_buf[nf] = p
                nf += 1
            else:
                c_buf[nc] = p
                nc += 1
        z_sub[k] = z

        save_count = 0

        for step_idx in range(n_steps):
            global_step += 1
            r = _bounded(&rng_state, rng_inc, 3)
            if r == 0:
                from_c = x + y
                from_f = y
                legal = nc >= x + y and nf >= y
            elif r == 1:
                from_c = x
                from_f = x
                legal = nf > x and nc > x
            else:
                from_c = y
                from_f = x + y
                legal = nf >= x + y and nc >= y
            if not legal:
                temp *= alpha
                continue

            # Partial Fisher-Yates: departures from F first, then from C;
            # picks are parked at the pool tails so a commit is a truncation.
            for t in range(from_f):
                d = <long long>_bounded(&rng_state, rng_inc, <unsigned int>(nf - t))
                p = f_buf[d]
                f_buf[d] = f_buf[nf - 1 - t]
                f_buf[nf - 1 - t] = p
                sel_buf[t] = p
            for t in range(from_c):
                d = <long long>_bounded(&rng_state, rng_inc, <unsigned int>(nc - t))
                p = c_buf[d]
                c_buf[d] = c_buf[nc - 1 - t]
                c_buf[nc - 1 - t] = p
                sel_buf[from_f + t] = p

            saved_z = z
            save_count = 0
            for t in range(from_f):
                _toggle_remove(sel_buf[t], tp, tj, tx, closure_stamp, visit_id,
                               eff, member, fsum, sat, diag_abs, theta,
                               save_stamp, save_rows, save_fsum, save_sat,
                               global_step, &z, &save_count)
            for t in range(from_c):
                _toggle_add(sel_buf[from_f + t], tp, tj, tx, closure_stamp,
                            visit_id, eff, member, fsum, sat, diag_abs, theta,
                            save_stamp, save_rows, save_fsum, save_sat,
                            global_step, &z, &save_count)

            improving = z >= saved_z
            if improving:
                accepted = True
            else:
                u = _uniform01(&rng_state, rng_inc)
                accepted = u < exp((z - saved_z) / temp)

            if accepted:
                nf -= from_f
                nc -= from_c
                for t in range(from_c):
                    f_buf[nf] = sel_buf[from_f + t]
                    nf += 1
                for t in range(from_f):
                    c_buf[nc] = sel_buf[t]
                    nc += 1
                # The all-satisfied check belongs to the non-worsening branch
                # only; a worsening move can never raise the feasible best.
                if improving and z == nf + halo_f_count and z >= n_bar[k]:
                    n_bar[k] = z
                    # Splice attempt: rebuild the candidate global F and
                    # freshly verify every row whose sum can have changed.
                    nspl = 0
                    for t in range(m):
                        p = pts[t]
                        if spl_stamp[p] != global_step:
                            spl_stamp[p] = global_step
                            spl_list[nspl] = p
                            nspl += 1
                    for t in range(m):
                        p = pts[t]
                        if eff[p] != global_f[p]:
                            for q in range(tp[p], tp[p + 1]):
                                i = tj[q]
                                if spl_stamp[i] != global_step:
                                    spl_stamp[i] = global_step
                                    spl_list[nspl] = i
                                    nspl += 1
                    sound = True
                    for t in range(nspl):
                        i = spl_list[t]
                        if omega_stamp[i] == visit_id:
                            fi = eff[i]
                        else:
                            fi = global_f[i]
                        if not fi:
                            continue
                        s = 0.0
                        for q in range(ap[i], ap[i + 1]):
                            j = aj[q]
                            if omega_stamp[j] == visit_id:
                                fj = eff[j]
                            else:
                                fj = global_f[j]
                            if fj:
                                s += ax[q]
                        if diag_abs[i] < theta * s:
                            sound = False
                            break
                    if sound:
                        for t in range(m):
                            p = pts[t]
                            if global_f[p] != eff[p]:
                                gcount += 1 if eff[p] else -1
                                global_f[p] = eff[p]
                        if gcount > best_count:
                            best_count = gcount
                            for t in range(n):
                                best_f[t] = global_f[t]
                            trace_step[trace_len] = global_step
                            trace_size[trace_len] = best_count
                            trace_temp[trace_len] = temp
                            trace_len += 1
                    else:
                        splice_skips += 1
            else:
                for t in range(from_f):
                    p = sel_buf[t]
                    eff[p] = 1
                    member[p] = 1
                for t in range(from_c):
                    p = sel_buf[from_f + t]
                    eff[p] = 0
                    member[p] = 0
                for t in range(save_count):
                    i = save_rows[t]
                    fsum[i] = save_fsum[t]
                    sat[i] = save_sat[t]
                z = saved_z

            temp *= alpha

        z_sub[k] = z
        visited[k] = 1

    regs_f[0] = temp
    rng[0] = rng_state
    rng[1] = rng_inc
    regs_i[REG_GLOBAL_STEP] = global_step
    regs_i[REG_BEST_COUNT] = best_count
    regs_i[REG_TRACE_LEN] = trace_len
    regs_i[REG_SPLICE_SKIPS] = splice_skips
    regs_i[REG_GCOUNT] = gcount
