"""Pure-Python annealing kernel.

This module and ``_kernel.pyx`` implement the same algorithm with the
same random stream and the same floating-point operation order; a seeded
run must not depend on which backend executes it.  Any change here must
be mirrored in the compiled kernel byte for byte in behavior.

State is carried in flat arrays owned by ``AnnealState``; scratch arrays
are stamp-guarded (compared against a visit or step counter) so nothing
needs clearing between visits.  Rejected moves restore the exact saved
row sums rather than reversing the arithmetic, so rejections introduce
no floating-point drift.
"""

from __future__ import annotations

from math import exp

_MULT = 6364136223846793005
_MASK64 = (1 << 64) - 1
_MASK32 = 0xFFFFFFFF
_TWO_NEG32 = 2.0**-32

# Slots of the integer register array shared with the driver.
REG_GLOBAL_STEP = 0
REG_BEST_COUNT = 1
REG_TRACE_LEN = 2
REG_SPLICE_SKIPS = 3
REG_VISIT_ID = 4
REG_GCOUNT = 5


def visit(
    ap, aj, ax, tp, tj, tx, diag_abs,
    sub_of,
    eff, src_f, global_f, best_f, visited, n_bar, z_sub,
    fsum, sat, member,
    omega_stamp, closure_stamp, closure_list,
    save_stamp, save_rows, save_fsum, save_sat,
    spl_stamp, spl_list,
    sel_buf, f_buf, c_buf,
    trace_step, trace_size, trace_temp,
    regs_f, regs_i, rng,
    pts, k, n_steps, theta, alpha, x, y,
):
    """Run ``n_steps`` annealing steps on subdomain ``k``.

    Rebuilds the tracked closure, halo assumptions, and row-sum caches
    from the live label arrays, then performs the step loop and writes
    all carried scalars back into the register arrays.
    """
    n = diag_abs.shape[0]
    m = pts.shape[0]
    visit_id = int(regs_i[REG_VISIT_ID]) + 1
    regs_i[REG_VISIT_ID] = visit_id
    temp = float(regs_f[0])
    rng_state = int(rng[0])
    rng_inc = int(rng[1])
    global_step = int(regs_i[REG_GLOBAL_STEP])
    best_count = int(regs_i[REG_BEST_COUNT])
    trace_len = int(regs_i[REG_TRACE_LEN])
    splice_skips = int(regs_i[REG_SPLICE_SKIPS])
    gcount = int(regs_i[REG_GCOUNT])

    def next_u32():
        nonlocal rng_state
        old = rng_state
        rng_state = (old * _MULT + rng_inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & _MASK32
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((32 - rot) & 31))) & _MASK32

    def bounded(bound):
        threshold = ((1 << 32) - bound) % bound
        while True:
            v = next_u32()
            if v >= threshold:
                return v % bound

    def uniform01():
        return next_u32() * _TWO_NEG32

    # Tracked rows: the subdomain plus the structural halo of its rows.
    nclos = 0
    for t in range(m):
        p = int(pts[t])
        omega_stamp[p] = visit_id
        closure_stamp[p] = visit_id
        closure_list[nclos] = p
        nclos += 1
    for t in range(m):
        p = int(pts[t])
        for q in range(int(ap[p]), int(ap[p + 1])):
            j = int(aj[q])
            if closure_stamp[j] != visit_id:
                closure_stamp[j] = visit_id
                closure_list[nclos] = j
                nclos += 1

    # Scored-row membership: inside points follow their live label, halo
    # points follow the assumption rule (pinned -> F, visited -> its slice
    # of the spliced global F-set, unvisited -> F).
    halo_f_count = 0
    for t in range(nclos):
        i = int(closure_list[t])
        if omega_stamp[i] == visit_id:
            member[i] = eff[i]
        else:
            owner = int(sub_of[i])
            if owner < 0:
                flag = 1
            elif visited[owner]:
                flag = int(src_f[i])
            else:
                flag = 1
            member[i] = flag
            halo_f_count += flag

    # Row sums over the effective F-set.  Points outside the closure that
    # belong to unvisited subdomains carry no label yet and do not count.
    for t in range(nclos):
        i = int(closure_list[t])
        s = 0.0
        for q in range(int(ap[i]), int(ap[i + 1])):
            j = int(aj[q])
            if omega_stamp[j] == visit_id:
                flag = int(eff[j])
            else:
                owner = int(sub_of[j])
                if owner < 0:
                    flag = 1
                elif visited[owner]:
                    flag = int(src_f[j])
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
        i = int(closure_list[t])
        if member[i]:
            z += int(sat[i])

    nf = 0
    nc = 0
    for t in range(m):
        p = int(pts[t])
        if eff[p]:
            f_buf[nf] = p
            nf += 1
        else:
            c_buf[nc] = p
            nc += 1
    z_sub[k] = z

    save_count = 0

    def save_row(i):
        nonlocal save_count
        if save_stamp[i] != global_step:
            save_stamp[i] = global_step
            save_rows[save_count] = i
            save_fsum[save_count] = fsum[i]
            save_sat[save_count] = sat[i]
            save_count += 1

    def toggle_add(p):
        nonlocal z
        eff[p] = 1
        member[p] = 1
        z += int(sat[p])
        for q in range(int(tp[p]), int(tp[p + 1])):
            i = int(tj[q])
            if closure_stamp[i] != visit_id:
                continue
            save_row(i)
            f = fsum[i] + tx[q]
            fsum[i] = f
            ns = 1 if diag_abs[i] >= theta * f else 0
            if ns != sat[i]:
                if member[i]:
                    z += 1 if ns else -1
                sat[i] = ns

    def toggle_remove(p):
        nonlocal z
        eff[p] = 0
        for q in range(int(tp[p]), int(tp[p + 1])):
            i = int(tj[q])
            if closure_stamp[i] != visit_id:
                continue
            save_row(i)
            f = fsum[i] - tx[q]
            fsum[i] = f
            ns = 1 if diag_abs[i] >= theta * f else 0
            if ns != sat[i]:
                if member[i]:
                    z += 1 if ns else -1
                sat[i] = ns
        z -= int(sat[p])
        member[p] = 0

    for _step in range(n_steps):
        global_step += 1
        r = bounded(3)
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
            d = bounded(nf - t)
            p = int(f_buf[d])
            f_buf[d] = f_buf[nf - 1 - t]
            f_buf[nf - 1 - t] = p
            sel_buf[t] = p
        for t in range(from_c):
            d = bounded(nc - t)
            p = int(c_buf[d])
            c_buf[d] = c_buf[nc - 1 - t]
            c_buf[nc - 1 - t] = p
            sel_buf[from_f + t] = p

        saved_z = z
        save_count = 0
        for t in range(from_f):
            toggle_remove(int(sel_buf[t]))
        for t in range(from_c):
            toggle_add(int(sel_buf[from_f + t]))

        improving = z >= saved_z
        if improving:
            accepted = True
        else:
            u = uniform01()
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
            if improving and z == nf + halo_f_count and z >= int(n_bar[k]):
                n_bar[k] = z
                # Splice attempt: rebuild the candidate global F and
                # freshly verify every row whose sum can have changed.
                nspl = 0
                for t in range(m):
                    p = int(pts[t])
                    if spl_stamp[p] != global_step:
                        spl_stamp[p] = global_step
                        spl_list[nspl] = p
                        nspl += 1
                for t in range(m):
                    p = int(pts[t])
                    if eff[p] != global_f[p]:
                        for q in range(int(tp[p]), int(tp[p + 1])):
                            i = int(tj[q])
                            if spl_stamp[i] != global_step:
                                spl_stamp[i] = global_step
                                spl_list[nspl] = i
                                nspl += 1
                sound = True
                for t in range(nspl):
                    i = int(spl_list[t])
                    if omega_stamp[i] == visit_id:
                        fi = int(eff[i])
                    else:
                        fi = int(global_f[i])
                    if not fi:
                        continue
                    s = 0.0
                    for q in range(int(ap[i]), int(ap[i + 1])):
                        j = int(aj[q])
                        if omega_stamp[j] == visit_id:
                            fj = int(eff[j])
                        else:
                            fj = int(global_f[j])
                        if fj:
                            s += ax[q]
                    if diag_abs[i] < theta * s:
                        sound = False
                        break
                if sound:
                    for t in range(m):
                        p = int(pts[t])
                        if global_f[p] != eff[p]:
                            gcount += 1 if eff[p] else -1
                            global_f[p] = eff[p]
                    if gcount > best_count:
                        best_count = gcount
                        best_f[:] = global_f
                        trace_step[trace_len] = global_step
                        trace_size[trace_len] = best_count
                        trace_temp[trace_len] = temp
                        trace_len += 1
                else:
                    splice_skips += 1
        else:
            for t in range(from_f):
                p = int(sel_buf[t])
                eff[p] = 1
                member[p] = 1
            for t in range(from_c):
                p = int(sel_buf[from_f + t])
                eff[p] = 0
                member[p] = 0
            for u_ in range(save_count):
                i = int(save_rows[u_])
                fsum[i] = save_fsum[u_]
                sat[i] = save_sat[u_]
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
