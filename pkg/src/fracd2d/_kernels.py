"""Hot numeric kernels shared by the analytic and Monte-Carlo paths.

All functions here are scalar-loop bodies compiled with numba when enabled
(see `_accel`).  With ``FRACD2D_DISABLE_NUMBA=1`` the same bodies run as
plain Python; results are identical, only slower.

Log-space convention: elementary symmetric polynomial tables hold
``log sigma_p`` with ``-inf`` for an exact zero.  Weighted contact sets are
drawn by rejection from independent Bernoulli proposals conditioned on the
set size, which realizes the product-weight set law exactly for any tilt
constant; the tilt only controls the acceptance rate.

Two index spaces appear below: "sorted index" (nodes ordered by ascending
target degree, ties by id - the admissible pool of a source is then a
prefix) and "node id" (graph CSR).  sorted_of_id / id_of_sorted translate.
"""

import math

import numpy as np

from ._accel import njit
from ._rng import child_seed, rand_below, rand_u01

NEG_INF = -math.inf

# Backward deletion keeping less than this fraction of the minuend has
# cancelled too many digits; callers recompute with a forward pass.
CANCEL_GUARD = 1e-6
# Cap on the accumulated error amplification of a deletion chain (in units
# of machine epsilon): 1e4 * eps ~ 2e-12 keeps results well inside the 1e-9
# verification tolerance.  A single step retaining less than CANCEL_GUARD
# of the minuend blows past this cap immediately.
AMP_LIMIT = 1e4

# trial outcome codes
CODE_OK = 0
CODE_EMPTY_POOL = 1  # no admissible candidate given the source degree
CODE_SKIP = 2        # empty level set (hierarchical) -> excluded from mean


@njit(cache=True)
def _lae(a, b):
    """log(exp(a) + exp(b)) without overflow."""
    if a < b:
        a, b = b, a
    if b == NEG_INF:
        return a
    return a + math.log1p(math.exp(b - a))


@njit(cache=True)
def _lse_diff(a, b):
    """log(exp(a) - exp(b)) for a >= b; returns (value, retained).

    retained is the fraction of the minuend surviving the subtraction
    (0 when the result would be non-positive).
    """
    if b == NEG_INF:
        return a, 1.0
    t = math.exp(b - a)
    rem = 1.0 - t
    if rem <= 0.0:
        return NEG_INF, 0.0
    return a + math.log(rem), rem


@njit(cache=True)
def esp_log_forward(logw, p_max):
    """log sigma_p for p = 0..p_max over all weights, O(N * p_max)."""
    n = logw.size
    logs = np.full(p_max + 1, NEG_INF)
    logs[0] = 0.0
    for j in range(n):
        top = j + 1
        if top > p_max:
            top = p_max
        for p in range(top, 0, -1):
            logs[p] = _lae(logs[p], logw[j] + logs[p - 1])
    return logs


@njit(cache=True)
def esp_log_forward_excluding(logw, skip1, skip2, p_max):
    """Forward pass skipping up to two indices (fallback for deletions)."""
    n = logw.size
    logs = np.full(p_max + 1, NEG_INF)
    logs[0] = 0.0
    cnt = 0
    for j in range(n):
        if j == skip1 or j == skip2:
            continue
        cnt += 1
        top = cnt
        if top > p_max:
            top = p_max
        for p in range(top, 0, -1):
            logs[p] = _lae(logs[p], logw[j] + logs[p - 1])
    return logs


@njit(cache=True)
def esp_backward_delete(base, logw_k, p_max, out):
    """Delete one weight from a sigma table: out[p] = log sigma^(k-bar)_p.

    Tracks the cumulative precision amplification of the subtraction chain:
    each step multiplies the accumulated error by 1/retained, so the
    deletion is rejected (returns False) once the relative loss exceeds
    1/CANCEL_GUARD, and the caller recomputes with a forward pass.
    """
    out[0] = 0.0
    amplification = 1.0
    for p in range(1, p_max + 1):
        val, retained = _lse_diff(base[p], logw_k + out[p - 1])
        if retained <= 0.0:
            return False
        # err_p ~ eps/retained + err_{p-1} * (1 - retained)/retained
        amplification = (1.0 + amplification * (1.0 - retained)) / retained
        if amplification > AMP_LIMIT:
            return False
        out[p] = val
    return True


@njit(cache=True)
def build_prefix_snapshots(logw_s, uniq_end, uniq_vals, snap_off, snap_flat):
    """Sigma tables over every degree prefix of the ascending-sorted weights.

    For the d-th distinct degree value v = uniq_vals[d] the snapshot stores
    log sigma_p, p = 0..v, over the prefix of all nodes with degree <= v.
    """
    n = logw_s.size
    p_cap = 0
    for d in range(uniq_vals.size):
        if uniq_vals[d] > p_cap:
            p_cap = uniq_vals[d]
    logs = np.full(p_cap + 1, NEG_INF)
    logs[0] = 0.0
    d = 0
    for j in range(n):
        top = j + 1
        if top > p_cap:
            top = p_cap
        for p in range(top, 0, -1):
            logs[p] = _lae(logs[p], logw_s[j] + logs[p - 1])
        while d < uniq_end.size and j + 1 == uniq_end[d]:
            v = uniq_vals[d]
            off = snap_off[d]
            for p in range(v + 1):
                snap_flat[off + p] = logs[p]
            d += 1


@njit(cache=True)
def solve_bernoulli_tilt(weights, counts, q):
    """Solve sum_d counts[d]*c*w_d/(1+c*w_d) = q for the tilt c (bisection).

    Any positive c yields the exact conditional set law; this choice only
    maximizes the rejection acceptance rate.
    """
    lo = -60.0
    hi = 60.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        c = math.exp(mid)
        s = 0.0
        for d in range(weights.size):
            cw = c * weights[d]
            s += counts[d] * cw / (1.0 + cw)
        if s < q:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


@njit(cache=True)
def _draw_weighted_set_rejection(state, w_s, m_all, skip, qq, c, members):
    """Draw a qq-subset of [0, m_all) minus {skip}, P(C) prop. to prod w.

    Bernoulli proposals conditioned on |C| = qq; falls back to successive
    weighted draws if 64 attempts fail (degenerate pools only).
    Returns new state with members[0:qq] filled.
    """
    for _attempt in range(64):
        cnt = 0
        over = False
        for j in range(m_all):
            if j == skip:
                continue
            cw = c * w_s[j]
            pj = cw / (1.0 + cw)
            state, u = rand_u01(state)
            if u < pj:
                if cnt >= qq:
                    over = True
                    break
                members[cnt] = j
                cnt += 1
        if not over and cnt == qq:
            return state
    # successive weighted sampling without replacement (rare fallback)
    total = 0.0
    for j in range(m_all):
        if j != skip:
            total += w_s[j]
    cnt = 0
    while cnt < qq:
        state, u = rand_u01(state)
        target = u * total
        acc = 0.0
        pick = -1
        for j in range(m_all):
            if j == skip:
                continue
            taken = False
            for r in range(cnt):
                if members[r] == j:
                    taken = True
                    break
            if taken:
                continue
            acc += w_s[j]
            if acc >= target:
                pick = j
                break
        if pick < 0:
            for j in range(m_all - 1, -1, -1):
                if j == skip:
                    continue
                taken = False
                for r in range(cnt):
                    if members[r] == j:
                        taken = True
                        break
                if not taken:
                    pick = j
                    break
        members[cnt] = pick
        cnt += 1
        total -= w_s[pick]
    return state


@njit(cache=True)
def _inclusion_log_probs(s, qq, m_all, logw_s, snap, excl_self, ek, logpi):
    """log P(candidate in C) for every pool member of source s.

    snap holds log sigma_p over the degree prefix (p = 0..qq at least);
    excl_self and ek are scratch of length >= qq + 1.  logpi[k] is filled
    for every k != s in the prefix.
    """
    ok = esp_backward_delete(snap, logw_s[s], qq, excl_self)
    if not ok:
        fresh = esp_log_forward_excluding(logw_s[:m_all], s, -1, qq)
        for p in range(qq + 1):
            excl_self[p] = fresh[p]
    denom = excl_self[qq]
    for k in range(m_all):
        if k == s:
            continue
        ok = esp_backward_delete(excl_self, logw_s[k], qq - 1, ek)
        if ok:
            num = ek[qq - 1]
        else:
            fresh = esp_log_forward_excluding(logw_s[:m_all], s, k, qq - 1)
            num = fresh[qq - 1]
        logpi[k] = logw_s[k] + num - denom


@njit(cache=True)
def analytic_hops_eval(deg_s, logw_s, cellx, celly, posx, posy,
                       uniq_vals, prefix_end, snap_off, snap_flat,
                       beta, use_beta, d_min, contrib):
    """Per-source exact mean hop count under the weighted contact-set law.

    Everything is in sorted-index space.  contrib[s] = E[grid hops | source
    s]; empty admissible pools contribute zero.  The caller averages with a
    deterministic pairwise sum.
    """
    n = deg_s.size
    p_cap = 0
    for d in range(uniq_vals.size):
        if uniq_vals[d] > p_cap:
            p_cap = uniq_vals[d]
    excl_self = np.empty(p_cap + 1)
    ek = np.empty(p_cap + 1)
    logpi = np.empty(n)
    for s in range(n):
        q = deg_s[s]
        di = np.searchsorted(uniq_vals, q)
        m_all = prefix_end[di]
        m = m_all - 1
        if m <= 0:
            contrib[s] = 0.0
            continue
        qq = q if q < m else m
        if qq == m:
            # forced full pool: every candidate is a contact
            for k in range(m_all):
                if k != s:
                    logpi[k] = 0.0
        else:
            snap = snap_flat[snap_off[di]:snap_off[di] + q + 1]
            _inclusion_log_probs(s, qq, m_all, logw_s, snap, excl_self, ek, logpi)
        num = 0.0
        den = 0.0
        for k in range(m_all):
            if k == s:
                continue
            pi = math.exp(logpi[k])
            x = abs(cellx[s] - cellx[k]) + abs(celly[s] - celly[k])
            if use_beta:
                dx = posx[s] - posx[k]
                dy = posy[s] - posy[k]
                dist = math.sqrt(dx * dx + dy * dy)
                if dist < d_min:
                    dist = d_min
                g = pi * dist ** (-beta)
            else:
                g = pi
            num += x * g
            den += g
        contrib[s] = num / den if den > 0.0 else 0.0


@njit(cache=True, nogil=True)
def mc_direct_trials(seed, t0, t1, deg_s, w_s, logw_s, cellx, celly, posx, posy,
                     uniq_vals, prefix_end, c_by_deg, snap_off, snap_flat,
                     beta, use_beta, d_min, deg_lo, deg_hi, out_x, out_code):
    """Monte-Carlo trials of one direct transmission each (sorted space).

    Per trial: uniform source, contact set from the product-weight law over
    the admissible pool, destination per rule, grid hop count recorded.
    Streams derive from (seed, trial index), so any partition of [t0, t1)
    yields identical output.
    """
    n = deg_s.size
    p_cap = 0
    for d in range(uniq_vals.size):
        if uniq_vals[d] > p_cap:
            p_cap = uniq_vals[d]
    members = np.empty(p_cap + 1, np.int64)
    excl_self = np.empty(p_cap + 1)
    ek = np.empty(p_cap + 1)
    logpi = np.empty(n)
    gcum = np.empty(n)
    for t in range(t0, t1):
        state = child_seed(np.uint64(seed), np.uint64(t))
        i = 0
        for _ in range(1 << 20):
            state, i = rand_below(state, n)
            if deg_s[i] >= deg_lo and deg_s[i] <= deg_hi:
                break
        q = deg_s[i]
        di = np.searchsorted(uniq_vals, q)
        m_all = prefix_end[di]
        m = m_all - 1
        if m <= 0:
            out_x[t - t0] = 0.0
            out_code[t - t0] = CODE_EMPTY_POOL
            continue
        qq = q if q < m else m
        dest = -1
        if not use_beta:
            if qq == m:
                state, r = rand_below(state, m)
                dest = r if r < i else r + 1
            else:
                state = _draw_weighted_set_rejection(
                    state, w_s, m_all, i, qq, c_by_deg[di], members)
                state, r = rand_below(state, qq)
                dest = members[r]
        else:
            if qq == m:
                for k in range(m_all):
                    if k != i:
                        logpi[k] = 0.0
            else:
                snap = snap_flat[snap_off[di]:snap_off[di] + q + 1]
                _inclusion_log_probs(i, qq, m_all, logw_s, snap, excl_self, ek, logpi)
            acc = 0.0
            for k in range(m_all):
                if k == i:
                    gcum[k] = acc
                    continue
                dx = posx[i] - posx[k]
                dy = posy[i] - posy[k]
                dist = math.sqrt(dx * dx + dy * dy)
                if dist < d_min:
                    dist = d_min
                acc += math.exp(logpi[k]) * dist ** (-beta)
                gcum[k] = acc
            state, u = rand_u01(state)
            target = u * acc
            dest = m_all - 1 if m_all - 1 != i else m_all - 2
            for k in range(m_all):
                if k == i:
                    continue
                if gcum[k] >= target:
                    dest = k
                    break
        x = abs(cellx[i] - cellx[dest]) + abs(celly[i] - celly[dest])
        out_x[t - t0] = x
        out_code[t - t0] = CODE_OK


@njit(cache=True)
def _bfs_levels(src, depth, indptr, indices, dist, parent, order, epoch, stamp):
    """BFS truncated at `depth` with lowest-id parents via sorted frontiers.

    dist/parent are epoch-stamped scratch (valid where epoch == stamp);
    order[0:visited] lists the source then visited nodes grouped by level.
    Returns the number of entries written to order.
    """
    epoch[src] = stamp
    dist[src] = 0
    parent[src] = -1
    order[0] = src
    tail = 1
    level_start = 0
    d = 0
    while level_start < tail and d < depth:
        frontier = order[level_start:tail]
        frontier.sort()
        level_start = tail
        nxt = tail
        for fi in range(frontier.size):
            u = frontier[fi]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if epoch[v] != stamp:
                    epoch[v] = stamp
                    dist[v] = d + 1
                    parent[v] = u
                    order[nxt] = v
                    nxt += 1
        tail = nxt
        d += 1
    return tail


@njit(cache=True, nogil=True)
def level_size_sums(indptr, indices, l_cap, dist, parent, order, epoch):
    """Sum over all sources of |level-L set| for L = 1..l_cap."""
    n = indptr.size - 1
    sums = np.zeros(l_cap, np.int64)
    stamp = 0
    for s in range(n):
        stamp += 1
        visited = _bfs_levels(s, l_cap, indptr, indices, dist, parent, order, epoch, stamp)
        for idx in range(1, visited):
            sums[dist[order[idx]] - 1] += 1
    return sums


@njit(cache=True, nogil=True)
def max_observed_level(indptr, indices, sample_ids, dist, parent, order, epoch):
    """Largest BFS eccentricity over the sampled sources."""
    n = indptr.size - 1
    best = 0
    stamp = 0
    for si in range(sample_ids.size):
        stamp += 1
        visited = _bfs_levels(sample_ids[si], n, indptr, indices,
                              dist, parent, order, epoch, stamp)
        for idx in range(1, visited):
            if dist[order[idx]] > best:
                best = dist[order[idx]]
    return best


@njit(cache=True, nogil=True)
def mc_hier_trials(seed, salt, t0, t1, level_cdf, fixed_level,
                   indptr, indices,
                   deg_s, w_s, logw_s, cellx_s, celly_s, posx_s, posy_s,
                   uniq_vals, prefix_end, c_by_deg, snap_off, snap_flat,
                   sorted_of_id,
                   cellx_id, celly_id, posx_id, posy_id,
                   beta, use_beta, d_min,
                   dist, parent, order, epoch, members, gcum,
                   out_x, out_code, out_level):
    """Hierarchical trials: draw a level, route over the social path.

    Level-1 trials replay the direct model draw (contact set from the
    weighted law, sorted space); levels >= 2 select among the source's BFS
    level-L set on the frozen graph (node-id space) and charge the sum of
    per-edge grid hops along the lowest-id BFS tree path.  Empty level sets
    are skipped (CODE_SKIP).
    """
    n = indptr.size - 1
    p_cap = 0
    for d in range(uniq_vals.size):
        if uniq_vals[d] > p_cap:
            p_cap = uniq_vals[d]
    cmembers = np.empty(p_cap + 1, np.int64)
    excl_self = np.empty(p_cap + 1)
    ek = np.empty(p_cap + 1)
    logpi = np.empty(n)
    gcum_s = np.empty(n)
    stamp = 0
    for t in range(t0, t1):
        state = child_seed(np.uint64(seed),
                           np.uint64(salt) * np.uint64(1 << 40) + np.uint64(t))
        state, i = rand_below(state, n)
        if fixed_level > 0:
            lvl = fixed_level
        else:
            state, u = rand_u01(state)
            lvl = np.searchsorted(level_cdf, u) + 1
            if lvl > level_cdf.size:
                lvl = level_cdf.size
        out_level[t - t0] = lvl
        if lvl == 1:
            s = sorted_of_id[i]
            q = deg_s[s]
            di = np.searchsorted(uniq_vals, q)
            m_all = prefix_end[di]
            m = m_all - 1
            if m <= 0:
                out_x[t - t0] = 0.0
                out_code[t - t0] = CODE_EMPTY_POOL
                continue
            qq = q if q < m else m
            if not use_beta:
                if qq == m:
                    state, r = rand_below(state, m)
                    dest = r if r < s else r + 1
                else:
                    state = _draw_weighted_set_rejection(
                        state, w_s, m_all, s, qq, c_by_deg[di], cmembers)
                    state, r = rand_below(state, qq)
                    dest = cmembers[r]
            else:
                if qq == m:
                    for k in range(m_all):
                        if k != s:
                            logpi[k] = 0.0
                else:
                    snap = snap_flat[snap_off[di]:snap_off[di] + q + 1]
                    _inclusion_log_probs(s, qq, m_all, logw_s, snap,
                                         excl_self, ek, logpi)
                acc = 0.0
                for k in range(m_all):
                    if k == s:
                        gcum_s[k] = acc
                        continue
                    dx = posx_s[s] - posx_s[k]
                    dy = posy_s[s] - posy_s[k]
                    dd = math.sqrt(dx * dx + dy * dy)
                    if dd < d_min:
                        dd = d_min
                    acc += math.exp(logpi[k]) * dd ** (-beta)
                    gcum_s[k] = acc
                state, u = rand_u01(state)
                target = u * acc
                dest = m_all - 1 if m_all - 1 != s else m_all - 2
                for k in range(m_all):
                    if k == s:
                        continue
                    if gcum_s[k] >= target:
                        dest = k
                        break
            out_x[t - t0] = abs(cellx_s[s] - cellx_s[dest]) + abs(celly_s[s] - celly_s[dest])
            out_code[t - t0] = CODE_OK
            continue
        # graph-based level-L draw in node-id space
        stamp += 1
        visited = _bfs_levels(i, lvl, indptr, indices, dist, parent, order, epoch, stamp)
        cnt = 0
        for idx in range(1, visited):
            v = order[idx]
            if dist[v] == lvl:
                members[cnt] = v
                cnt += 1
        if cnt == 0:
            out_x[t - t0] = 0.0
            out_code[t - t0] = CODE_SKIP
            continue
        lvl_members = members[:cnt]
        lvl_members.sort()
        if not use_beta:
            state, r = rand_below(state, cnt)
            dest = lvl_members[r]
        else:
            acc = 0.0
            for r in range(cnt):
                v = lvl_members[r]
                dx = posx_id[i] - posx_id[v]
                dy = posy_id[i] - posy_id[v]
                dd = math.sqrt(dx * dx + dy * dy)
                if dd < d_min:
                    dd = d_min
                acc += dd ** (-beta)
                gcum[r] = acc
            state, u = rand_u01(state)
            target = u * acc
            dest = lvl_members[cnt - 1]
            for r in range(cnt):
                if gcum[r] >= target:
                    dest = lvl_members[r]
                    break
        total = 0
        v = dest
        while parent[v] >= 0:
            u2 = parent[v]
            total += abs(cellx_id[v] - cellx_id[u2]) + abs(celly_id[v] - celly_id[u2])
            v = u2
        out_x[t - t0] = total
        out_code[t - t0] = CODE_OK


@njit(cache=True)
def build_edges(targets, uniq_w, deg_index, asc_id, strict_end_of_src,
                seed, fill, nbr_flat, slot_off, mark, scratch_members,
                count_scratch):
    """Wire the graph: descending-degree sources select unsaturated partners.

    Sources are processed in descending (target degree, ascending id) order.
    A source with remaining need m draws an m-subset of its eligible pool
    (strictly smaller target degree, unsaturated, not already adjacent) under
    the product-weight law with per-node weight uniq_w[deg_index[node]].
    Passive edges count toward a node's target; shortfalls remain when pools
    exhaust.  Per-source RNG streams derive from (seed, node id).
    """
    n = targets.size
    order = np.empty(n, np.int64)
    pos = 0
    j = n - 1
    while j >= 0:
        k = j
        while k >= 0 and targets[asc_id[k]] == targets[asc_id[j]]:
            k -= 1
        for t in range(k + 1, j + 1):
            order[pos] = asc_id[t]
            pos += 1
        j = k
    counts_f = np.empty(uniq_w.size)
    stamp = 0
    for si in range(n):
        s = order[si]
        need = targets[s] - fill[s]
        if need <= 0:
            continue
        pend = strict_end_of_src[s]
        if pend <= 0:
            continue
        stamp += 1
        for e in range(slot_off[s], slot_off[s] + fill[s]):
            mark[nbr_flat[e]] = stamp
        m_pool = 0
        for d in range(uniq_w.size):
            count_scratch[d] = 0
        for jj in range(pend):
            v = asc_id[jj]
            if fill[v] < targets[v] and mark[v] != stamp:
                m_pool += 1
                count_scratch[deg_index[v]] += 1
        if m_pool <= 0:
            continue
        m = need if need < m_pool else m_pool
        state = child_seed(np.uint64(seed), np.uint64(s))
        if m >= m_pool:
            cnt = 0
            for jj in range(pend):
                v = asc_id[jj]
                if fill[v] < targets[v] and mark[v] != stamp:
                    scratch_members[cnt] = v
                    cnt += 1
            m = cnt
        else:
            for d in range(uniq_w.size):
                counts_f[d] = count_scratch[d]
            c = solve_bernoulli_tilt(uniq_w, counts_f, m)
            got = False
            for _attempt in range(64):
                cnt = 0
                over = False
                for jj in range(pend):
                    v = asc_id[jj]
                    if fill[v] >= targets[v] or mark[v] == stamp:
                        continue
                    cw = c * uniq_w[deg_index[v]]
                    pj = cw / (1.0 + cw)
                    state, u = rand_u01(state)
                    if u < pj:
                        if cnt >= m:
                            over = True
                            break
                        scratch_members[cnt] = v
                        cnt += 1
                if not over and cnt == m:
                    got = True
                    break
            if not got:
                cnt = 0
                while cnt < m:
                    total = 0.0
                    for jj in range(pend):
                        v = asc_id[jj]
                        if fill[v] >= targets[v] or mark[v] == stamp:
                            continue
                        skip = False
                        for r in range(cnt):
                            if scratch_members[r] == v:
                                skip = True
                                break
                        if not skip:
                            total += uniq_w[deg_index[v]]
                    if total <= 0.0:
                        break
                    state, u = rand_u01(state)
                    threshold = u * total
                    acc = 0.0
                    pick = -1
                    for jj in range(pend):
                        v = asc_id[jj]
                        if fill[v] >= targets[v] or mark[v] == stamp:
                            continue
                        skip = False
                        for r in range(cnt):
                            if scratch_members[r] == v:
                                skip = True
                                break
                        if skip:
                            continue
                        acc += uniq_w[deg_index[v]]
                        if acc >= threshold:
                            pick = v
                            break
                    if pick < 0:
                        break
                    scratch_members[cnt] = pick
                    cnt += 1
                m = cnt
        for r in range(m):
            v = scratch_members[r]
            nbr_flat[slot_off[s] + fill[s]] = v
            fill[s] += 1
            nbr_flat[slot_off[v] + fill[v]] = s
            fill[v] += 1
    return 0
