"""Branch-and-bound kernel behind star_discrepancy_exact.

The search walks the critical grid spanned by the point coordinates, one
axis at a time.  A node fixes corner values for a prefix of the axes and
carries the subset of points that still fit the closed prefix box (with a
flag per point marking whether it fits strictly).  Branch values for the
next axis are only the coordinates present in the node's subset plus 1.0:
an excess witness needs every face supported by a contained point, and a
deficit witness needs every non-1 face blocked by a point that is strictly
inside on the other axes, so nothing outside the subset can matter.

Bounds used for pruning a node with prefix volume V and subset size s:
  deficit in subtree  <= V                      (volume only shrinks)
  excess in subtree   <= s/n - V * minsuffix    (count only shrinks, and
                                                 the volume cannot drop
                                                 below the per-axis minima)
The last axis is never branched; it is swept in one sorted pass that
evaluates both the open and the closed count at every candidate value.

All floating-point expressions mirror local_discrepancy exactly (volumes
are built by left-to-right multiplication, counts divided by n last), so
a reported witness reproduces the reported value bit for bit.
"""

import numpy as np
from numba import njit

__all__ = ["search_slice"]


@njit(cache=True, nogil=True)
def search_slice(ranks, vals_flat, vals_off, minsuffix, root_positions,
                 best_in, node_budget, out_t, out_counts):
    """Search the subtrees under the given root (axis-0) candidates.

    root_positions are indices into the descending candidate list of axis
    0, where position 0 is the pseudo-candidate 1.0 and position i >= 1 is
    the i-th largest distinct coordinate.  Returns
    (best, nodes_visited, aborted, improved); when improved, out_t holds
    the witness corner and out_counts = (open_count, closed_count, kind)
    with kind 0 for open-deficit and 1 for closed-excess.
    """
    n, d = ranks.shape

    idx = np.empty((d, n), np.int32)
    strict = np.empty((d, n), np.uint8)
    ssize = np.zeros(d, np.int64)
    child = np.empty((d, n + 1), np.int32)
    ccnt = np.zeros(d, np.int64)
    ccur = np.zeros(d, np.int64)
    tpath = np.ones(d, np.float64)
    vpath = np.ones(d, np.float64)
    keys = np.empty(n, np.int64)

    best = best_in
    nodes = 0
    aborted = False
    improved = False

    u0 = int(vals_off[1] - vals_off[0])
    n_roots = root_positions.shape[0]

    for rp in range(n_roots):
        if aborted:
            break
        pos0 = root_positions[rp]
        # Seed level 0 of the child machinery with this single candidate.
        child[0, 0] = u0 - pos0
        ccnt[0] = 1
        ccur[0] = 0
        L = -1
        while True:
            nxt = L + 1
            if ccur[nxt] >= ccnt[nxt]:
                if L == -1:
                    break
                L -= 1
                continue
            r = child[nxt, ccur[nxt]]
            ccur[nxt] += 1
            axis = nxt
            u_axis = int(vals_off[axis + 1] - vals_off[axis])
            if r == u_axis:
                v = 1.0
            else:
                v = vals_flat[vals_off[axis] + r]
            parent_v = vpath[L] if L >= 0 else 1.0
            parent_s = ssize[L] if L >= 0 else n
            child_vol = parent_v * v

            # Cheap pre-check: the child's closed count is at most the
            # parent's, so skip the O(s) filter when nothing can improve.
            if (child_vol <= best
                    and parent_s / n - child_vol * minsuffix[nxt + 1] <= best):
                # All later siblings have smaller v and smaller subsets;
                # once the volume bound alone is dead, so are they.
                if parent_s / n <= best:
                    ccur[nxt] = ccnt[nxt]
                continue

            # Materialize the child subset.
            s = 0
            if L == -1:
                if r == u_axis:
                    for k in range(n):
                        idx[0, s] = k
                        strict[0, s] = 1
                        s += 1
                else:
                    for k in range(n):
                        rk = ranks[k, 0]
                        if rk <= r:
                            idx[0, s] = k
                            strict[0, s] = 1 if rk < r else 0
                            s += 1
            else:
                ps = ssize[L]
                if r == u_axis:
                    for i in range(ps):
                        idx[nxt, s] = idx[L, i]
                        strict[nxt, s] = strict[L, i]
                        s += 1
                else:
                    for i in range(ps):
                        k = idx[L, i]
                        rk = ranks[k, axis]
                        if rk <= r:
                            idx[nxt, s] = k
                            if rk < r:
                                strict[nxt, s] = strict[L, i]
                            else:
                                strict[nxt, s] = 0
                            s += 1
            ssize[nxt] = s
            tpath[nxt] = v
            vpath[nxt] = child_vol
            nodes += 1
            if node_budget >= 0 and nodes > node_budget:
                aborted = True
                break

            # Evaluate the corner (t_0, .., t_nxt, 1, .., 1) right away.
            sc = 0
            for i in range(s):
                sc += strict[nxt, i]
            deficit = child_vol - sc / n
            if deficit > best:
                best = deficit
                improved = True
                for j in range(d):
                    out_t[j] = tpath[j] if j <= nxt else 1.0
                out_counts[0] = sc
                out_counts[1] = s
                out_counts[2] = 0
            excess = s / n - child_vol
            if excess > best:
                best = excess
                improved = True
                for j in range(d):
                    out_t[j] = tpath[j] if j <= nxt else 1.0
                out_counts[0] = sc
                out_counts[1] = s
                out_counts[2] = 1

            if (child_vol <= best
                    and s / n - child_vol * minsuffix[nxt + 1] <= best):
                continue

            if nxt == d - 2:
                # Sweep the last axis over the subset's candidate values.
                a = d - 1
                big_v = child_vol
                total_strict = sc
                for i in range(s):
                    k = idx[nxt, i]
                    keys[i] = (np.int64(ranks[k, a]) << 1) | np.int64(strict[nxt, i])
                kk = np.sort(keys[:s])
                cum_closed = 0
                cum_strict_less = 0
                i = 0
                while i < s:
                    r_grp = kk[i] >> 1
                    gsize = 0
                    gstrict = 0
                    while i < s and (kk[i] >> 1) == r_grp:
                        gsize += 1
                        gstrict += np.int64(kk[i] & 1)
                        i += 1
                    tau = vals_flat[vals_off[a] + r_grp]
                    vol = big_v * tau
                    closed_here = cum_closed + gsize
                    deficit = vol - cum_strict_less / n
                    if deficit > best:
                        best = deficit
                        improved = True
                        for j in range(d - 1):
                            out_t[j] = tpath[j]
                        out_t[a] = tau
                        out_counts[0] = cum_strict_less
                        out_counts[1] = closed_here
                        out_counts[2] = 0
                    excess = closed_here / n - vol
                    if excess > best:
                        best = excess
                        improved = True
                        for j in range(d - 1):
                            out_t[j] = tpath[j]
                        out_t[a] = tau
                        out_counts[0] = cum_strict_less
                        out_counts[1] = closed_here
                        out_counts[2] = 1
                    cum_closed = closed_here
                    cum_strict_less += gstrict
                # tau = 1.0
                vol = big_v * 1.0
                deficit = vol - total_strict / n
                if deficit > best:
                    best = deficit
                    improved = True
                    for j in range(d - 1):
                        out_t[j] = tpath[j]
                    out_t[a] = 1.0
                    out_counts[0] = total_strict
                    out_counts[1] = s
                    out_counts[2] = 0
                excess = s / n - vol
                if excess > best:
                    best = excess
                    improved = True
                    for j in range(d - 1):
                        out_t[j] = tpath[j]
                    out_t[a] = 1.0
                    out_counts[0] = total_strict
                    out_counts[1] = s
                    out_counts[2] = 1
                continue

            # Expand: branch the next axis on the subset's distinct
            # coordinates (descending) behind the pseudo-candidate 1.0.
            axis2 = nxt + 1
            u2 = int(vals_off[axis2 + 1] - vals_off[axis2])
            for i in range(s):
                keys[i] = ranks[idx[nxt, i], axis2]
            kk = np.sort(keys[:s])
            cc = 0
            child[axis2, cc] = u2
            cc += 1
            prev = np.int64(-1)
            for i in range(s - 1, -1, -1):
                ri = kk[i]
                if ri != prev:
                    child[axis2, cc] = np.int32(ri)
                    cc += 1
                    prev = ri
            ccnt[axis2] = cc
            ccur[axis2] = 0
            L = nxt

    return best, nodes, aborted, improved
