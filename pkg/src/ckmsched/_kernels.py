"""Compiled inner loops for the frontier DP and suffix bounds."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _grow(a, need):
    if need <= a.size:
        return a
    out = np.empty(max(need, 2 * a.size), dtype=a.dtype)
    out[: a.size] = a
    return out


@njit(cache=True)
def _bisect_right(a, n, x):
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if x < a[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True)
def _nondominated(cF, cG, cC):
    """Survivor positions (ascending) under a (G asc, C asc, F desc, position asc) sweep.

    Same rule as ``pareto.nondominated_order``.
    """
    m = cF.size
    order = np.argsort(-cF, kind="mergesort")
    order = order[np.argsort(cC[order], kind="mergesort")]
    order = order[np.argsort(cG[order], kind="mergesort")]
    sc = np.empty(m)
    sf = np.empty(m)
    L = 0
    keep = np.zeros(m, dtype=np.bool_)
    for t in range(m):
        i = order[t]
        c = cC[i]
        f = cF[i]
        pos = _bisect_right(sc, L, c)
        if pos > 0 and sf[pos - 1] >= f:
            continue
        keep[i] = True
        end = pos
        while end < L and sf[end] <= f:
            end += 1
        if pos > 0 and sc[pos - 1] == c:
            pos -= 1
        removed = end - pos
        if removed == 0:
            for k in range(L, pos, -1):
                sc[k] = sc[k - 1]
                sf[k] = sf[k - 1]
            L += 1
        elif removed > 1:
            shift = removed - 1
            for k in range(pos + 1, L - shift):
                sc[k] = sc[k + shift]
                sf[k] = sf[k + shift]
            L -= shift
        sc[pos] = c
        sf[pos] = f
    return np.flatnonzero(keep)


@njit(cache=True)
def _eps_prune(F, G, C, eps):
    m = F.size
    order = np.argsort(-F, kind="mergesort")
    order = order[np.argsort(C[order], kind="mergesort")]
    order = order[np.argsort(G[order], kind="mergesort")]
    kept = np.empty(m, dtype=np.int64)
    nk = 0
    for t in range(m):
        i = order[t]
        hit = False
        for s in range(nk):
            k = kept[s]
            if F[k] >= (1.0 - eps) * F[i] and G[k] <= (1.0 + eps) * G[i] and C[k] <= (1.0 + eps) * C[i]:
                hit = True
                break
        if not hit:
            kept[nk] = i
            nk += 1
    return np.sort(kept[:nk])


@njit(cache=True)
def _count_at_least(desc, n, x):
    # number of leading entries of the descending array ``desc[:n]`` that are >= x
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if desc[mid] >= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def _cell(off_g, kap_c, C, G, H):
    ig = _bisect_right(off_g, off_g.size, C / H) - 1
    ic = _bisect_right(kap_c, kap_c.size, G / H) - 1
    return max(ig, 0), max(ic, 0)


@njit(cache=True)
def _frac(levels, i, x):
    # position of x inside [levels[i], levels[i+1]], clipped to [0, 1]
    if i + 1 >= levels.size:
        return 0.0
    t = (x - levels[i]) / (levels[i + 1] - levels[i])
    return min(max(t, 0.0), 1.0)


@njit(cache=True)
def _lerp_c(table, k, ic, tc, v):
    if tc == 0.0:
        return table[k, ic, v]
    return (1.0 - tc) * table[k, ic, v] + tc * table[k, ic + 1, v]


@njit(cache=True)
def suffix_cap(table, v, off_g, kap_c, C, G, H, need):
    """Upper bound on the best suffix term of a label (F, G, C) at vertex v.

    The suffix term is max_s [f - g (j + C/H) - c G/H - g c/H] over suffixes s = (f, g, c).
    V(kg, kc) = max_s [f - kg g - kc c] is convex and nonincreasing in both prices, so
    interpolating the table between levels, or reading it at lower prices, bounds it
    from above. The cross term is handled by splitting suffixes on their cost: on
    [c_k, c_k+1) with c_k = H off_g[k] - C it is at least g c_k / H, which moves the
    working-time price to level k, and the upper end is dualised with multipliers that
    land on cost-price levels. Returns early once the bound reaches ``need``.
    """
    n_g = off_g.size
    n_c = kap_c.size
    xg = C / H
    xc = G / H
    ig, ic = _cell(off_g, kap_c, C, G, H)
    tg = _frac(off_g, ig, xg)
    tc = _frac(kap_c, ic, xc)
    best = -np.inf
    for k in range(ig, n_g):
        if k == ig:
            # exact working-time price, between levels ig and ig + 1
            cap_k = _lerp_c(table, ig, ic, tc, v)
            if tg > 0.0:
                cap_k = (1.0 - tg) * cap_k + tg * _lerp_c(table, ig + 1, ic, tc, v)
        else:
            cap_k = _lerp_c(table, k, ic, tc, v)
        if cap_k <= best:
            break  # later intervals are capped by smaller table values
        if k + 1 < n_g:
            c_hi = H * off_g[k + 1] - C
            for i2 in range(ic + 1, n_c):
                tab = table[k, i2, v]
                if k == ig and tg > 0.0:
                    tab = (1.0 - tg) * tab + tg * table[ig + 1, i2, v]
                val = tab + (kap_c[i2] - xc) * c_hi
                if val < cap_k:
                    cap_k = val
        if cap_k > best:
            best = cap_k
        if best >= need:
            break
    return best


@njit(cache=True)
def bound_keep(table, v, off_g, kap_c, F, G, C, H, j_lb, slack):
    """Mask of labels at v whose completions might still reach J >= j_lb."""
    m = F.size
    out = np.empty(m, dtype=np.bool_)
    for i in range(m):
        own = F[i] - G[i] * (j_lb + C[i] / H)
        out[i] = own + suffix_cap(table, v, off_g, kap_c, C[i], G[i], H, -slack - own) >= -slack
    return out


@njit(cache=True)
def frontier_dp(n, src, in_ptr, dF, dG, dC, kD, kC, term_dF, term_dG, term_base,
                eps, max_labels, use_bound, off_g, kap_c, table, H, j_lb, slack):
    """Label-correcting pass over vertices 1..n (n is the sink).

    Dominance compares (F, -downtime key, cost key); the bound uses the float stats.

    With the bound on, the kept labels of a vertex are grouped by bound-table cell and
    ranked by their own term F - G (j + C/H) inside each group. Prices only grow along
    a path, so a label in cell (a, b) extended along e can pass the bound at the head
    only if its own term reaches

        -(dF - kg_a dG - kc_b dC + V[a, b, head]),

    and each edge takes a prefix of every group while the rest is skipped unseen.

    Returns flat label columns, per-vertex (start, size) and the number of candidate
    labels generated.
    """
    nc = kap_c.size
    cap = 1024
    F = np.empty(cap)
    G = np.empty(cap)
    C = np.empty(cap)
    KD = np.empty(cap)
    KC = np.empty(cap)
    PV = np.empty(cap, dtype=np.int64)
    PL = np.empty(cap, dtype=np.int64)
    EI = np.empty(cap, dtype=np.int64)
    RANK = np.empty(cap, dtype=np.int64)  # local label indices grouped by cell, best value first
    SBV = np.empty(cap)  # own terms in RANK order
    # cell groups: per vertex a run of (cell id, offset into the vertex's RANK block)
    GCELL = np.empty(cap, dtype=np.int64)
    GOFF = np.empty(cap, dtype=np.int64)
    gstart = np.zeros(n + 2, dtype=np.int64)
    start = np.zeros(n + 1, dtype=np.int64)
    size = np.zeros(n + 1, dtype=np.int64)
    F[0] = 0.0
    G[0] = 0.0
    C[0] = 0.0
    KD[0] = 0.0
    KC[0] = 0.0
    PV[0] = -1
    PL[0] = -1
    EI[0] = -1
    RANK[0] = 0
    SBV[0] = 0.0 if use_bound else np.inf
    GCELL[0] = 0
    GOFF[0] = 0
    gstart[1] = 1
    size[0] = 1
    total = 1
    ngroups = 1
    generated = 0
    taken = np.empty(16, dtype=np.int64)
    for v in range(1, n + 1):
        sink = v == n
        lo = 0 if sink else in_ptr[v]
        hi = n if sink else in_ptr[v + 1]
        start[v] = total
        # first pass: count, second pass: fill
        m = 0
        for sweep in range(2):
            if sweep == 1:
                cF = np.empty(m)
                cG = np.empty(m)
                cC = np.empty(m)
                cKD = np.empty(m)
                cKC = np.empty(m)
                cPV = np.empty(m, dtype=np.int64)
                cPL = np.empty(m, dtype=np.int64)
                cEI = np.empty(m, dtype=np.int64)
                k = 0
            for x in range(lo, hi):
                u = x if sink else src[x]
                if size[u] == 0:
                    continue
                e = term_base + u if sink else x
                if sink:
                    aF, aG, aC, aD, aK = term_dF[u], term_dG[u], 0.0, 0.0, 0.0
                else:
                    aF, aG, aC, aD, aK = dF[e], dG[e], dC[e], kD[e], kC[e]
                s0 = start[u]
                if use_bound:
                    nt = 0
                    taken = _grow(taken, size[u])
                    for q in range(gstart[u], gstart[u + 1]):
                        cell = GCELL[q]
                        ga = cell // nc
                        gb = cell % nc
                        # the extension's suffix term is at most the edge weight plus the head's
                        # table value, both read at the cell's lower prices
                        head = 0.0 if sink else table[ga, gb, v]
                        thr = -slack - (aF - (j_lb + off_g[ga]) * aG - kap_c[gb] * aC + head)
                        g0 = s0 + GOFF[q]
                        g1 = s0 + (GOFF[q + 1] if q + 1 < gstart[u + 1] else size[u])
                        cnt = _count_at_least(SBV[g0:g1], g1 - g0, thr)
                        for t in range(cnt):
                            taken[nt] = RANK[g0 + t]
                            nt += 1
                    if sweep == 0:
                        m += nt
                        continue
                    idx = np.sort(taken[:nt])
                else:
                    if sweep == 0:
                        m += size[u]
                        continue
                    idx = np.arange(size[u])
                for i in idx:
                    cF[k] = F[s0 + i] + aF
                    cG[k] = G[s0 + i] + aG
                    cC[k] = C[s0 + i] + aC
                    cKD[k] = KD[s0 + i] + aD
                    cKC[k] = KC[s0 + i] + aK
                    cPV[k] = u
                    cPL[k] = i
                    cEI[k] = e
                    k += 1
            if m == 0:
                break
        gstart[v + 1] = ngroups
        if m == 0:
            continue
        generated += m
        cBV = np.full(m, np.inf)
        cCell = np.zeros(m, dtype=np.int64)
        if use_bound:
            ok = np.empty(m, dtype=np.bool_)
            nok = 0
            for i in range(m):
                ig, ic = _cell(off_g, kap_c, cC[i], cG[i], H)
                cCell[i] = ig * nc + ic
                own = cF[i] - cG[i] * (j_lb + cC[i] / H)
                cBV[i] = own  # groups are ranked by the label's own term
                ok[i] = own + suffix_cap(table, v, off_g, kap_c, cC[i], cG[i], H, -slack - own) >= -slack
                if ok[i]:
                    nok += 1
            if nok == 0:
                continue
            if nok < m:
                idx = np.flatnonzero(ok)
                cF = cF[idx]
                cG = cG[idx]
                cC = cC[idx]
                cKD = cKD[idx]
                cKC = cKC[idx]
                cPV = cPV[idx]
                cPL = cPL[idx]
                cEI = cEI[idx]
                cBV = cBV[idx]
                cCell = cCell[idx]
        keep = _nondominated(cF, -cKD, cKC)
        if eps > 0.0:
            sub = _eps_prune(cF[keep], cG[keep], cC[keep], eps)
            keep = keep[sub]
        if max_labels > 0 and keep.size > max_labels:
            top = np.argsort(-cF[keep], kind="mergesort")[:max_labels]
            keep = np.sort(keep[top])
        r = keep.size
        F = _grow(F, total + r)
        G = _grow(G, total + r)
        C = _grow(C, total + r)
        KD = _grow(KD, total + r)
        KC = _grow(KC, total + r)
        PV = _grow(PV, total + r)
        PL = _grow(PL, total + r)
        EI = _grow(EI, total + r)
        RANK = _grow(RANK, total + r)
        SBV = _grow(SBV, total + r)
        for t in range(r):
            j = keep[t]
            F[total + t] = cF[j]
            G[total + t] = cG[j]
            C[total + t] = cC[j]
            KD[total + t] = cKD[j]
            KC[total + t] = cKC[j]
            PV[total + t] = cPV[j]
            PL[total + t] = cPL[j]
            EI[total + t] = cEI[j]
        bv = cBV[keep]
        cells = cCell[keep]
        rank = np.argsort(-bv, kind="mergesort")
        rank = rank[np.argsort(cells[rank], kind="mergesort")]
        GCELL = _grow(GCELL, ngroups + r)
        GOFF = _grow(GOFF, ngroups + r)
        for t in range(r):
            RANK[total + t] = rank[t]
            SBV[total + t] = bv[rank[t]]
            if t == 0 or cells[rank[t]] != cells[rank[t - 1]]:
                GCELL[ngroups] = cells[rank[t]]
                GOFF[ngroups] = t
                ngroups += 1
        gstart[v + 1] = ngroups
        size[v] = r
        total += r
    return (F[:total], G[:total], C[:total], KD[:total], KC[:total],
            PV[:total], PL[:total], EI[:total], start, size, generated)


@njit(cache=True)
def suffix_table(n, src, in_ptr, dF, dG, dC, term_dF, term_dG, kap_g, kap_c):
    """V[a, b, v]: best dF - kap_g[a] dG - kap_c[b] dC over suffixes leaving v; sink column 0."""
    na = kap_g.size
    nb = kap_c.size
    K = na * nb
    kg = np.empty(K)
    kc = np.empty(K)
    for a in range(na):
        for b in range(nb):
            kg[a * nb + b] = kap_g[a]
            kc[a * nb + b] = kap_c[b]
    # one row of all price pairs per vertex, so each edge is read once
    V = np.empty((n, K))
    for v in range(n):
        for k in range(K):
            V[v, k] = term_dF[v] - kg[k] * term_dG[v]
    for x in range(n - 1, 0, -1):
        vx = V[x]
        for e in range(in_ptr[x], in_ptr[x + 1]):
            f, g, c = dF[e], dG[e], dC[e]
            vu = V[src[e]]
            for k in range(K):
                cand = f - kg[k] * g - kc[k] * c + vx[k]
                if cand > vu[k]:
                    vu[k] = cand
    out = np.zeros((na, nb, n + 1))
    for v in range(n):
        for k in range(K):
            out[k // nb, k % nb, v] = V[v, k]
    return out


@njit(cache=True)
def longest_path_dp(n, src, in_ptr, w, w_term):
    dp = np.full(n, -np.inf)
    dp[0] = 0.0
    pred = np.full(n, -1, dtype=np.int64)
    for v in range(1, n):
        best = -np.inf
        arg = -1
        for e in range(in_ptr[v], in_ptr[v + 1]):
            c = dp[src[e]] + w[e]
            if c > best:
                best = c
                arg = e
        if arg >= 0:
            dp[v] = best
            pred[v] = arg
    return dp, pred


@njit(cache=True)
def tl_longest_path(n, src, in_ptr, dF, dG, dC, term_dF, term_dG, H, slope, G_k):
    """longest_path_dp with the weights H dF - slope dG - G_k dC computed on the fly."""
    dp = np.full(n, -np.inf)
    dp[0] = 0.0
    pred = np.full(n, -1, dtype=np.int64)
    for v in range(1, n):
        best = -np.inf
        arg = -1
        for e in range(in_ptr[v], in_ptr[v + 1]):
            c = dp[src[e]] + (H * dF[e] - slope * dG[e] - G_k * dC[e])
            if c > best:
                best = c
                arg = e
        if arg >= 0:
            dp[v] = best
            pred[v] = arg
    final = np.empty(n)
    for u in range(n):
        final[u] = dp[u] + (H * term_dF[u] - slope * term_dG[u])
    return final, pred


@njit(cache=True)
def _piece(eta, lam, t_last, a, b):
    width = b - a
    if width <= 0.0:
        return 0.0
    if lam == 0.0:
        return width
    return eta * width + (1.0 - eta) * np.exp(-lam * (a - t_last)) * (-np.expm1(-lam * width)) / lam


@njit(cache=True)
def _seg_of(starts, x):
    return min(max(_bisect_right(starts, starts.size, x) - 1, 0), starts.size - 1)


@njit(cache=True)
def _prefix_from(u, starts, ends, eta, lam, shock, cum, loss):
    # cum[k], loss[k]: efficacy integral from u to the start of segment k and the
    # entry loss inside k, for k at or after u's segment
    ju = _seg_of(starts, u)
    acc = 0.0
    ls = 1.0
    for k in range(ju, starts.size):
        if k > ju:
            ls *= shock[k]
        cum[k] = acc
        loss[k] = ls
        acc += ls * _piece(eta[k], lam[k], u, max(u, starts[k]), ends[k])
    return ju


@njit(cache=True)
def dag_edges(times, D, cost, allowed, max_span, tol, starts, ends, eta, lam, shock):
    """Feasible update edges sorted by (head, tail) and the terminal efficacy per vertex.

    Edge i -> j exists when j is allowed, t_j - t_i <= max_span and t_j - t_i >= D_j;
    its working interval is [t_i, max(t_j - D_j, t_i)].
    """
    n = times.size
    M = starts.size
    cum = np.zeros((n, M))
    loss = np.zeros((n, M))
    first = np.empty(n, dtype=np.int64)
    term_dF = np.zeros(n)
    jt = M - 1
    for i in range(n):
        u = times[i]
        first[i] = _prefix_from(u, starts, ends, eta, lam, shock, cum[i], loss[i])
        term_dF[i] = cum[i, jt] + loss[i, jt] * _piece(eta[jt], lam[jt], u, max(u, starts[jt]), times[n - 1])
    # tails of j form the contiguous run [lo_j, j) minus the ones too close to j
    lo = np.empty(n, dtype=np.int64)
    m = 0
    p = 0
    for j in range(n):
        while times[j] - times[p] > max_span + tol:
            p += 1
        lo[j] = p
        if allowed[j]:
            for i in range(p, j):
                if times[j] - times[i] >= D[j] - tol:
                    m += 1
    src = np.empty(m, dtype=np.int64)
    dst = np.empty(m, dtype=np.int64)
    dF = np.empty(m)
    dG = np.empty(m)
    dC = np.empty(m)
    down = np.empty(m)
    k = 0
    for j in range(n):
        if not allowed[j]:
            continue
        for i in range(lo[j], j):
            u = times[i]
            if times[j] - u < D[j] - tol:
                continue
            b = max(times[j] - D[j], u)
            jb = max(_seg_of(starts, b), first[i])
            src[k] = i
            dst[k] = j
            dF[k] = cum[i, jb] + loss[i, jb] * _piece(eta[jb], lam[jb], u, max(u, starts[jb]), b)
            dG[k] = b - u
            dC[k] = cost[j]
            down[k] = D[j]
            k += 1
    return src, dst, dF, dG, dC, down, term_dF
