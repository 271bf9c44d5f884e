"""Compiled inner loops shared by the metric and analysis modules.

Everything here is deterministic and single-pass; parallelism, when numba
enables it, touches only order-independent elementwise updates, so results
are bit-identical to the sequential execution.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def shortest_paths_from(q, out):
    """Per-source shortest paths over the complete graph weighted by q.

    out[s, j] is the minimum over chains s -> ... -> j of the left-to-right
    float sum of q along the chain.  That value set is defined without
    reference to visit order, so the result is invariant under relabeling
    the points; sources are independent."""
    n = q.shape[0]
    for s in range(n):
        dist = out[s]
        for j in range(n):
            dist[j] = np.inf
        dist[s] = 0.0
        done = np.zeros(n, dtype=np.bool_)
        for _ in range(n):
            best = -1
            bv = np.inf
            for i in range(n):
                if not done[i] and dist[i] < bv:
                    bv = dist[i]
                    best = i
            if best < 0:
                break
            done[best] = True
            row = q[best]
            for j in range(n):
                if not done[j]:
                    v = bv + row[j]
                    if v < dist[j]:
                        dist[j] = v


@njit(cache=True)
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit(cache=True)
def minimax_from_source(order, key, indptr, indices):
    """Minimax key values reachable from order[0] in an adjacency graph.

    Nodes are activated in ascending key order (order must sort key).  T[y] is
    the smallest over graph paths from the source to y of the largest key along
    the path, i.e. the radius at which y first joins the source's component of
    the graph restricted to {key <= radius}.  Unreached nodes keep inf.
    """
    n = order.shape[0]
    parent = np.arange(n)
    rank = np.zeros(n, np.int32)
    head = np.arange(n)
    tail = np.arange(n)
    nxt = np.full(n, -1, np.int64)
    hasx = np.zeros(n, np.uint8)
    active = np.zeros(n, np.uint8)
    T = np.full(n, np.inf)
    src = order[0]
    hasx[src] = 1
    T[src] = key[src]
    for oi in range(n):
        p = order[oi]
        kp = key[p]
        active[p] = 1
        for e in range(indptr[p], indptr[p + 1]):
            nb = indices[e]
            if not active[nb]:
                continue
            ra = _find(parent, p)
            rb = _find(parent, nb)
            if ra == rb:
                continue
            combined = hasx[ra] | hasx[rb]
            if hasx[ra] == 1 and hasx[rb] == 0:
                m = head[rb]
                while m != -1:
                    T[m] = kp
                    m = nxt[m]
            elif hasx[rb] == 1 and hasx[ra] == 0:
                m = head[ra]
                while m != -1:
                    T[m] = kp
                    m = nxt[m]
            if rank[ra] < rank[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            if rank[ra] == rank[rb]:
                rank[ra] += 1
            nxt[tail[ra]] = head[rb]
            tail[ra] = tail[rb]
            hasx[ra] = combined
    return T


@njit(cache=True)
def farthest_net_size(dist, members, start, sep):
    """Size of the farthest-point greedy net over members, seeded at start.

    Repeatedly adds the member farthest from the selected set (ties broken
    toward the lowest index) while that distance exceeds sep.  start is a
    position into members.
    """
    m = members.shape[0]
    mind = np.empty(m)
    s = members[start]
    for i in range(m):
        mind[i] = dist[s, members[i]]
    cnt = 1
    while True:
        best = 0
        bv = mind[0]
        for i in range(1, m):
            if mind[i] > bv:
                bv = mind[i]
                best = i
        if bv <= sep:
            break
        cnt += 1
        p = members[best]
        for i in range(m):
            d = dist[p, members[i]]
            if d < mind[i]:
                mind[i] = d
    return cnt


@njit(cache=True)
def bfs_cover(indptr, indices, allowed, start, visited):
    """Mark nodes reachable from start through allowed nodes; returns count."""
    n = allowed.shape[0]
    visited[:] = 0
    if allowed[start] == 0:
        return 0
    queue = np.empty(n, np.int64)
    queue[0] = start
    visited[start] = 1
    qh = 0
    qt = 1
    while qh < qt:
        p = queue[qh]
        qh += 1
        for e in range(indptr[p], indptr[p + 1]):
            nb = indices[e]
            if allowed[nb] == 1 and visited[nb] == 0:
                visited[nb] = 1
                queue[qt] = nb
                qt += 1
    return qt


@njit(cache=True)
def rel_doubling_count(dist, comp_off, comp_idx, x, r, eps_frac):
    """Count boundary components K with diam(K ∩ B(x,r)) >= eps_frac*r."""
    ncomp = comp_off.shape[0] - 1
    count = 0
    for c in range(ncomp):
        lo = comp_off[c]
        hi = comp_off[c + 1]
        best = -1.0
        for a in range(lo, hi):
            pa = comp_idx[a]
            if dist[x, pa] > r:
                continue
            if best < 0.0:
                best = 0.0
            for b in range(a + 1, hi):
                pb = comp_idx[b]
                if dist[x, pb] > r:
                    continue
                v = dist[pa, pb]
                if v > best:
                    best = v
        if best >= eps_frac * r:
            count += 1
    return count


@njit(cache=True)
def rel_porosity_best(dist, comp_off, comp_idx, x, r, eps):
    """Largest diam(piece)/r over eps-pieces of component intersections with
    B(x,r) that meet B(x,r/2); -1.0 when no piece qualifies."""
    ncomp = comp_off.shape[0] - 1
    best = -1.0
    buf = np.empty(comp_idx.shape[0], np.int64)
    label = np.empty(comp_idx.shape[0], np.int64)
    for c in range(ncomp):
        lo = comp_off[c]
        hi = comp_off[c + 1]
        m = 0
        for a in range(lo, hi):
            pa = comp_idx[a]
            if dist[x, pa] <= r:
                buf[m] = pa
                m += 1
        if m == 0:
            continue
        for a in range(m):
            label[a] = a
        for a in range(m):
            for b in range(a + 1, m):
                if dist[buf[a], buf[b]] <= eps:
                    ra = label[a]
                    while label[ra] != ra:
                        ra = label[ra]
                    rb = label[b]
                    while label[rb] != rb:
                        rb = label[rb]
                    if ra != rb:
                        if ra < rb:
                            label[rb] = ra
                        else:
                            label[ra] = rb
        for a in range(m):
            ra = a
            while label[ra] != ra:
                ra = label[ra]
            label[a] = ra
        for root in range(m):
            if label[root] != root:
                continue
            meets = False
            diam_piece = 0.0
            for a in range(m):
                if label[a] != root:
                    continue
                if dist[x, buf[a]] <= 0.5 * r:
                    meets = True
                for b in range(a + 1, m):
                    if label[b] != root:
                        continue
                    v = dist[buf[a], buf[b]]
                    if v > diam_piece:
                        diam_piece = v
            if meets:
                v = diam_piece / r
                if v > best:
                    best = v
    return best


@njit(cache=True)
def qs_samples(ds, dt, img, lin, tvals, svals):
    """Quasisymmetry samples for ordered distinct triples given by linear index.

    Triple (x, a, b) number L in lexicographic order over distinct entries:
    t = ds(x,a)/ds(x,b), s = dt(fx,fa)/dt(fx,fb).
    """
    n = ds.shape[0]
    r2 = (n - 1) * (n - 2)
    for ii in range(lin.shape[0]):
        L = lin[ii]
        d0 = L // r2
        rem = L % r2
        d1 = rem // (n - 2)
        d2 = rem % (n - 2)
        x = d0
        a = d1 + 1 if d1 >= d0 else d1
        lo = x if x < a else a
        hi = a if x < a else x
        b = d2
        if b >= lo:
            b += 1
        if b >= hi:
            b += 1
        tvals[ii] = ds[x, a] / ds[x, b]
        svals[ii] = dt[img[x], img[a]] / dt[img[x], img[b]]


@njit(cache=True)
def qm_samples(ds, dt, img, lin, tvals, svals):
    """Cross-ratio samples for ordered distinct quadruples given by linear index."""
    n = ds.shape[0]
    r3 = (n - 1) * (n - 2) * (n - 3)
    r2 = (n - 2) * (n - 3)
    for ii in range(lin.shape[0]):
        L = lin[ii]
        d0 = L // r3
        rem = L % r3
        d1 = rem // r2
        rem = rem % r2
        d2 = rem // (n - 3)
        d3 = rem % (n - 3)
        x1 = d0
        x2 = d1 + 1 if d1 >= d0 else d1
        lo = x1 if x1 < x2 else x2
        hi = x2 if x1 < x2 else x1
        x3 = d2
        if x3 >= lo:
            x3 += 1
        if x3 >= hi:
            x3 += 1
        a = lo if lo < x3 else x3
        c = hi if hi > x3 else x3
        bmid = lo + hi + x3 - a - c
        x4 = d3
        if x4 >= a:
            x4 += 1
        if x4 >= bmid:
            x4 += 1
        if x4 >= c:
            x4 += 1
        tvals[ii] = ds[x1, x2] * ds[x3, x4] / (ds[x1, x3] * ds[x2, x4])
        y1 = img[x1]
        y2 = img[x2]
        y3 = img[x3]
        y4 = img[x4]
        svals[ii] = dt[y1, y2] * dt[y3, y4] / (dt[y1, y3] * dt[y2, y4])


@njit(cache=True)
def best_separated_triple(ds, dt, img, members, diam_s, diam_t):
    """Triple of members maximizing the smaller of the two normalized
    minimum pairwise distances (source and target)."""
    m = members.shape[0]
    best = -1.0
    bi = members[0]
    bj = members[0]
    bk = members[0]
    for i in range(m):
        pi = members[i]
        for j in range(i + 1, m):
            pj = members[j]
            for k in range(j + 1, m):
                pk = members[k]
                ms = ds[pi, pj]
                if ds[pi, pk] < ms:
                    ms = ds[pi, pk]
                if ds[pj, pk] < ms:
                    ms = ds[pj, pk]
                qi = img[pi]
                qj = img[pj]
                qk = img[pk]
                mt = dt[qi, qj]
                if dt[qi, qk] < mt:
                    mt = dt[qi, qk]
                if dt[qj, qk] < mt:
                    mt = dt[qj, qk]
                v = ms / diam_s
                w = mt / diam_t
                if w < v:
                    v = w
                if v > best:
                    best = v
                    bi = pi
                    bj = pj
                    bk = pk
    return bi, bj, bk


@njit(cache=True)
def minplus(a, b):
    """Min-plus matrix product: out[i, j] = min_k a[i, k] + b[k, j]."""
    n, m = a.shape
    p = b.shape[1]
    out = np.full((n, p), np.inf)
    for i in range(n):
        for k in range(m):
            aik = a[i, k]
            for j in range(p):
                v = aik + b[k, j]
                if v < out[i, j]:
                    out[i, j] = v
    return out
