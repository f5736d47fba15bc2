"""Numba kernels for the sampler's inner loops and the VI distance matrix."""

import numpy as np
from numba import njit


@njit(cache=True)
def _pick(w, u):
    # inverse-CDF draw from unnormalized nonnegative weights
    total = 0.0
    for k in range(w.size):
        total += w[k]
    target = u * total
    acc = 0.0
    last = -1
    for k in range(w.size):
        if w[k] > 0.0:
            last = k
            acc += w[k]
            if acc > target:
                return k
    return last


@njit(cache=True)
def _view_marginal(w, alive, cellidx, v, Lv, marg):
    for k in range(Lv):
        marg[k] = 0.0
    for m in range(w.size):
        if alive[m]:
            marg[cellidx[m, v]] += w[m]


@njit(cache=True)
def _pick_sequential(w, cellidx, L, order, u, alive, marg):
    # one view at a time: exact marginal of the remaining cells, then condition
    M = w.size
    for m in range(M):
        alive[m] = True
    for j in range(order.size):
        v = order[j]
        _view_marginal(w, alive, cellidx, v, L[v], marg)
        k = _pick(marg[: L[v]], u[j])
        for m in range(M):
            alive[m] = alive[m] and cellidx[m, v] == k
    for m in range(M):
        if alive[m]:
            return m
    return -1


@njit(cache=True)
def sequential_cell_probs(w, cellidx, L, order):
    """Probability of each cell under view-by-view compositional sampling."""
    M = w.size
    probs = np.ones(M)
    alive = np.empty(M, dtype=np.bool_)
    marg = np.empty(L.max())
    for target in range(M):
        for m in range(M):
            alive[m] = True
        for j in range(order.size):
            v = order[j]
            _view_marginal(w, alive, cellidx, v, L[v], marg)
            total = 0.0
            for k in range(L[v]):
                total += marg[k]
            k = cellidx[target, v]
            probs[target] *= marg[k] / total
            for m in range(M):
                alive[m] = alive[m] and cellidx[m, v] == k
    return probs


@njit(cache=True)
def cell_log_weights(i, counts, cellidx, LL, base, out):
    """Unnormalized log full-conditional of object ``i`` over every cell."""
    V = cellidx.shape[1]
    mx = -np.inf
    for m in range(counts.size):
        s = np.log(base[m] + counts[m])
        for v in range(V):
            s += LL[v, i, cellidx[m, v]]
        out[m] = s
        if s > mx:
            mx = s
    return mx


@njit(cache=True)
def label_sweep(labels, counts, cellidx, strides, L, LL, base, uniforms, joint, order):
    """One systematic scan over objects, updating labels and cell counts in place.

    ``labels`` is (V, n) with 0-based component indices, ``counts`` the
    flattened contingency array, ``base`` the flattened ``rho * prod q``.
    """
    V, n = labels.shape
    M = counts.size
    logw = np.empty(M)
    w = np.empty(M)
    alive = np.empty(M, dtype=np.bool_)
    marg = np.empty(L.max())
    for i in range(n):
        cell = 0
        for v in range(V):
            cell += labels[v, i] * strides[v]
        counts[cell] -= 1
        mx = cell_log_weights(i, counts, cellidx, LL, base, logw)
        for m in range(M):
            w[m] = 1.0 if mx == -np.inf else np.exp(logw[m] - mx)
        if joint:
            new = _pick(w, uniforms[i, 0])
        else:
            new = _pick_sequential(w, cellidx, L, order, uniforms[i], alive, marg)
        counts[new] += 1
        for v in range(V):
            labels[v, i] = cellidx[new, v]


@njit(cache=True)
def aux_r_update(counts, r, log_base, stirling, uniforms):
    """Redraw every cell's auxiliary count from its Stirling-weighted law."""
    buf = np.empty(counts.max() + 1)
    for m in range(counts.size):
        nm = counts[m]
        if nm == 0:
            r[m] = 0
            continue
        if nm == 1 or log_base[m] == -np.inf:
            r[m] = 1
            continue
        mx = -np.inf
        for w in range(1, nm + 1):
            lw = stirling[nm, w] + w * log_base[m]
            buf[w - 1] = lw
            if lw > mx:
                mx = lw
        for w in range(nm):
            buf[w] = np.exp(buf[w] - mx)
        r[m] = _pick(buf[:nm], uniforms[m]) + 1


@njit(cache=True)
def _entropy(counts, n):
    h = 0.0
    for k in range(counts.size):
        if counts[k] > 0:
            p = counts[k] / n
            h -= p * np.log(p)
    return h


@njit(cache=True)
def vi_matrix(a, b, n_labels):
    """VI distance between every row of ``a`` and every row of ``b``.

    Rows are 0-based label vectors with values below ``n_labels``.
    """
    na, n = a.shape
    nb = b.shape[0]
    ha = np.empty(na)
    hb = np.empty(nb)
    marg = np.zeros(n_labels)
    for s in range(na):
        marg[:] = 0.0
        for i in range(n):
            marg[a[s, i]] += 1.0
        ha[s] = _entropy(marg, n)
    for t in range(nb):
        marg[:] = 0.0
        for i in range(n):
            marg[b[t, i]] += 1.0
        hb[t] = _entropy(marg, n)
    joint = np.zeros(n_labels * n_labels)
    out = np.empty((na, nb))
    for s in range(na):
        for t in range(nb):
            for i in range(n):
                joint[a[s, i] * n_labels + b[t, i]] += 1.0
            # visit each occupied cell once, resetting it as we go
            hj = 0.0
            for i in range(n):
                idx = a[s, i] * n_labels + b[t, i]
                c = joint[idx]
                if c > 0.0:
                    hj -= c / n * np.log(c / n)
                    joint[idx] = 0.0
            d = 2.0 * hj - ha[s] - hb[t]
            out[s, t] = d if d > 0.0 else 0.0
    return out
