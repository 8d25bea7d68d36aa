"""Numba kernels for CART growth, weakest-link pruning and forest voting.

Trees are stored in flat parallel arrays: ``feature[t] < 0`` marks a leaf and
children always carry larger indices than their parent (creation order).  The
pruning pass exploits that ordering, and costs are kept in integer sample
units so the alpha = 0 equality case is exact.

Randomness is a splitmix64 stream per tree; the bootstrap draw happens first,
then each node consumes the stream in stack order (right child pushed before
left), which makes training bit-reproducible for a given seed.
"""

import numpy as np
from numba import njit

_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True, inline="always")
def _next_u64(state):
    state[0] = state[0] + _SM64_GAMMA
    z = state[0]
    z = (z ^ (z >> _S30)) * _SM64_M1
    z = (z ^ (z >> _S27)) * _SM64_M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _rand_below(state, n):
    return np.int64(_next_u64(state) % np.uint64(n))


@njit(cache=True)
def _grow(X, y, idx, max_features, min_samples_split, rng,
          feature, threshold, left, right, count0, count1):
    """Grow one CART on the samples in idx (partitioned in place).

    Splits minimize the Gini-weighted child impurity over a fresh random
    draw of max_features features per node; thresholds are midpoints of
    consecutive distinct values with the `x <= threshold goes left` rule.
    Returns the number of nodes created.
    """
    m = idx.shape[0]
    p = X.shape[1]
    stack_node = np.empty(2 * m + 2, np.int64)
    stack_lo = np.empty(2 * m + 2, np.int64)
    stack_hi = np.empty(2 * m + 2, np.int64)
    feat_pool = np.empty(p, np.int64)
    vals = np.empty(m, np.float64)
    vs = np.empty(m, np.float64)
    ys = np.empty(m, np.int64)
    tmp = np.empty(m, np.int64)

    n_nodes = 1
    top = 0
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = m
    while top >= 0:
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        top -= 1
        mm = hi - lo
        c1 = 0
        for t in range(lo, hi):
            c1 += y[idx[t]]
        c0 = mm - c1
        count0[node] = c0
        count1[node] = c1
        feature[node] = -1
        threshold[node] = 0.0
        left[node] = -1
        right[node] = -1
        if c0 == 0 or c1 == 0 or mm < min_samples_split:
            continue

        for i in range(p):
            feat_pool[i] = i
        k = max_features if max_features < p else p
        best_imp = 1e300
        best_f = -1
        best_th = 0.0
        for d in range(k):
            j = d + _rand_below(rng, p - d)
            f = feat_pool[j]
            feat_pool[j] = feat_pool[d]
            feat_pool[d] = f
            for t in range(mm):
                vals[t] = X[idx[lo + t], f]
            order = np.argsort(vals[:mm])
            for t in range(mm):
                o = order[t]
                vs[t] = vals[o]
                ys[t] = y[idx[lo + o]]
            l1 = 0
            for t in range(mm - 1):
                l1 += ys[t]
                if vs[t] < vs[t + 1]:
                    nl = t + 1
                    nr = mm - nl
                    l0 = nl - l1
                    r1 = c1 - l1
                    r0 = nr - r1
                    imp = (nl - (l0 * l0 + l1 * l1) / nl) + (nr - (r0 * r0 + r1 * r1) / nr)
                    if imp < best_imp:
                        best_imp = imp
                        best_f = f
                        th = 0.5 * (vs[t] + vs[t + 1])
                        if th >= vs[t + 1]:
                            th = vs[t]
                        best_th = th
        if best_f < 0:
            continue  # every drawn feature is constant here

        nl_count = 0
        for t in range(lo, hi):
            s = idx[t]
            if X[s, best_f] <= best_th:
                tmp[nl_count] = s
                nl_count += 1
        pos = nl_count
        for t in range(lo, hi):
            s = idx[t]
            if X[s, best_f] > best_th:
                tmp[pos] = s
                pos += 1
        for t in range(mm):
            idx[lo + t] = tmp[t]

        feature[node] = best_f
        threshold[node] = best_th
        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        left[node] = left_id
        right[node] = right_id
        top += 1
        stack_node[top] = right_id
        stack_lo[top] = lo + nl_count
        stack_hi[top] = hi
        top += 1
        stack_node[top] = left_id
        stack_lo[top] = lo
        stack_hi[top] = lo + nl_count
    return n_nodes


@njit(cache=True)
def _prune_and_compact(alpha_scaled, n_nodes, feature, threshold, left, right, count0, count1):
    """Minimal cost-complexity pruning at fixed alpha, then node compaction.

    A node collapses to a leaf when its leaf cost is no worse than the cost
    of its (already pruned) subtree plus alpha per saved leaf; processing
    children first makes this equivalent to the weakest-link sequence and
    yields the smallest tree with minimal total cost.  Costs are counted in
    misclassified samples (alpha_scaled = alpha * n_root).
    """
    mis_sub = np.empty(n_nodes, np.float64)
    leaves = np.empty(n_nodes, np.int64)
    for t in range(n_nodes - 1, -1, -1):
        mis_leaf = count0[t] if count0[t] < count1[t] else count1[t]
        if feature[t] < 0:
            mis_sub[t] = mis_leaf
            leaves[t] = 1
        else:
            ms = mis_sub[left[t]] + mis_sub[right[t]]
            lv = leaves[left[t]] + leaves[right[t]]
            if mis_leaf <= ms + alpha_scaled * (lv - 1):
                feature[t] = -1
                mis_sub[t] = mis_leaf
                leaves[t] = 1
            else:
                mis_sub[t] = ms
                leaves[t] = lv

    keep = np.zeros(n_nodes, np.bool_)
    newid = np.full(n_nodes, -1, np.int64)
    keep[0] = True
    count = 0
    for t in range(n_nodes):
        if not keep[t]:
            continue
        newid[t] = count
        count += 1
        if feature[t] >= 0:
            keep[left[t]] = True
            keep[right[t]] = True
    for t in range(n_nodes):
        if keep[t]:
            nt = newid[t]
            if feature[t] >= 0:
                left[nt] = newid[left[t]]
                right[nt] = newid[right[t]]
            else:
                left[nt] = -1
                right[nt] = -1
            feature[nt] = feature[t]
            threshold[nt] = threshold[t]
            count0[nt] = count0[t]
            count1[nt] = count1[t]
    return count


@njit(cache=True)
def fit_forest_arrays(X, y, tree_seeds, max_features, min_samples_split, ccp_alpha, bootstrap):
    """Train all trees sequentially; returns padded per-tree arrays."""
    n = X.shape[0]
    n_trees = tree_seeds.shape[0]
    max_nodes = 2 * n + 1
    feature = np.full((n_trees, max_nodes), -1, np.int32)
    threshold = np.zeros((n_trees, max_nodes), np.float64)
    left = np.full((n_trees, max_nodes), -1, np.int32)
    right = np.full((n_trees, max_nodes), -1, np.int32)
    count0 = np.zeros((n_trees, max_nodes), np.int64)
    count1 = np.zeros((n_trees, max_nodes), np.int64)
    n_nodes = np.zeros(n_trees, np.int64)
    rng = np.empty(1, np.uint64)
    idx = np.empty(n, np.int64)
    for ti in range(n_trees):
        rng[0] = tree_seeds[ti]
        if bootstrap:
            for t in range(n):
                idx[t] = _rand_below(rng, n)
        else:
            for t in range(n):
                idx[t] = t
        nn = _grow(X, y, idx, max_features, min_samples_split, rng,
                   feature[ti], threshold[ti], left[ti], right[ti], count0[ti], count1[ti])
        n_nodes[ti] = _prune_and_compact(ccp_alpha * n, nn, feature[ti], threshold[ti],
                                         left[ti], right[ti], count0[ti], count1[ti])
    return feature, threshold, left, right, count0, count1, n_nodes


@njit(cache=True)
def predict_votes(Xq, feature, threshold, left, right, count0, count1):
    """Class-1 vote count per sample; each tree votes its leaf majority (ties -> 0)."""
    m = Xq.shape[0]
    n_trees = feature.shape[0]
    votes1 = np.zeros(m, np.int64)
    for ti in range(n_trees):
        for s in range(m):
            t = 0
            while feature[ti, t] >= 0:
                if Xq[s, feature[ti, t]] <= threshold[ti, t]:
                    t = left[ti, t]
                else:
                    t = right[ti, t]
            if count1[ti, t] > count0[ti, t]:
                votes1[s] += 1
    return votes1
