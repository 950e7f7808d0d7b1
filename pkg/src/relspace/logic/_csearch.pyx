# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stable-model search kernel; mirrors ``_search_py`` exactly."""

from libc.stdlib cimport malloc, calloc, free

cdef enum:
    UNASSIGNED = 2


cdef struct Kernel:
    int n_atoms
    int n_rules
    int *heads
    int *bstart
    int *blits
    int *blen
    # CSR occurrence lists
    int *pos_start
    int *pos_rules
    int *neg_start
    int *neg_rules
    int *head_start
    int *head_rules
    # search state
    char *val
    int *ntrue
    int *nfalse
    int *support
    char *is_budget
    int *budget_atoms
    int n_budget
    int budget_k
    int budget_count
    int *trail
    int trail_len
    int qhead
    # scratch for the least-model check
    char *inm
    int *missing
    char *active
    int *stack


cdef int *_csr(int n, list lists, int **out_items):
    cdef int total = 0, i, j
    cdef int *start = <int *> malloc((n + 1) * sizeof(int))
    for i in range(n):
        start[i] = total
        total += len(lists[i])
    start[n] = total
    cdef int *items = <int *> malloc((total + 1) * sizeof(int))
    for i in range(n):
        for j in range(len(lists[i])):
            items[start[i] + j] = lists[i][j]
    out_items[0] = items
    return start


cdef inline void _assign(Kernel *k, int a, int v):
    k.val[a] = v
    k.trail[k.trail_len] = a
    k.trail_len += 1


cdef inline int _lit_value(Kernel *k, int lit):
    cdef int v = k.val[lit >> 1]
    if v == UNASSIGNED:
        return UNASSIGNED
    return v ^ (lit & 1)


cdef inline bint _force_lit(Kernel *k, int lit, int want):
    cdef int a = lit >> 1
    cdef int v = want ^ (lit & 1)
    if k.val[a] == UNASSIGNED:
        _assign(k, a, v)
        return True
    return k.val[a] == v


cdef bint _check_rule(Kernel *k, int r):
    cdef int h, j
    if k.nfalse[r] > 0:
        return True
    h = k.heads[r]
    if k.ntrue[r] == k.blen[r]:
        if h < 0:
            return False
        if k.val[h] == UNASSIGNED:
            _assign(k, h, 1)
            return True
        return k.val[h] == 1
    if k.ntrue[r] == k.blen[r] - 1 and (h < 0 or k.val[h] == 0):
        for j in range(k.bstart[r], k.bstart[r + 1]):
            if _lit_value(k, k.blits[j]) == UNASSIGNED:
                return _force_lit(k, k.blits[j], 0)
    return True


cdef bint _check_atom(Kernel *k, int a):
    cdef int i, r, j
    if k.support[a] == 0:
        if k.val[a] == 1:
            return False
        if k.val[a] == UNASSIGNED:
            _assign(k, a, 0)
        return True
    if k.support[a] == 1 and k.val[a] == 1:
        for i in range(k.head_start[a], k.head_start[a + 1]):
            r = k.head_rules[i]
            if k.nfalse[r] == 0:
                for j in range(k.bstart[r], k.bstart[r + 1]):
                    if not _force_lit(k, k.blits[j], 1):
                        return False
                break
    return True


cdef inline void _lit_changed(Kernel *k, int r, bint became_true):
    if became_true:
        k.ntrue[r] += 1
    else:
        k.nfalse[r] += 1
        if k.nfalse[r] == 1 and k.heads[r] >= 0:
            k.support[k.heads[r]] -= 1


cdef inline void _revert(Kernel *k, int r, bint was_true):
    if was_true:
        k.ntrue[r] -= 1
    else:
        k.nfalse[r] -= 1
        if k.nfalse[r] == 0 and k.heads[r] >= 0:
            k.support[k.heads[r]] += 1


cdef bint _propagate(Kernel *k):
    cdef int a, v, i, r, b
    while k.qhead < k.trail_len:
        a = k.trail[k.qhead]
        k.qhead += 1
        v = k.val[a]
        for i in range(k.pos_start[a], k.pos_start[a + 1]):
            _lit_changed(k, k.pos_rules[i], v == 1)
        for i in range(k.neg_start[a], k.neg_start[a + 1]):
            _lit_changed(k, k.neg_rules[i], v == 0)
        if k.is_budget[a] and v == 1:
            k.budget_count += 1
        for i in range(k.pos_start[a], k.pos_start[a + 1]):
            r = k.pos_rules[i]
            if not _check_rule(k, r):
                return False
            if k.nfalse[r] == 1 and v == 0 and k.heads[r] >= 0 and not _check_atom(k, k.heads[r]):
                return False
        for i in range(k.neg_start[a], k.neg_start[a + 1]):
            r = k.neg_rules[i]
            if not _check_rule(k, r):
                return False
            if k.nfalse[r] == 1 and v == 1 and k.heads[r] >= 0 and not _check_atom(k, k.heads[r]):
                return False
        for i in range(k.head_start[a], k.head_start[a + 1]):
            if not _check_rule(k, k.head_rules[i]):
                return False
        if not _check_atom(k, a):
            return False
        if k.budget_k >= 0 and k.is_budget[a] and v == 1:
            if k.budget_count > k.budget_k:
                return False
            if k.budget_count == k.budget_k:
                for i in range(k.n_budget):
                    b = k.budget_atoms[i]
                    if k.val[b] == UNASSIGNED:
                        _assign(k, b, 0)
    return True


cdef void _undo(Kernel *k, int to):
    cdef int i, a, v, j
    while k.trail_len > to:
        i = k.trail_len - 1
        a = k.trail[i]
        k.trail_len -= 1
        if i < k.qhead:
            v = k.val[a]
            for j in range(k.pos_start[a], k.pos_start[a + 1]):
                _revert(k, k.pos_rules[j], v == 1)
            for j in range(k.neg_start[a], k.neg_start[a + 1]):
                _revert(k, k.neg_rules[j], v == 0)
            if k.is_budget[a] and v == 1:
                k.budget_count -= 1
        k.val[a] = UNASSIGNED
    if k.qhead > to:
        k.qhead = to


cdef list _least_model(Kernel *k):
    cdef int r, j, lit, cnt, a, top = 0, i
    for a in range(k.n_atoms):
        k.inm[a] = 0
    for r in range(k.n_rules):
        cnt = 0
        k.active[r] = 1
        for j in range(k.bstart[r], k.bstart[r + 1]):
            lit = k.blits[j]
            if lit & 1:
                if k.val[lit >> 1] == 1:
                    k.active[r] = 0
                    break
            else:
                cnt += 1
        k.missing[r] = cnt
        if k.active[r] and cnt == 0:
            if k.heads[r] < 0:
                return None
            k.stack[top] = k.heads[r]
            top += 1
    while top > 0:
        top -= 1
        a = k.stack[top]
        if k.inm[a]:
            continue
        k.inm[a] = 1
        for i in range(k.pos_start[a], k.pos_start[a + 1]):
            r = k.pos_rules[i]
            if k.active[r]:
                k.missing[r] -= 1
                if k.missing[r] == 0:
                    if k.heads[r] < 0:
                        return None
                    k.stack[top] = k.heads[r]
                    top += 1
    for a in range(k.n_atoms):
        if k.val[a] != UNASSIGNED and (k.val[a] == 1) != (k.inm[a] == 1):
            return None
    if k.budget_k >= 0:
        cnt = 0
        for i in range(k.n_budget):
            if k.inm[k.budget_atoms[i]]:
                cnt += 1
        if cnt > k.budget_k:
            return None
    return [a for a in range(k.n_atoms) if k.inm[a]]


cdef void _release(Kernel *k):
    free(k.heads); free(k.bstart); free(k.blits); free(k.blen)
    free(k.pos_start); free(k.pos_rules); free(k.neg_start); free(k.neg_rules)
    free(k.head_start); free(k.head_rules)
    free(k.val); free(k.ntrue); free(k.nfalse); free(k.support)
    free(k.is_budget); free(k.budget_atoms); free(k.trail)
    free(k.inm); free(k.missing); free(k.active); free(k.stack)


def enumerate_models(int n_atoms, heads, body_start, body_lits, choice_order, init,
                     budget_atoms, int budget_k, int max_models, long node_limit):
    cdef Kernel k
    cdef int n_rules = len(heads)
    cdef int r, j, a, lit, i
    k.n_atoms = n_atoms
    k.n_rules = n_rules
    k.heads = <int *> malloc((n_rules + 1) * sizeof(int))
    k.bstart = <int *> malloc((n_rules + 1) * sizeof(int))
    k.blits = <int *> malloc((len(body_lits) + 1) * sizeof(int))
    k.blen = <int *> malloc((n_rules + 1) * sizeof(int))
    occ_pos = [[] for _ in range(n_atoms)]
    occ_neg = [[] for _ in range(n_atoms)]
    hrules = [[] for _ in range(n_atoms)]
    for r in range(n_rules):
        k.heads[r] = heads[r]
        k.bstart[r] = body_start[r]
        k.blen[r] = body_start[r + 1] - body_start[r]
        for j in range(body_start[r], body_start[r + 1]):
            lit = body_lits[j]
            k.blits[j] = lit
            if lit & 1:
                occ_neg[lit >> 1].append(r)
            else:
                occ_pos[lit >> 1].append(r)
        if heads[r] >= 0:
            hrules[heads[r]].append(r)
    k.bstart[n_rules] = body_start[n_rules]
    k.pos_start = _csr(n_atoms, occ_pos, &k.pos_rules)
    k.neg_start = _csr(n_atoms, occ_neg, &k.neg_rules)
    k.head_start = _csr(n_atoms, hrules, &k.head_rules)
    k.val = <char *> malloc((n_atoms + 1) * sizeof(char))
    k.support = <int *> malloc((n_atoms + 1) * sizeof(int))
    k.is_budget = <char *> calloc(n_atoms + 1, sizeof(char))
    k.inm = <char *> calloc(n_atoms + 1, sizeof(char))
    k.trail = <int *> malloc((n_atoms + 1) * sizeof(int))
    for a in range(n_atoms):
        k.val[a] = UNASSIGNED
        k.support[a] = len(hrules[a])
    k.ntrue = <int *> calloc(n_rules + 1, sizeof(int))
    k.nfalse = <int *> calloc(n_rules + 1, sizeof(int))
    k.missing = <int *> calloc(n_rules + 1, sizeof(int))
    k.active = <char *> calloc(n_rules + 1, sizeof(char))
    k.stack = <int *> malloc((n_rules + n_atoms + 1) * sizeof(int))
    k.n_budget = len(budget_atoms)
    k.budget_atoms = <int *> malloc((k.n_budget + 1) * sizeof(int))
    for i in range(k.n_budget):
        k.budget_atoms[i] = budget_atoms[i]
        k.is_budget[budget_atoms[i]] = 1
    k.budget_k = budget_k
    k.budget_count = 0
    k.trail_len = 0
    k.qhead = 0

    cdef int n_choice = len(choice_order)
    cdef int *choice = <int *> malloc((n_choice + 1) * sizeof(int))
    for i in range(n_choice):
        choice[i] = choice_order[i]
    # decision stack: trail length, choice index, atom, second branch taken
    cdef int *d_trail = <int *> malloc((n_choice + 1) * sizeof(int))
    cdef int *d_pos = <int *> malloc((n_choice + 1) * sizeof(int))
    cdef int *d_atom = <int *> malloc((n_choice + 1) * sizeof(int))
    cdef char *d_flip = <char *> malloc((n_choice + 1) * sizeof(char))
    cdef int depth = 0, pos = 0, status = 0
    cdef long nodes = 0
    cdef bint ok = True, conflict
    models = []
    try:
        for a in range(n_atoms):
            if init[a] != UNASSIGNED:
                if k.val[a] == UNASSIGNED:
                    _assign(&k, a, init[a])
                elif k.val[a] != init[a]:
                    return [], 0
        for r in range(n_rules):
            if not _check_rule(&k, r):
                ok = False
                break
        if ok:
            for a in range(n_atoms):
                if not _check_atom(&k, a):
                    ok = False
                    break
        if ok:
            ok = _propagate(&k)
        if not ok:
            return [], 0
        while True:
            while pos < n_choice and k.val[choice[pos]] != UNASSIGNED:
                pos += 1
            conflict = False
            if pos == n_choice:
                m = _least_model(&k)
                if m is not None:
                    models.append(m)
                    if max_models > 0 and len(models) >= max_models:
                        return models, 1
                conflict = True
            else:
                nodes += 1
                if node_limit > 0 and nodes > node_limit:
                    return models, 2
                a = choice[pos]
                d_trail[depth] = k.trail_len
                d_pos[depth] = pos
                d_atom[depth] = a
                d_flip[depth] = 0
                depth += 1
                _assign(&k, a, 1)
                if not _propagate(&k):
                    conflict = True
            if conflict:
                while depth > 0:
                    _undo(&k, d_trail[depth - 1])
                    if d_flip[depth - 1]:
                        depth -= 1
                        continue
                    d_flip[depth - 1] = 1
                    pos = d_pos[depth - 1]
                    _assign(&k, d_atom[depth - 1], 0)
                    if _propagate(&k):
                        break
                else:
                    return models, 0
    finally:
        free(choice); free(d_trail); free(d_pos); free(d_atom); free(d_flip)
        _release(&k)
