"""Reference implementation of the stable-model search kernel.

Atoms are integers; a body literal is ``2 * atom + naf``. The search
branches only on atoms that occur under default negation: once those
are fixed, the reduct is fixed, and its least model either matches the
partial assignment (a stable model) or not. Between decisions, the
completion of the program is enforced by unit propagation.

The Cython module ``_csearch`` implements the same algorithm with the
same signature and must return identical results.
"""

UNASSIGNED = 2


def enumerate_models(n_atoms, heads, body_start, body_lits, choice_order, init,
                     budget_atoms, budget_k, max_models, node_limit):
    """Return ``(models, status)``.

    ``models`` lists each stable model as a sorted list of true atoms.
    ``status`` is 0 when the search finished, 1 when ``max_models`` was
    reached and 2 when ``node_limit`` decisions were exceeded.
    ``budget_k < 0`` disables the cardinality bound on ``budget_atoms``.
    """
    n_rules = len(heads)
    occ_pos = [[] for _ in range(n_atoms)]
    occ_neg = [[] for _ in range(n_atoms)]
    head_rules = [[] for _ in range(n_atoms)]
    blen = [0] * n_rules
    for r in range(n_rules):
        blen[r] = body_start[r + 1] - body_start[r]
        for k in range(body_start[r], body_start[r + 1]):
            lit = body_lits[k]
            (occ_neg if lit & 1 else occ_pos)[lit >> 1].append(r)
        if heads[r] >= 0:
            head_rules[heads[r]].append(r)

    val = [UNASSIGNED] * n_atoms
    ntrue = [0] * n_rules
    nfalse = [0] * n_rules
    support = [len(head_rules[a]) for a in range(n_atoms)]
    is_budget = [False] * n_atoms
    for a in budget_atoms:
        is_budget[a] = True
    budget_count = [0]
    trail = []
    qhead = [0]

    def assign(a, v):
        val[a] = v
        trail.append(a)

    def lit_value(lit):
        v = val[lit >> 1]
        if v == UNASSIGNED:
            return UNASSIGNED
        return v ^ (lit & 1)

    def force_lit(lit, want):
        # make literal ``lit`` evaluate to ``want``; False on conflict
        a = lit >> 1
        v = want ^ (lit & 1)
        if val[a] == UNASSIGNED:
            assign(a, v)
            return True
        return val[a] == v

    def check_rule(r):
        if nfalse[r] > 0:
            return True
        h = heads[r]
        if ntrue[r] == blen[r]:
            if h < 0:
                return False
            if val[h] == UNASSIGNED:
                assign(h, 1)
                return True
            return val[h] == 1
        if ntrue[r] == blen[r] - 1 and (h < 0 or val[h] == 0):
            for k in range(body_start[r], body_start[r + 1]):
                if lit_value(body_lits[k]) == UNASSIGNED:
                    return force_lit(body_lits[k], 0)
        return True

    def check_atom(a):
        if support[a] == 0:
            if val[a] == 1:
                return False
            if val[a] == UNASSIGNED:
                assign(a, 0)
            return True
        if support[a] == 1 and val[a] == 1:
            for r in head_rules[a]:
                if nfalse[r] == 0:
                    for k in range(body_start[r], body_start[r + 1]):
                        if not force_lit(body_lits[k], 1):
                            return False
                    break
        return True

    def lit_changed(r, became_true):
        if became_true:
            ntrue[r] += 1
        else:
            nfalse[r] += 1
            if nfalse[r] == 1 and heads[r] >= 0:
                support[heads[r]] -= 1

    def propagate():
        while qhead[0] < len(trail):
            a = trail[qhead[0]]
            qhead[0] += 1
            v = val[a]
            for r in occ_pos[a]:
                lit_changed(r, v == 1)
            for r in occ_neg[a]:
                lit_changed(r, v == 0)
            if is_budget[a] and v == 1:
                budget_count[0] += 1
            for r in occ_pos[a]:
                if not check_rule(r) or (nfalse[r] == 1 and v == 0 and heads[r] >= 0
                                         and not check_atom(heads[r])):
                    return False
            for r in occ_neg[a]:
                if not check_rule(r) or (nfalse[r] == 1 and v == 1 and heads[r] >= 0
                                         and not check_atom(heads[r])):
                    return False
            for r in head_rules[a]:
                if not check_rule(r):
                    return False
            if not check_atom(a):
                return False
            if budget_k >= 0 and is_budget[a] and v == 1:
                if budget_count[0] > budget_k:
                    return False
                if budget_count[0] == budget_k:
                    for b in budget_atoms:
                        if val[b] == UNASSIGNED:
                            assign(b, 0)
        return True

    def undo(to):
        while len(trail) > to:
            i = len(trail) - 1
            a = trail.pop()
            if i < qhead[0]:
                v = val[a]
                for r in occ_pos[a]:
                    _revert(r, v == 1)
                for r in occ_neg[a]:
                    _revert(r, v == 0)
                if is_budget[a] and v == 1:
                    budget_count[0] -= 1
            val[a] = UNASSIGNED
        if qhead[0] > to:
            qhead[0] = to

    def _revert(r, was_true):
        if was_true:
            ntrue[r] -= 1
        else:
            nfalse[r] -= 1
            if nfalse[r] == 0 and heads[r] >= 0:
                support[heads[r]] += 1

    def least_model_matches():
        # least model of the reduct with respect to the current assignment
        inm = [False] * n_atoms
        missing = [0] * n_rules
        active = [True] * n_rules
        stack = []
        for r in range(n_rules):
            cnt = 0
            for k in range(body_start[r], body_start[r + 1]):
                lit = body_lits[k]
                if lit & 1:
                    if val[lit >> 1] == 1:
                        active[r] = False
                        break
                else:
                    cnt += 1
            missing[r] = cnt
            if active[r] and cnt == 0:
                if heads[r] < 0:
                    return None
                stack.append(heads[r])
        while stack:
            a = stack.pop()
            if inm[a]:
                continue
            inm[a] = True
            for r in occ_pos[a]:
                if active[r]:
                    missing[r] -= 1
                    if missing[r] == 0:
                        if heads[r] < 0:
                            return None
                        stack.append(heads[r])
        for a in range(n_atoms):
            if val[a] != UNASSIGNED and (val[a] == 1) != inm[a]:
                return None
        if budget_k >= 0:
            cnt = 0
            for b in budget_atoms:
                if inm[b]:
                    cnt += 1
            if cnt > budget_k:
                return None
        return [a for a in range(n_atoms) if inm[a]]

    for a in range(n_atoms):
        if init[a] != UNASSIGNED:
            if val[a] == UNASSIGNED:
                assign(a, init[a])
            elif val[a] != init[a]:
                return [], 0
    ok = True
    for r in range(n_rules):
        if not check_rule(r):
            ok = False
            break
    if ok:
        for a in range(n_atoms):
            if not check_atom(a):
                ok = False
                break
    if ok:
        ok = propagate()
    if not ok:
        return [], 0

    models = []
    n_choice = len(choice_order)
    # decision stack entries: [trail length, choice index, atom, second branch taken]
    stack = []
    pos = 0
    nodes = 0
    while True:
        while pos < n_choice and val[choice_order[pos]] != UNASSIGNED:
            pos += 1
        conflict = False
        if pos == n_choice:
            m = least_model_matches()
            if m is not None:
                models.append(m)
                if max_models > 0 and len(models) >= max_models:
                    return models, 1
            conflict = True
        else:
            nodes += 1
            if node_limit > 0 and nodes > node_limit:
                return models, 2
            a = choice_order[pos]
            stack.append([len(trail), pos, a, False])
            assign(a, 1)
            if not propagate():
                conflict = True
        if conflict:
            while stack:
                top = stack[-1]
                undo(top[0])
                if top[3]:
                    stack.pop()
                    continue
                top[3] = True
                pos = top[1]
                assign(top[2], 0)
                if propagate():
                    break
            else:
                return models, 0
