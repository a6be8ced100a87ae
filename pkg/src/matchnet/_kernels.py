"""Hot per-round loops, compiled under the numba backend.

Both kernels are pure functions of their array arguments; every random
number they consume is drawn by the caller.  That makes the numba and
numpy backends bit-identical and replications schedule-independent.
"""
from __future__ import annotations

import numpy as np

from .backend import jit

# pass rules
RULE_PSI = 0        # low dates are offered to low single friends only
RULE_UPSILON = 1    # any date may go to any single friend


def _pick_recipients_impl(indptr, indices, eligible, types, passers,
                          date_types, rule, u):
    # For each passer: choose one eligible single friend uniformly,
    # using the pre-drawn uniform u[k]; -1 when no friend is eligible.
    out = np.full(passers.size, -1, dtype=np.int64)
    for k in range(passers.size):
        j = passers[k]
        lo = indptr[j]
        hi = indptr[j + 1]
        restrict_low = rule == RULE_PSI and date_types[k] == 0
        count = 0
        for t in range(lo, hi):
            f = indices[t]
            if eligible[f] == 1 and (not restrict_low or types[f] == 0):
                count += 1
        if count == 0:
            continue
        target = int(u[k] * count)
        if target == count:
            target = count - 1
        seen = 0
        for t in range(lo, hi):
            f = indices[t]
            if eligible[f] == 1 and (not restrict_low or types[f] == 0):
                if seen == target:
                    out[k] = f
                    break
                seen += 1
    return out


def _resolve_impl(sides, recipients, dates, order, newly0, newly1,
                  married0, married1):
    # Sequentially marry (recipient, date) pairs in the given order;
    # a proposal fails (conflict) when either party already married in
    # this round.  Returns per-proposal success flags and the conflict
    # count.
    wins = np.zeros(sides.size, dtype=np.uint8)
    conflicts = 0
    for t in range(order.size):
        k = order[t]
        g = sides[k]
        r = recipients[k]
        dd = dates[k]
        if g == 0:
            rec_newly, date_newly = newly0, newly1
            rec_married = married0
        else:
            rec_newly, date_newly = newly1, newly0
            rec_married = married1
        if rec_married[r] == 1 or rec_newly[r] == 1 or date_newly[dd] == 1:
            conflicts += 1
            continue
        rec_newly[r] = 1
        date_newly[dd] = 1
        wins[k] = 1
    return wins, conflicts


pick_recipients = jit(_pick_recipients_impl)
resolve_proposals = jit(_resolve_impl)
