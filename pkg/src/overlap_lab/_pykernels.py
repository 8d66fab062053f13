"""Pure-Python covering-word tree descent (fallback for the compiled kernel)."""

import numpy as np


def cover_profile(ratios, offsets, hull_lo, hull_hi, plo, phi, margin, n, logp, target, tau):
    """Depth-first count of words whose cylinder covers ``[plo, phi]``.

    Returns ``(beta, filtered, ambiguous, visits)``; the first three are int64
    arrays indexed by depth ``0..n``.  A node whose cylinder is within
    ``margin`` of a bracket endpoint is counted in ``beta`` and also in
    ``ambiguous``.  ``filtered`` additionally requires the word's average of
    ``logp`` to be within ``tau`` of ``target``.
    """
    r = [float(x) for x in ratios]
    b = [float(x) for x in offsets]
    lp = [float(x) for x in logp]
    m = len(r)
    hull_lo = float(hull_lo)
    hull_hi = float(hull_hi)
    lo_e = float(plo) - margin
    hi_e = float(phi) + margin
    beta = [0] * (n + 1)
    filt = [0] * (n + 1)
    amb = [0] * (n + 1)
    beta[0] = filt[0] = 1
    visits = 0
    stack = [(0, 1.0, 0.0, 0.0)]
    pop = stack.pop
    push = stack.append
    while stack:
        k, R, B, S = pop()
        k1 = k + 1
        for j in range(m):
            R2 = R * r[j]
            B2 = R * b[j] + B
            a = R2 * hull_lo + B2
            c = R2 * hull_hi + B2
            if a > c:
                a, c = c, a
            visits += 1
            if c < lo_e or a > hi_e:
                continue
            S2 = S + lp[j]
            beta[k1] += 1
            if not (a <= lo_e and c >= hi_e):
                amb[k1] += 1
            if abs(S2 / k1 - target) < tau:
                filt[k1] += 1
            if k1 < n:
                push((k1, R2, B2, S2))
    return (
        np.array(beta, dtype=np.int64),
        np.array(filt, dtype=np.int64),
        np.array(amb, dtype=np.int64),
        visits,
    )
