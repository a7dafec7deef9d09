"""Pure-Python batch fusion kernel.

Reference twin of ``_kernel.pyx``. Both files perform the same floating
point operations in the same order, so their outputs are bit-identical;
keep them in lockstep when editing either one.
"""

import math

import numpy as np

OK = 0
TOTAL_CONFLICT = 1
DEGENERATE_CERTAINTY = 2
NO_MODALITIES = 3

CONFLICT_EPS = 1e-12
CERTAINTY_EPS = 1e-12


def fuse_batch(logits, present, advanced):
    """Fuse ``N`` records of ``M`` modality logit rows over ``K`` classes.

    ``logits`` is float64 ``(N, M, K)``; ``present`` is uint8 ``(N, M)``.
    Modalities are folded in axis-1 order. Returns a dict of arrays:
    ``beliefs``, ``uncertainty``, ``strength``, ``alpha``, ``probabilities``,
    ``conflicts`` (NaN-padded, one column per combination step),
    ``n_steps`` and ``status``.
    """
    logits = np.ascontiguousarray(logits, dtype=np.float64)
    present = np.ascontiguousarray(present, dtype=np.uint8)
    n, m, k = logits.shape
    rows = logits.tolist()
    mask = present.tolist()
    kf = float(k)
    n_conf = max(m - 1, 0)

    beliefs_out = []
    unc_out = []
    strength_out = []
    alpha_out = []
    prob_out = []
    conf_out = []
    steps_out = []
    status_out = []

    for i in range(n):
        rec = rows[i]
        pres = mask[i]
        conf = [math.nan] * n_conf
        status = OK
        steps = 0

        gmin = math.inf
        any_present = False
        for j in range(m):
            if pres[j]:
                any_present = True
                for x in rec[j]:
                    if x < gmin:
                        gmin = x

        fb = [0.0] * k
        fu = 1.0
        have = False
        if not any_present:
            status = NO_MODALITIES
        else:
            for j in range(m):
                if not pres[j]:
                    continue
                row = rec[j]
                if advanced:
                    e = [x - gmin for x in row]
                else:
                    e = [x if x > 0.0 else 0.0 for x in row]
                s = 0.0
                for x in e:
                    s += x + 1.0
                b = [x / s for x in e]
                u = kf / s
                if u == 1.0 and not any(b):
                    continue  # vacuous: exact identity under combination
                if not have:
                    fb = b
                    fu = u
                    have = True
                    continue
                agree = 0.0
                for q in range(k):
                    agree += fb[q] * b[q]
                c = (1.0 - fu) * (1.0 - u) - agree
                if c < 0.0:
                    c = 0.0
                norm = 1.0 - c
                if norm < CONFLICT_EPS:
                    status = TOTAL_CONFLICT
                    break
                fb = [(fb[q] * b[q] + fb[q] * u + b[q] * fu) / norm for q in range(k)]
                fu = fu * u / norm
                conf[steps] = c
                steps += 1

        if status == OK and fu < CERTAINTY_EPS:
            status = DEGENERATE_CERTAINTY
        if status == OK:
            s = kf / fu
            alpha = [x * s + 1.0 for x in fb]
            prob = [x / s for x in alpha]
        else:
            fb = [math.nan] * k
            fu = math.nan
            s = math.nan
            alpha = [math.nan] * k
            prob = [math.nan] * k

        beliefs_out.append(fb)
        unc_out.append(fu)
        strength_out.append(s)
        alpha_out.append(alpha)
        prob_out.append(prob)
        conf_out.append(conf)
        steps_out.append(steps)
        status_out.append(status)

    return {
        "beliefs": np.array(beliefs_out, dtype=np.float64).reshape(n, k),
        "uncertainty": np.array(unc_out, dtype=np.float64),
        "strength": np.array(strength_out, dtype=np.float64),
        "alpha": np.array(alpha_out, dtype=np.float64).reshape(n, k),
        "probabilities": np.array(prob_out, dtype=np.float64).reshape(n, k),
        "conflicts": np.array(conf_out, dtype=np.float64).reshape(n, n_conf),
        "n_steps": np.array(steps_out, dtype=np.int32),
        "status": np.array(status_out, dtype=np.int32),
    }
