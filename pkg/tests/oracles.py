"""Independent reference computations used as test oracles.

Deliberately naive: character loops, explicit per-element arithmetic and
plain Python floats, sharing no code with the package internals.
"""

import math
import string

ALNUM = set(string.ascii_lowercase + string.digits)


def split_words(text):
    words, cur = [], []
    for ch in text.lower():
        if ch in ALNUM:
            cur.append(ch)
        elif cur:
            words.append("".join(cur))
            cur = []
    if cur:
        words.append("".join(cur))
    return words


def compound(text, valences, alpha=15.0):
    total = 0.0
    for w in split_words(text):
        if w in valences:
            total = total + valences[w]
    if total == 0.0:
        return 0.0
    return total / math.sqrt(total * total + alpha)


def polarity(text, positive, negative, eps=1e-6):
    pos = sum(1 for w in split_words(text) if w in positive)
    neg = sum(1 for w in split_words(text) if w in negative)
    if pos + neg == 0:
        return 0.0
    return (pos - neg) / (pos + neg + eps)


def daily_means(rows, calendar):
    """rows: (date, matches, score). Mean of matching scores per calendar day, else 0."""
    out = {}
    for day in calendar:
        picked = [s for d, m, s in rows if d == day and m]
        out[day] = sum(picked) / len(picked) if picked else 0.0
    return out


def _sig(x):
    return 1.0 / (1.0 + math.exp(-x))


def scalar_lstm_unroll(xs, w, u, b):
    """One-unit LSTM over scalar inputs with relu candidate/output.

    ``w``, ``u``, ``b`` are dicts keyed by gate name. Returns the hidden
    state after every step, computed one number at a time.
    """
    h = c = 0.0
    hs = []
    for x in xs:
        i = _sig(w["input"] * x + u["input"] * h + b["input"])
        f = _sig(w["forget"] * x + u["forget"] * h + b["forget"])
        o = _sig(w["output"] * x + u["output"] * h + b["output"])
        g = max(0.0, w["candidate"] * x + u["candidate"] * h + b["candidate"])
        c = f * c + i * g
        h = o * max(0.0, c)
        hs.append(h)
    return hs


def central_differences(loss_fn, arrays, h=1e-5):
    """Numerical gradient of ``loss_fn()`` w.r.t. every entry of ``arrays`` (mutated in place and restored)."""
    grads = []
    for arr in arrays:
        g = arr.copy()
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for k in range(flat.size):
            old = flat[k]
            flat[k] = old + h
            up = loss_fn()
            flat[k] = old - h
            down = loss_fn()
            flat[k] = old
            gflat[k] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def mape_loop(actuals, forecasts):
    total = 0.0
    for a, f in zip(actuals, forecasts):
        total += abs(a - f) / abs(a)
    return 100.0 / len(actuals) * total
