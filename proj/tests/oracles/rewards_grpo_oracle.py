#!/usr/bin/env python3
"""Reference values for reward components, proposer/coder composition,
group advantages and the clipped surrogate loss.

Reward arithmetic uses exact fractions; advantages and losses use 50-digit
mpmath. Output is frozen into tests/data/oracles/rewards_grpo.json.

    python3 tests/oracles/rewards_grpo_oracle.py > tests/data/oracles/rewards_grpo.json
"""
import json
import sys
from fractions import Fraction as F

import mpmath

mpmath.mp.dps = 50

TAU_S = F(1, 2)
DELTA_EH = F(15, 100)
LAMBDA_EH = F(3, 10)
PHI = F(1, 2)
LAMBDA_CT = F(15, 100)
W_C, W_E, W_H = F(45, 100), F(20, 100), F(35, 100)
LAMBDA_DIV = F(1, 2)
ERR_RENDER = F(1, 10)
ERR_SYNTAX = F(5, 100)
EPS_NORM = mpmath.mpf("1e-6")


def consistency(votes):
    """Largest class share; None votes count only in the denominator."""
    counts = {}
    for v in votes:
        if v is not None:
            counts[v] = counts.get(v, 0) + 1
    if not counts:
        return None
    return F(max(counts.values()), len(votes))


def difficulty(c):
    return min(c, 1 - c)


def solvability(votes, gold):
    return F(sum(1 for v in votes if v == gold), len(votes))


def easy_hard(diffs):
    if not diffs or sum(diffs) / len(diffs) < DELTA_EH:
        return -LAMBDA_EH
    return F(0)


def content_type(f_t):
    return -LAMBDA_CT * (f_t - PHI) / (1 - PHI) if f_t > PHI else F(0)


def diversity(s_cap, s_eq, s_hq, m):
    u = F(1, m)
    raw = (W_C * (s_cap - u) + W_E * (s_eq - u) + W_H * (s_hq - u)) * m * LAMBDA_DIV
    return -max(-LAMBDA_DIV, min(LAMBDA_DIV, raw))


def proposer(images, gold, ctx):
    """images: list of (ok, easy_votes, hard_votes)."""
    per, diffs = [], []
    for ok, easy, hard in images:
        if not ok:
            per.append(F(0))
            continue
        c = consistency(hard)
        d = difficulty(c) if c is not None else F(0)
        diffs.append(d)
        per.append(min(solvability(easy, gold), TAU_S) + d)
    base = sum(per) / len(per)
    r_eh = easy_hard(diffs)
    r_ct = content_type(ctx["f_t"])
    r_div = diversity(ctx["s_cap"], ctx["s_eq"], ctx["s_hq"], ctx["m"])
    return {"base": base, "r_eh": r_eh, "r_ct": r_ct, "r_div": r_div, "total": base + r_eh + r_ct + r_div}


def coder(status, easy, hard, gold):
    if status != "ok":
        pen = ERR_RENDER + (ERR_SYNTAX if status == "syntax_error" else 0)
        return -pen
    c = consistency(hard)
    d = difficulty(c) if c is not None else F(0)
    return 1 + solvability(easy, gold) + d


def advantages(rewards):
    r = [mpmath.mpf(x) for x in rewards]
    n = len(r)
    if n == 1:
        return [mpmath.mpf(0)]
    mean = mpmath.fsum(r) / n
    std = mpmath.sqrt(mpmath.fsum((x - mean) ** 2 for x in r) / n)
    return [(x - mean) / (std + EPS_NORM) for x in r]


def loss(rewards, old, new, kl, beta, eps=mpmath.mpf("0.2")):
    a = advantages(rewards)
    total = mpmath.mpf(0)
    for ai, o, w in zip(a, old, new):
        rho = mpmath.exp(mpmath.mpf(w) - mpmath.mpf(o))
        clipped = min(max(rho, 1 - eps), 1 + eps)
        total += min(rho * ai, clipped * ai)
    val = -total / len(a)
    if kl:
        val += mpmath.mpf(beta) * mpmath.fsum(mpmath.mpf(k) for k in kl) / len(kl)
    return val


def fl(x):
    return float(x)


def main():
    out = {}

    out["difficulty"] = [
        {"hard_votes": v, "value": fl(difficulty(consistency(v)))}
        for v in (["7", "7", "9", "7", "9"], ["1", "2"], ["3", "3", "3"], ["1", "2", "3", "4", "5"], [None, None, "4"])
    ]
    out["content_type"] = [{"f_t": f, "value": fl(content_type(F(f).limit_denominator()))}
                           for f in (0.25, 0.5, 0.6, 0.75, 1.0)]
    out["diversity"] = [
        {"s_cap": fl(a), "s_eq": fl(b), "s_hq": fl(c), "m": m, "value": fl(diversity(a, b, c, m))}
        for a, b, c, m in [
            (F(1), F(1), F(1), 4),
            (F(1, 4), F(1, 4), F(1, 4), 4),
            (F(2, 4), F(1, 4), F(1, 4), 4),
            (F(2, 6), F(3, 6), F(1, 6), 6),
            (F(1), F(1, 3), F(2, 3), 3),
            (F(1), F(1), F(1), 1),
        ]
    ]

    ctx_uniform = {"f_t": F(1, 4), "s_cap": F(1, 4), "s_eq": F(1, 4), "s_hq": F(1, 4), "m": 4}
    fail = (False, [], [])
    cases = [
        ("all_fail", [fail] * 4, "5", ctx_uniform),
        ("one_perfect", [(True, ["5"] * 5, ["1", "1", "2", "2", None])], "5", ctx_uniform),
        ("mixed", [(True, ["5", "5", "6", None, "5"], ["7", "7", "9", "7", "9"]),
                   (True, ["5", "4", "4", "4", "4"], ["1", "1", "1", "1", "1"]),
                   fail,
                   (True, [None] * 5, [None] * 5)],
         "5", {"f_t": F(3, 4), "s_cap": F(2, 4), "s_eq": F(1, 4), "s_hq": F(3, 4), "m": 4}),
        ("easy_only", [(True, ["5"] * 5, ["1"] * 5)] * 2, "5",
         {"f_t": F(1), "s_cap": F(1), "s_eq": F(1), "s_hq": F(1), "m": 2}),
    ]
    out["proposer"] = []
    for name, images, gold, ctx in cases:
        r = proposer(images, gold, ctx)
        out["proposer"].append({
            "name": name,
            "gold": gold,
            "images": [{"ok": ok, "easy": e, "hard": h} for ok, e, h in images],
            "context": {k: fl(v) if k != "m" else v for k, v in ctx.items()},
            **{k: fl(v) for k, v in r.items()},
        })

    out["coder"] = [
        {"status": s, "easy": e, "hard": h, "gold": "5", "value": fl(coder(s, e, h, "5"))}
        for s, e, h in [
            ("ok", ["5"] * 5, ["1", "1", "2", "2", "3", "3"][:4]),
            ("ok", ["5", "5", "5", "4", None], ["7", "7", "9", "7", "9"]),
            ("render_error", [], []),
            ("timeout", [], []),
            ("invalid_dimensions", [], []),
            ("syntax_error", [], []),
        ]
    ]

    groups = [[1, 0, 0, 0], [1, 0], [1, 1, 1, 1], [0.3, 0.9, 0.1, 0.5, 0.5], [-1, 1.5, 0.2, -0.3, 1.0, 0.75],
              [2.5], [0.1, 1.0, 0.9, 0.0, 1.0, 1.0, 0.1, 0.9]]
    out["advantages"] = [{"rewards": g, "advantages": [fl(a) for a in advantages(g)]} for g in groups]

    loss_cases = [
        {"rewards": [1, 0, 0, 0], "old": [-1.0, -2.0, -1.5, -3.0], "new": [-1.0, -2.0, -1.5, -3.0], "kl": [], "beta": 0},
        {"rewards": [1, 0, 0, 0], "old": [-1.0, -2.0, -1.5, -3.0], "new": [-0.2, -2.5, -1.4, -3.3], "kl": [], "beta": 0},
        {"rewards": [0.1, 1.0, 0.9, 0.0], "old": [-4.0, -3.0, -2.0, -1.0], "new": [-3.5, -3.1, -2.4, -0.6],
         "kl": [0.01, 0.02, 0.0, 0.05], "beta": 0.04},
        {"rewards": [1, 1], "old": [-1.0, -1.0], "new": [-1.0, -1.0], "kl": [0.5, 0.5], "beta": 1},
    ]
    for c in loss_cases:
        c["loss"] = fl(loss(c["rewards"], c["old"], c["new"], c["kl"], c["beta"]))
    out["loss"] = loss_cases

    json.dump(out, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
