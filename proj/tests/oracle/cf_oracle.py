#!/usr/bin/env python3
"""Brute-force reference values for the cflevels test suites.

Everything here is written directly from the formulas, using plain dicts and
Python floats, without sharing any code path with the C++ library. Running the
script regenerates tests/data/oracle_cases.json, which the C++ tests load and
compare against at 1e-9 absolute.

    python3 tests/oracle/cf_oracle.py > tests/data/oracle_cases.json
"""

import json
import math
import random
import sys

WORKED = {
    "User1": {"Item1": 1, "Item2": 2, "Item3": 3},
    "User2": {"Item1": 5, "Item2": 5, "Item3": 3, "Item4": 3},
    "User3": {"Item3": 4, "Item4": 2},
    "User4": {"Item1": 1, "Item2": 1, "Item3": 1, "Item4": 5},
}


def round_half_away(x):
    return math.floor(x + 0.5) if x >= 0 else -math.floor(-x + 0.5)


def corated(m, a, b):
    return sorted(set(m[a]) & set(m[b]))


def pcc(m, a, b):
    items = corated(m, a, b)
    if len(items) < 2:
        return 0.0
    ma = sum(m[a][p] for p in items) / len(items)
    mb = sum(m[b][p] for p in items) / len(items)
    num = sum((m[a][p] - ma) * (m[b][p] - mb) for p in items)
    da = sum((m[a][p] - ma) ** 2 for p in items)
    db = sum((m[b][p] - mb) ** 2 for p in items)
    if da == 0 or db == 0:
        return 0.0
    return max(-1.0, min(1.0, num / (math.sqrt(da) * math.sqrt(db))))


def wpcc(s, c, T):
    return (c / T) * s if c < T else s


def spcc(s, c):
    return s * (1.0 / (1.0 + math.exp(-c / 2.0)))


def plus(s, alpha, beta):
    if s == 0:
        return 0.0
    return alpha * math.copysign(abs(s) ** beta, s)


def static(s, c, t, y):
    if c >= t and s >= y:
        return s + s
    return s * (1.0 / (1.0 + s * s))


def level_table(users, items):
    dvu = round_half_away(math.log10(users))
    dvi = round_half_away(math.log2(items))
    step = max(1, round_half_away(dvi / dvu))
    bands = [[max(dvi, 5), None, 1]]
    upper = dvi - 1
    k = 2
    while upper >= 5:
        lower = max(upper - step + 1, 5)
        bands.append([lower, upper, k])
        upper = lower - 1
        k += 1
    return {"users": users, "items": items, "dvu": dvu, "dvi": dvi,
            "step": step, "bands": bands}


def dynamic(s, c, table, form="eq4"):
    # Cascade of integer comparisons.
    for lower, upper, k in table["bands"]:
        if c >= lower and (upper is None or c <= upper):
            return s + s / k
    if form == "eq4":
        return s * (1.0 / (1.0 + s * s))
    if form == "eq8":
        return s * (1.0 / (1.0 + s * s) - 1.0)
    return (s * (1.0 / (1.0 + s * s))) / 6.0


def user_sort_key(uid):
    return (0, len(uid.lstrip("0")), uid.lstrip("0"), uid) if uid.isdigit() else (1, 0, uid, uid)


def predict(m, a, item, k, simfn, lo, hi):
    cands = []
    for b in m:
        if b == a or item not in m[b]:
            continue
        w = simfn(a, b)
        if w > 0:
            cands.append((-w, user_sort_key(b), b, w))
    cands.sort()
    nb = cands[:k]
    if not nb:
        return None
    mean_a = sum(m[a].values()) / len(m[a])
    num = 0.0
    den = 0.0
    for _, _, b, w in nb:
        mean_b = sum(m[b].values()) / len(m[b])
        num += w * (m[b][item] - mean_b)
        den += abs(w)
    if den == 0:
        return None
    return max(lo, min(hi, mean_a + num / den))


def random_matrix(rng, users=10, items=10, density=0.6):
    m = {}
    for u in range(users):
        row = {}
        for i in range(items):
            if rng.random() < density:
                row["i%d" % i] = rng.randint(1, 5)
        if row:
            m["u%d" % u] = row
    return m


MT_TABLE = level_table(39363, 22610)
SMALL_TABLE = level_table(100, 1024)


def pair_block(m):
    out = []
    users = sorted(m, key=user_sort_key)
    for x in range(len(users)):
        for y in range(x + 1, len(users)):
            a, b = users[x], users[y]
            s = pcc(m, a, b)
            c = len(corated(m, a, b))
            out.append({
                "a": a, "b": b, "corated": c, "pcc": s,
                "wpcc_T5": wpcc(s, c, 5),
                "spcc": spcc(s, c),
                "plus_100_2": plus(s, 100, 2),
                "static_t4_y020": static(s, c, 4, 0.20),
                "dynamic_mt": dynamic(s, c, MT_TABLE),
                "dynamic_small": dynamic(s, c, SMALL_TABLE),
                "dynamic_small_eq8": dynamic(s, c, SMALL_TABLE, "eq8"),
                "dynamic_small_alg1": dynamic(s, c, SMALL_TABLE, "alg1"),
            })
    return out


def prediction_block(m, k):
    out = []
    users = sorted(m, key=user_sort_key)
    items = sorted({i for row in m.values() for i in row})
    pc = lambda a, b: pcc(m, a, b)
    dyn = lambda a, b: dynamic(pcc(m, a, b), len(corated(m, a, b)), SMALL_TABLE)
    for a in users:
        for i in items:
            if i in m[a]:
                continue
            out.append({"user": a, "item": i,
                        "pcc": predict(m, a, i, k, pc, 1.0, 5.0),
                        "dynamic_small": predict(m, a, i, k, dyn, 1.0, 5.0)})
    return out


def metric_block(rng):
    n = rng.randint(1, 30)
    pairs = [[rng.randint(1, 5) + rng.choice([0, 0.25, 0.5]), rng.randint(1, 5)] for _ in range(n)]
    pairs = [[min(p, 5.0), float(r)] for p, r in pairs]
    mae = sum(abs(p - r) for p, r in pairs) / n
    rmse = math.sqrt(sum((p - r) ** 2 for p, r in pairs) / n)
    universe = ["i%d" % j for j in range(40)]
    topn = rng.sample(universe, rng.randint(0, 20))
    relevant = rng.sample(universe, rng.randint(1, 15))
    hits = len(set(topn) & set(relevant))
    precision = hits / len(topn) if topn else 0.0
    recall = hits / len(relevant)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    counts = [rng.choice([0, 0, 1, 2, 3]) for _ in range(rng.randint(1, 50))]
    hit_rate = 100.0 * sum(1 for h in counts if h > 0) / len(counts)
    return {"pairs": pairs, "mae": mae, "nmae": mae / 4.0, "rmse": rmse,
            "topn": topn, "relevant": relevant,
            "precision": precision, "recall": recall, "f1": f1,
            "hit_counts": counts, "hit_rate": hit_rate}


def main():
    rng = random.Random(20170901)
    worked_items = sorted({i for row in WORKED.values() for i in row})
    worked = {
        "ratings": WORKED,
        "pairs": pair_block(WORKED),
        "predict_user1_item4_k2_pcc": predict(WORKED, "User1", "Item4", 2,
                                              lambda a, b: pcc(WORKED, a, b), 1.0, 5.0),
        "user3_predictions_k3_pcc": {
            i: predict(WORKED, "User3", i, 3, lambda a, b: pcc(WORKED, a, b), 1.0, 5.0)
            for i in worked_items if i not in WORKED["User3"]},
    }
    cases = []
    for n in range(120):
        m = random_matrix(rng)
        cases.append({"ratings": m, "pairs": pair_block(m),
                      "predictions_k3": prediction_block(m, 3),
                      "metrics": metric_block(rng)})
    tables = [level_table(u, i) for u, i in
              [(39363, 22610), (6000, 4000), (49290, 139738), (500, 300), (100, 1024),
               (10, 2), (1000000, 1 << 20)]]
    json.dump({"worked": worked, "cases": cases, "level_tables": tables,
               "mt_table": MT_TABLE, "small_table": SMALL_TABLE},
              sys.stdout, sort_keys=True, separators=(",", ":"))
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
