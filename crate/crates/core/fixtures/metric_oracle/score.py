"""Independent scorer for the metric oracle fixture.

Reads qrels.txt and run.txt, computes MAP, recall@1000, nDCG@1000 (linear
gain, log2(rank+1) discount), P@10 and MRR with exact fractions where
possible, and writes expected.csv. Queries with no grade >= 1 are skipped.
"""
import math
from fractions import Fraction
from collections import defaultdict

qrels = defaultdict(dict)
for line in open("qrels.txt"):
    q, _, p, g = line.split()
    qrels[q][p] = int(g)
runs = defaultdict(list)
for line in open("run.txt"):
    q, _, p, r, s, t = line.split()
    runs[q].append((int(r), p))
for q in runs:
    runs[q] = [p for _, p in sorted(runs[q])]

rows = []
for q in sorted(qrels):
    j = qrels[q]
    rel = {p for p, g in j.items() if g >= 1}
    if not rel:
        continue
    ranking = runs.get(q, [])[:1000]
    hits, ap = 0, Fraction(0)
    for k, p in enumerate(ranking, 1):
        if p in rel:
            hits += 1
            ap += Fraction(hits, k)
    ap /= len(rel)
    recall = Fraction(sum(p in rel for p in ranking), len(rel))
    p10 = Fraction(sum(p in rel for p in ranking[:10]), 10)
    rr = next((Fraction(1, k) for k, p in enumerate(ranking, 1) if p in rel), Fraction(0))
    dcg = sum(j.get(p, 0) / math.log2(k + 1) for k, p in enumerate(ranking, 1))
    ideal = sorted((g for g in j.values() if g > 0), reverse=True)
    idcg = sum(g / math.log2(k + 1) for k, g in enumerate(ideal, 1))
    rows.append((q, float(ap), float(recall), dcg / idcg, float(p10), float(rr)))

with open("expected.csv", "w") as f:
    f.write("qid,ap,recall,ndcg,p@10,rr\n")
    for r in rows:
        f.write(r[0] + "," + ",".join(f"{v:.9f}" for v in r[1:]) + "\n")
    n = len(rows)
    f.write("all," + ",".join(f"{sum(r[i] for r in rows) / n:.9f}" for i in range(1, 6)) + "\n")
