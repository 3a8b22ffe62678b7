"""Writes offline_log.txt: 10,000 events logged by a uniform random policy.

Columns: action (1-based), reward, propensity, then 5 binary features.
"""
import random

K, D, N = 10, 5, 10_000
rng = random.Random(20240521)
# Click probability per (feature, arm); feature f favours arm 2f+1.
weights = [[0.05] * K for _ in range(D)]
for f in range(D):
    weights[f][2 * f] = 0.6
    weights[f][2 * f + 1] = 0.3

with open("offline_log.txt", "w") as out:
    out.write("# action reward propensity x1..x5\n")
    for _ in range(N):
        f = rng.randrange(D)
        x = [1 if i == f else 0 for i in range(D)]
        a = rng.randrange(K)
        r = 1 if rng.random() < weights[f][a] else 0
        out.write(f"{a + 1} {r} {1 / K} {' '.join(map(str, x))}\n")
