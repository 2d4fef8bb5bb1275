"""Gates, stream fusion, attention cost and gradient checks.

Run: python3 demos/attention_tour.py
"""

import numpy as np

from emofeat.attention import SkipGate, TriStreamConfig, TriStreamModel, attention_cost, run_suite

for w in (-2.0, 0.0, 1.0):
    a = SkipGate(w).alpha
    print(f"skip gate w={w:+.1f}: second path weight {a:.5f}, first path weight {1 - a:.5f}")
# the tri-stream model puts its conv path second, so w=+1 keeps 73% of it

model = TriStreamModel(TriStreamConfig(feat_dim=16, heads=4, stride=10, pool=5, hidden=32))
trace = []
logits = model(np.random.default_rng(0).normal(size=(30, 500)), trace)
print(f"tri-stream logits {np.round(logits.data[0], 3)}; fusion weights {model.fusion_weights()}")
for name, t in zip(("spatial", "temporal", "asymmetry"), trace):
    print(f"  {name:>9} attention {t.shape}, max row-sum error {np.abs(t.sum(-1) - 1).max():.1e}")

for t, p in ((25, 196), (8, 49), (1, 196)):
    r = attention_cost(t, p)
    print(f"cost T={t:3d} P={p:3d}: full {r.full_entries:>11,} factorized {r.factorized_entries:>9,} "
          f"ratio {r.ratio:6.2f}{' (degenerate)' if r.degenerate else ''}")

errors = run_suite(seed=1)
worst = max(errors, key=errors.get)
print(f"gradient check: {len(errors)} ops, worst {worst} at {errors[worst]:.1e}")
