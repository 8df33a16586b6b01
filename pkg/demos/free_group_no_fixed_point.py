"""Why F_2 keeps moving its boundary.

The length inequality |gy| >= |g| + 1 holds on every word checked.  The probe
then follows each boundary candidate's orbit until it passes the budget.
This is evidence at bounded length, not a proof.
"""

from horofront.freegrp import check_length_inequality, exhaustive_inequality_sweep, power_witness_replay, stabilizer_probe
from horofront.groups import parse_word

r = check_length_inequality(["a", "b"], "A", "bbb", "a")
print(f"g=A, y=bbb: |g|={r.g_length}, |gy|={r.gy_length}, holds={r.holds}")

sweep = exhaustive_inequality_sweep(["a", "b"], 5, 5)
print(f"exhaustive sweep: {sweep.cases} cases, {len(sweep.violations)} violations")
sampled = exhaustive_inequality_sweep(["a", "b", "ab"], 5, 14, mode="sampled", samples=2000, seed=1)
print(f"with ab in the marking (threshold {sampled.threshold}): {sampled.cases} samples, "
      f"{len(sampled.violations)} violations")

probe = stabilizer_probe(["a", "b"], 2, 10, 30)
for c in probe.candidates[:4]:
    print(f"  candidate via {c['witness']}: {c['verdict']} after {c['images']} images")
print(f"all {len(probe.candidates)} candidates exceed the budget: {probe.all_exceed}")

replay = power_witness_replay(["a", "b"], 1, parse_word("b"), range(1, 9))
print(f"y = {replay['y']}; b_(a^n)(y) and b_(a^n)(y^-1) for n = 1..8:")
for n, u, v in replay["rows"]:
    print(f"  n={n}: {u}, {v}")
