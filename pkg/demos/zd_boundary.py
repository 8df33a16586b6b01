"""The boundary of Z^2 seen through a finite window.

Scan every Busemann restriction to B(3) with witnesses out to 12, compare
with the closed-form family h_alpha, then sort the candidates by orbit type.
"""

from horofront.exactzd import classify, realized_patterns, restrict, standard_metric
from horofront.functionals import orbit, scan_boundary

m = standard_metric(2)
scan = scan_boundary(m, 3, 12, margin=2)
oracle = realized_patterns(2, 3, 12, 2)
print(f"scan candidates: {len(scan.candidates)}, closed-form patterns: {len(oracle)}, "
      f"equal: {scan.values_set() == oracle}")

for alpha in (("+inf", "+inf"), ("+inf", 2), (1, -1)):
    print(f"h_{alpha} is {classify(alpha)}")

fixed = []
for c in scan.candidates:
    rep = orbit(m, scan.functional(c), budget=50)
    if rep.verdict == "fixed_point":
        fixed.append(m.group.format(scan.canonical_witness(c)))
print("fixed points, by canonical witness:", ", ".join(fixed))

# a fixed point is the restriction of a corner alpha
print("corner (+inf,-inf) restricted to B(1):", restrict(("+inf", "-inf"), 1).values)
