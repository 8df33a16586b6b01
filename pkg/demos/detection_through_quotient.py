"""Pull a fixed horofunction of Z back to F_2.

The quotient kills b.  With C = 1 the combined metric is
D = max(d_S, 2 |pi(.)|), and f = 2 h_(+inf) o pi is fixed by every generator.
On its stabilizer f is additive.  Here the stabilizer is all of F_2, and f is
the homomorphism a -> -2, b -> 0.
"""

from horofront.groups import free_group, quotient_from_spec
from horofront.vabelian import detection_pipeline

F = free_group(2)
pi = quotient_from_spec({"target": {"family": "free_abelian", "dim": 1}, "images": [[1], [0]]}, source=F)
rep = detection_pipeline(F, pi, R=2, R_scan=10, full_scan=False)
print(f"C = {rep.C}, M = {rep.M}, orbit of f: {rep.f_orbit_size}, fixed at radii {rep.fixed_radii}")
print("shell witnesses of f:", rep.scan["section_witnesses"])
for w in ("a", "b", "ab", "aab", "abAB"):
    x = F.parse(w)
    if x in rep.hom.values:
        print(f"  f({w}) = {rep.hom.value(x)}")
print(f"additivity: {rep.hom.pairs_checked} pairs, {rep.hom.failures} failures")
