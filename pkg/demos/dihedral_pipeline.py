"""The infinite dihedral group has a horofunction with a finite orbit.

Build the lattice generators U = {r^3, r^-3}, check that <r^3> sits
isometrically inside, follow a geodesic ray until its Busemann functions
settle, and search the orbit of the limit.
"""

from horofront.groups import infinite_dihedral
from horofront.vabelian import VAStructure, build_UT, finite_orbit_pipeline, verify_isometric_embedding, zd_fixed_point_check

D = infinite_dihedral()
va = VAStructure(D)
c = build_UT(va)
print(f"K = {c.K}, U = {sorted(D.format(u) for u in c.U)}, |T| = {len(c.T.generators)}, index bound = {c.index}")

emb = verify_isometric_embedding(c, 15)
print(f"isometric on N within B_T(15): {emb.ok} ({emb.checked} points)")

rep = finite_orbit_pipeline(va, R=6, R_scan=30)
print(f"restrictions settle from step {rep.stabilized_from}")
print(f"orbit: {rep.orbit.verdict} of size {rep.orbit_size}")
print(f"agrees with h_(+inf) on the lattice: {zd_fixed_point_check(c, rep.functional)}")
