"""Build the cyclic (n, r, 1) designs and check them.

Every pair of servers should land together in exactly one block. We build the
design for each r from 2 to 6, print the small ones, and then break a block on
purpose to see what the checker reports.
"""

from redsim import build_design, find_planar_difference_set, verify_bibd
from redsim.designs import Design


def show(design):
    for block in design.blocks:
        print("   ", " ".join(f"{p:2d}" for p in sorted(block)))


for r in range(2, 7):
    ds = find_planar_difference_set(r)
    design = build_design(r)
    report = verify_bibd(design, 1)
    print(f"r={r}: n={design.n}, difference set {ds.residues}, valid={report.ok}")
    if r <= 3:
        show(design)

# Swap one point in the (7, 3, 1) design: pair coverage breaks immediately.
blocks = [list(b) for b in build_design(3).blocks]
blocks[0][2] = (blocks[0][2] + 1) % 7
broken = Design(7, 3, [tuple(b) for b in blocks])
print("\nafter editing one block:")
for line in verify_bibd(broken, 1).violations:
    print("   ", line)

# r = 7 needs a projective plane of order 6, which does not exist.
try:
    build_design(7)
except Exception as exc:
    print(f"\nr=7: {exc}")
