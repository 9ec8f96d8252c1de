"""Gbits, the PR box and the no-signalling polytope."""

from fractions import Fraction

from paradox_lab.gpt import (
    SystemSignature,
    chsh_value,
    conditional_box,
    enumerate_ns_vertices,
    make_gbit,
    make_pr_box,
    marginal,
    violates_chsh,
)

g = make_gbit(Fraction(1, 3), Fraction(3, 4))
print("gbit (p, q) = (1/3, 3/4):", g.pretty())

pr = make_pr_box()
print("PR box:", pr.pretty())
print("Alice's marginal:", marginal(pr, (0,)).pretty())
print("CHSH value:", chsh_value(pr))
for a in (0, 1):
    prob, rest = conditional_box(pr, 0, 1, a)
    print(f"Alice reads setting 1 and sees {a} (prob {prob}); Bob's box becomes {rest.pretty()}")

vertices = enumerate_ns_vertices(SystemSignature.gbits(2))
print(f"2-gbit polytope: {len(vertices)} vertices, {sum(violates_chsh(v) for v in vertices)} above the local bound")
