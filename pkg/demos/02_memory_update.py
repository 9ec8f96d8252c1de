"""An outsider's description of a box-world measurement, and why it superglues."""

from fractions import Fraction

from paradox_lab.gpt import make_gbit, make_pr_box
from paradox_lab.memory import (
    bipartite_preservation_check,
    build_memory_update,
    check_information_preserving,
    compress,
    detect_superglue,
    update_system,
)

update = build_memory_update()
print("memory update matrix (system x memory, block form):")
print(update.pretty())

g = make_gbit(1, 0)
after = update_system(g)
print("\nafter measuring the (1, 0) gbit:", after.pretty())
print("compressed back to one system:", compress(after).compressed.pretty())
report = detect_superglue(after, ((0,), (1,)))
print("system|memory:", report.verdict, "-", report.witness.describe())

fair = update_system(make_gbit(Fraction(1, 2), Fraction(1, 2)))
print("p = q = 1/2:", detect_superglue(fair, ((0,), (1,))).verdict)

print("\ninformation preserving:", bool(check_information_preserving(update)))
result = bipartite_preservation_check(make_pr_box())
print("both halves of a PR box updated; effective box is still the PR box:", result.ok)
