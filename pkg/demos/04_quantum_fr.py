"""The quantum version needs the u = w = ok branch to reach a contradiction."""

from paradox_lab import harness
from paradox_lab import quantum as q

print("final four-qubit state:", q.fr_final_state().pretty())
print("P(u=ok, w=ok) =", q.fr_pair_table("u", "w")[("ok", "ok")])

with_select = harness.run("fr_quantum.exp")
print(with_select.to_text())
print(harness.certificate_trace(with_select.certificates[0]))

without = harness.run("fr_quantum.exp", ignore_select=True)
print("without post-selection:", "consistent" if not without.certificates else "contradiction")
print()
print(harness.explain("fr_quantum.exp", 2, "B"))
