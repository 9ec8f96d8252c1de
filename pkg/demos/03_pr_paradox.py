"""Four box-world agents reach a contradiction without post-selection."""

from paradox_lab import harness

report = harness.run("pr_box.exp")
print(report.to_text())
wigner = next(c for c in report.certificates if c.agent.name == "W")
print("Wigner's derivation:")
print(harness.certificate_trace(wigner))
print(harness.explain("pr_box.exp", 3, "U"))
