"""
Survivable probability versus true reliability
==============================================

The survivable probability only counts single failures of critical links.
Under independent failures several links may go down at once, so the exact
probability of staying connected is never larger.
"""

from xsurv import exact_reliability, load_bundled, mapping_probability, mc_reliability

inst, m = load_bundled("fig1")
print(f"survivable probability: {mapping_probability(inst, m):.6f}")

exact = exact_reliability(inst, m)
print(f"exact reliability over {exact.samples} failure patterns: {exact.value:.6f}")

# Monte Carlo converges on the exact value; the seed fixes every draw.
for n in (100, 10_000, 1_000_000):
    mc = mc_reliability(inst, m, samples=n, seed=0)
    print(f"  {n:>9} samples: {mc.value:.6f} +/- {mc.stderr:.6f}"
          f"  (error {abs(mc.value - exact.value):.6f})")
