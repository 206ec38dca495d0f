"""Which side of the critical exponents a parameter tuple sits on, and what the numerics show.

1. Classify a few tuples: instantaneous blow-up versus the global-existence window.
2. Run the first-iterate refinement ladder for a blow-up tuple and its f = 0 control.
3. Check the annulus lower bound for singular data.
A full global-existence run is in configs/global.cfg (about 90 s).
"""

from fracosgood.grid import Grid, InitialData
from fracosgood.kernels import KernelSet
from fracosgood.osgood import OsgoodFunction
from fracosgood.regimes import RegimeParams, classify_rows
from fracosgood.solver import annulus_bound_check, blowup_probe
from fracosgood.symbol import SpectralMeasure, Symbol

tuples = [
    RegimeParams(0.8, 1, 1, 4, 1),
    RegimeParams(0.8, 1, 1, 2, 1),
    RegimeParams(0.9, 0.5, 1, 2, 3),
    RegimeParams(0.5, 0.5, 1, 2, 3),
]
print(f"{'alpha':>5} {'beta':>5} {'d':>2} {'k':>4} {'q':>4} {'q_c':>7} {'window':>14} blowup global")
for r in classify_rows(tuples):
    print(f"{r['alpha']:>5} {r['beta']:>5} {r['d']:>2} {r['k']:>4} {r['q']:>4} {float(r['q_c']):7.4f} "
          f"{'(' + r['q_lo'] + ', ' + r['q_hi'] + ')':>14} {r['blowup']:>6} {r['global_ok']:>6}")

sym = Symbol(1.0, SpectralMeasure.symmetric())
ks = KernelSet(0.8, sym, Grid(1, 1024, 64.0))
print("\nblow-up ladder, alpha=0.8 beta=1 d=1 k=4 q=1")
rep = blowup_probe(ks, OsgoodFunction(4, 4), q=1, eps=1.5, tau=0.9, rho=0.7, levels=4)
for i, lv in enumerate(rep.levels):
    ratio = rep.ratios[i - 1] if i else float("nan")
    print(f"  level {i}: n={lv['n']:5d}  log functional={lv['log_functional']:12.4f}  ratio={ratio:.3g}")
print("  verdict:", rep.verdict)
ctrl = blowup_probe(ks, None, q=1, eps=1.5, tau=0.9, rho=0.7, levels=4)
print("  control (f = 0):", ctrl.verdict)

print("\nannulus bound for u0 = |x|^-1/2 on B(2)")
ann = annulus_bound_check(KernelSet(0.8, sym, Grid(1, 1 << 17, 64.0)), InitialData.singular(0.5, 2.0), 0.5)
for c in ann.to_json()["checks"]:
    print(f"  phi={c['phi']:.4f}  t <= {c['t_bound']:.3g}  worst margin {c['worst_margin']:.3f}")
print("  passed:", ann.passed)
