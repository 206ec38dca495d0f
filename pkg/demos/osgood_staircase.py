"""The Osgood staircase f^[k]: values, lower envelope and divergence blocks."""

import numpy as np

from fracosgood.osgood import (
    OsgoodFunction,
    f_eval,
    f_n_eval,
    f_tilde_eval,
    lipschitz_constant,
    osgood_divergence_report,
    power_bound_constant,
)

of = OsgoodFunction(2, 4)
print("thresholds phi_i:", [of.phi(i) for i in range(4)])

s = np.array([1.0, 2.0, 4.0, 8.0, 10.0, 16.0, 100.0, 200.0, 256.0])
print(f"{'s':>8} {'f':>12} {'f_tilde':>12} {'f_1':>12} {'f / s^2':>10}")
for sv, f, ft, f1 in zip(s, f_eval(of, s), f_tilde_eval(of, s), f_n_eval(of, 1, s)):
    print(f"{sv:8g} {f:12.6g} {ft:12.6g} {f1:12.6g} {f / sv**2:10.4f}")

# f / s^2 climbs towards its sup 1 at the left ends of the plateaus, (phi_i - phi_{i-1}) / phi_{i-1}^2
print("sup f / s^2 =", power_bound_constant(of))
print("Lipschitz constants of the truncations:", [lipschitz_constant(of, n) for n in (1, 2, 3)])

# beyond double precision the same function is evaluated on log s
ls = np.array([1e3, 1e6])
print("log f at log s = 1e3, 1e6:", f_eval(of, ls, in_log=True))

rep = osgood_divergence_report(of, 60)
print("first block integrals:", np.round(rep.contributions[:4], 6))
print("block 60 integral:", rep.contributions[-1], "partial sum:", rep.partial_sums[-1])
