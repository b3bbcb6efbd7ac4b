r"""
An explicit singular solution
=============================

The profile :math:`w = (-4 \log r)^{1/\mu}` satisfies a closed-form
biharmonic identity.  Applying the discrete operator twice and comparing
with it gives a clean refinement study.  Fourth differences amplify
round-off like :math:`\epsilon |w| / h^4`, so double precision stalls
where extended precision keeps converging.
"""
from polysing import build_grid, log_example_coefficients, verify_log_example

print("coefficients (b1, b2, b3) for mu = 2:", log_example_coefficients(2.0))

for precision in ("double", "extended"):
    prev = None
    for n in (256, 512, 1024, 2048):
        res = verify_log_example(2.0, build_grid(4, 0.1, n, eps=1e-3), precision)
        ratio = "" if prev is None else f"  ratio {prev / res.max_rel_residual:.2f}"
        print(f"{precision:8s} n = {n:4d}: residual {res.max_rel_residual:.3e}{ratio}")
        prev = res.max_rel_residual
