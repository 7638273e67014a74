"""Per-sample arithmetic cost of the three estimators.

The closed-form counts are printed next to the forward pass as measured by
running the reference routines on operation-counting scalars.
"""
from cxtlms.complexity import ARCH_LABELS, complexity_estimate, count_forward

P, R, M, I_m = 16, 10, 2, 32
print(f"P={P} R={R} M={M} I_m={I_m}")
print(f"{'':8} {'forward':>18} {'measured fwd':>18} {'update':>20}")
for arch, label in ARCH_LABELS.items():
    est = complexity_estimate(arch, P, R, M, I_m)
    fwd, bwd = est["forward"], est["backward"]
    measured = count_forward(arch, P, R, M)
    print(f"{label:8} {str(tuple(fwd)):>18} {str(tuple(measured)):>18} {str(tuple(bwd)):>20}")

# the update cost grows linearly in the rank and the number of bins
for R in (5, 10, 20):
    print(f"R={R:>2}: CTLMS update mults {complexity_estimate('ctlms', P, R, M, I_m)['backward'].mult}")
