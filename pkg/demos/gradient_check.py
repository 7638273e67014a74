"""Compare the tensor updates against finite differences of the cost.

For every architecture a batch of small random states is drawn, one update
is applied, and the applied factor increment (divided by the step size) is
compared to the steepest-descent direction obtained by central differences.
Real factors use the ordinary gradient; the complex tensor uses the
conjugate (Wirtinger) gradient with its factor of two.
"""
import numpy as np

from cxtlms.oracle import GRADCHECK_ARCHS, check_architecture, implemented_direction, oracle_direction
from cxtlms.oracle import random_small_state

est, y = random_small_state("ctlms", np.random.default_rng(3))
impl = implemented_direction(est, y)[0, 0]
fd = oracle_direction(est, y, path=0, m_prime=1)
print("one complex state, mode 1, first nonzero rows:")
rows = np.flatnonzero(np.abs(fd).sum(axis=1))[:2]
for r in rows:
    print(f"  implemented {np.round(impl[r], 6)}")
    print(f"  finite diff {np.round(fd[r], 6)}")

for arch in GRADCHECK_ARCHS:
    rep = check_architecture(arch, n_states=50, seed=0)
    print(f"{arch:<7} worst relative error {rep.max_rel_error:.2e} ({rep.n_checks} comparisons)")
