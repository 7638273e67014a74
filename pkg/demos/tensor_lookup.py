"""A low-rank lookup table indexed by the quadrature parts of a complex sample.

Each input sample is split into its real and imaginary parts, both parts are
binned, and the resulting index pair selects one entry of a 32 x 32 table
stored as a rank-R CPD. The same entry can be read straight from the factors
or from the materialized dense array.
"""
import numpy as np

from cxtlms import CpdTensor, Discretizer, c2r_split, cpd_eval, dense_materialize, hadamard_excluding

rng = np.random.default_rng(0)
disc = Discretizer(delta_x=0.25, n_bins=32)
table = CpdTensor.random((32, 32), rank=4, rng=rng, complex_valued=True)

x = 0.8 - 1.3j
idx = disc(c2r_split(x))
print(f"sample {x} -> bins {idx.tolist()}")

entry = cpd_eval(table, idx)
dense = dense_materialize(table)
print(f"entry from factors: {entry:.6f}")
print(f"entry from dense  : {dense[tuple(idx - 1)]:.6f}")

# the entry is linear in each factor row: <A_1[i_1], product of the other rows>
row = table.factors[0][idx[0] - 1]
print(f"via Hadamard rows : {np.sum(row * hadamard_excluding(table, idx, 1)):.6f}")

stored = table.data.size
print(f"storage: {stored} factor entries instead of {dense.size} dense entries")
