"""Why the per-lag model needs its maximal reduction.

The generalized mixture gives every lag its own transition matrix plus an
intercept, so probability mass can hide in lag matrices that imitate the
intercept: infinitely many parameterizations give the same transition law.
The reduction transfers each weighted lag matrix's row minima into the
intercept.  The result is the unique representative whose lag weights
measure what each lag genuinely contributes.
"""

import numpy as np

from mtdbayes.mtd import MTDgParams, build_full_tensor, mtdg_reduce, mtdg_transition

np.set_printoptions(precision=3, suppress=True)

# A lag-1 matrix that is half "real signal", half disguised intercept.
q1 = np.array(
    [
        [0.5, 0.7],
        [0.5, 0.3],
    ]
)
params = MTDgParams(weights=[0.2, 0.8], q0=[0.3, 0.7], q=[q1])
print("apparent weights:", params.weights, "(intercept, lag 1)")

reduced = mtdg_reduce(params)
print("reduced weights: ", reduced.weights)
print("reduced lag-1 matrix (pure signal remains):")
print(reduced.q[0])

print("\ntransition law is untouched:")
for hist in ([0], [1]):
    print(f"  history {hist}: {mtdg_transition(params, hist)} == {mtdg_transition(reduced, hist)}")
print("max tensor difference:", np.abs(build_full_tensor(params) - build_full_tensor(reduced)).max())

# A lag that carries no information at all loses its entire weight.
flat = np.tile(np.array([[0.6], [0.4]]), (1, 2))
lazy = MTDgParams(weights=[0.1, 0.4, 0.5], q0=[0.5, 0.5], q=[q1, flat])
reduced = mtdg_reduce(lazy)
print("\nwith an uninformative lag-2 matrix:")
print("apparent weights:", lazy.weights)
print("reduced weights: ", reduced.weights, "(lag 2 fully absorbed, flagged inactive:", ~reduced.active, ")")
