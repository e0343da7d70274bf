"""Numerical tolerances and limits shared by every module.

All values are plain module attributes so that callers (and tests) can
tweak them in one place.
"""

#: relative asymmetry tolerated when constructing a covariance matrix
SYMMETRY_TOL = 1e-12

#: a state is physical when its smallest symplectic eigenvalue >= 1 - PHYSICALITY_TOL
PHYSICALITY_TOL = 1e-9

#: |S Omega S^T - Omega| bound for a matrix to count as symplectic
SYMPLECTIC_TOL = 1e-10

#: closed-form vs eigen-solver agreement
CROSSCHECK_TOL = 1e-8

#: below this the PT eigenvalue gap ``u`` is treated as zero
DEGENERACY_TOL = 1e-12

#: |det gamma| below which the Schur-complement rate formula is abandoned
SINGULAR_GAMMA_TOL = 1e-12

#: squeezing factors are never allowed beyond [1/MAX_SQUEEZE, MAX_SQUEEZE]
MAX_SQUEEZE = 54.598150033144236  # e**4
