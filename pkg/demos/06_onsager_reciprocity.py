"""
Time-reversal parity of couplings
=================================

Reversible couplings carry the parity structure of the variables: blocks
between equal-parity variables are odd in the state and the assembled matrix
obeys the reciprocal relation.  Adding a symmetric dissipative matrix keeps
that relation only if it respects the parities.
"""
import numpy as np

from hamcouple import brackets as br
from hamcouple import ocrr
from hamcouple.grid import Grid3
from hamcouple.state import random_state

x = random_state(br.mhd().schema, Grid3((4, 4, 1)), 0)
print(ocrr.check_bivector_parity("mhd", x).text())

# a diagonal friction-like matrix is compatible with every parity
n = x.to_vector().size
print()
print(ocrr.check_combined("mhd", x, np.eye(n)).text().splitlines()[-1])

# a constant coupling between momentum (odd) and density (even) is not
print(ocrr.check_combined("mhd", x, ocrr.parity_violating_matrix(x)).text())
