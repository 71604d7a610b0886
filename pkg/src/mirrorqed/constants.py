"""Physical constants, CODATA 2018, hard-coded.

Pinned rather than imported from scipy.constants so that emitted numbers
do not drift when the environment ships a newer CODATA adjustment.
"""

ELEMENTARY_CHARGE = 1.602176634e-19  # C (exact)
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
HBAR = 1.054571817e-34  # J s
SPEED_OF_LIGHT = 299792458.0  # m/s (exact)
