"""Physical constants (CODATA 2018), SI units."""

# Reduced Planck constant, J*s
HBAR = 1.054571817e-34

# Boltzmann constant, J/K
K_B = 1.380649e-23
