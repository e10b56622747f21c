# Default truncation order of the moment problem (number of exponentials on each side)
DEFAULT_TRUNCATION = 32

# Fattorini criterion: |value| <= tol counts as a failure
DEFAULT_FATTORINI_TOL = 1e-6

# lambda_0 is degenerate when |lambda_0 - lambda_k| < DEGENERACY_RTOL * (1 + |lambda_0|)
DEGENERACY_RTOL = 1e-8

# Below this |lambda * x| the closed form of w_lambda loses digits, use the series
SERIES_THRESHOLD = 1e-6

# Same idea for the exponential integrals of the Gram row/column 0
GRAM_SERIES_THRESHOLD = 1e-8

# The closed-form Gram solve is refined against the quadrature system down to this
# relative defect, in at most GRAM_REFINEMENT_STEPS passes
GRAM_REFINEMENT_RTOL = 1e-12
GRAM_REFINEMENT_STEPS = 10

# Moment targets are refused when some |B* phi_k| falls below this
OBSERVATION_TOL = 1e-8

# Relative threshold on sigma_min(Id - K), scaled by (1 + ||K||_2)
INVERT_RTOL = 1e-6

# Safety factor in the Cauchy-Schwarz tail bound that fixes K_max
FATTORINI_TAIL_FACTOR = 0.5

# Tabulated kernels whose finite differences exceed this are reported as rough
ROUGHNESS_WARNING_LEVEL = 1e6

# Every float written to CSV uses this format (17 significant digits)
CSV_FLOAT_FORMAT = "%.17g"

# Runs longer than this many domain crossings are reported (round-off grows with M)
LONG_HORIZON_CROSSINGS = 20
