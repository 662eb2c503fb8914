"""
Run-time defaults, read from the environment (or a ``.env``/``settings.ini`` file) with
python-decouple. Library functions use these as keyword defaults; the CLI flags override them.
"""

from decouple import config

# Worker threads for quadrature blocks and scenario-level parallelism
THREADS = config("EQUILOC_THREADS", default=1, cast=int)

# Quadrature nodes per axis
RESOLUTION = config("EQUILOC_RESOLUTION", default=128, cast=int)

# Distance kept from a chart's excluded set when sampling
CHART_MARGIN = config("EQUILOC_CHART_MARGIN", default=1e-6, cast=float)

# Distance kept from non-periodic box edges by random residual samples
SAMPLE_MARGIN = config("EQUILOC_SAMPLE_MARGIN", default=0.1, cast=float)

# Pointwise identities (Killing, closedness, Bianchi, ...)
RESIDUAL_TOL = config("EQUILOC_RESIDUAL_TOL", default=1e-9, cast=float)

# Relative tolerance of integral equalities
INTEGRAL_TOL = config("EQUILOC_INTEGRAL_TOL", default=1e-6, cast=float)

SAMPLE_POINTS = config("EQUILOC_SAMPLE_POINTS", default=50, cast=int)
SEED = config("EQUILOC_SEED", default=20240917, cast=int)

# Quadrature nodes evaluated per block (bounds peak memory of jet products)
CHUNK_SIZE = config("EQUILOC_CHUNK_SIZE", default=2048, cast=int)

# Lemma 4 default s-values
S_VALUES = (0.0, 0.5, 1.0, 2.0)
