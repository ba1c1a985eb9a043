from dotenv import load_dotenv
import os

# Load environment variables from .env file
load_dotenv()

# Parallelism cap, must be exported before numpy is imported
ADVAC_THREADS = os.getenv("ADVAC_THREADS", "")
if ADVAC_THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, ADVAC_THREADS)

# Logging
ADVAC_LOG_DIR = os.getenv("ADVAC_LOG_DIR", "Logs")
ADVAC_LOG_LEVEL = os.getenv("ADVAC_LOG_LEVEL", "INFO").upper()

# Output
ADVAC_OUTPUT_DIR = os.getenv("ADVAC_OUTPUT_DIR", "output")

# Sentry
SENTRY_DSN = os.getenv("SENTRY_DSN", "")
SENTRY_ENVIRONMENT = os.getenv("SENTRY_ENVIRONMENT", "production")
SENTRY_TRACES_SAMPLE_RATE = float(os.getenv("SENTRY_TRACES_SAMPLE_RATE", "0.0"))

# Newton defaults
NEWTON_ABS_TOL = float(os.getenv("NEWTON_ABS_TOL", "1e-10"))
NEWTON_REL_TOL = float(os.getenv("NEWTON_REL_TOL", "1e-10"))
NEWTON_MAX_ITERS = int(os.getenv("NEWTON_MAX_ITERS", "25"))
