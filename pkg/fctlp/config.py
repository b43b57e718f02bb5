import logging
import os
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Load environment variables from .env file
load_dotenv()


def _int_setting(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"[CONFIG] Invalid integer for {name}={raw!r}, using {default}")
        return default


# Root directory for run artifacts when --out is not given
OUTPUT_DIR = os.getenv("FCT_OUTPUT_DIR", "runs")

LOG_LEVEL = os.getenv("FCT_LOG_LEVEL", "INFO").upper()

# Worker pool size for bench runs
WORKERS = max(1, _int_setting("FCT_WORKERS", 1))

# Simplex limits
LP_MAX_PIVOTS = max(1, _int_setting("FCT_LP_MAX_PIVOTS", 20000))
LP_REFACTOR_EVERY = max(1, _int_setting("FCT_LP_REFACTOR_EVERY", 50))

# When false a CFL violation is only logged
STRICT_CFL = os.getenv("FCT_STRICT_CFL", "true").lower() == "true"
