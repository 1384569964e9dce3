"""Environment-driven settings, read from the process environment and an optional .env file."""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

THREADS_VAR = "OUTFORMATION_THREADS"
OUTPUT_DIR_VAR = "OUTFORMATION_OUTPUT_DIR"


def get_thread_count(default: int = 1) -> int:
    """Worker processes for replications; 0 means one per CPU."""
    raw = os.getenv(THREADS_VAR)
    if raw is None or raw.strip() == "":
        return default
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_VAR} must be an integer, got {raw!r}") from None
    if threads < 0:
        raise ValueError(f"{THREADS_VAR} must be non-negative")
    return threads or (os.cpu_count() or 1)


def output_root(default: Path) -> Path:
    raw = os.getenv(OUTPUT_DIR_VAR)
    return Path(raw) if raw else default
