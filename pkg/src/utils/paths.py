"""Path utilities for the outformation toolkit."""

from pathlib import Path
from typing import Optional

from .settings import output_root

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent.parent


def output_dir(name: Optional[str] = None) -> Path:
    """Default output directory, optionally a named subdirectory of it."""
    root = output_root(PROJECT_ROOT / "outputs")
    return root / name if name else root
