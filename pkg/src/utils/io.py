"""I/O utilities for simulation artifacts."""

import json
import logging
from pathlib import Path
from typing import Any

import pandas as pd

logger = logging.getLogger(__name__)


def refuse_overwrite(file_path: Path, force: bool) -> None:
    if Path(file_path).exists() and not force:
        raise FileExistsError(f"refusing to overwrite {file_path}")


def save_json(data: Any, file_path: Path) -> bool:
    """Save data as JSON with sorted keys."""
    try:
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
        return True
    except (OSError, TypeError, ValueError) as e:
        logger.error("Error saving JSON to %s: %s", file_path, e)
        return False


def save_frame_csv(df: pd.DataFrame, file_path: Path) -> bool:
    """Save a DataFrame as CSV without the index."""
    try:
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(file_path, index=False)
        logger.info("Wrote %d rows to %s", len(df), file_path)
        return True
    except OSError as e:
        logger.error("Error saving CSV to %s: %s", file_path, e)
        return False


def save_text(text: str, file_path: Path) -> bool:
    try:
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text(text)
        return True
    except OSError as e:
        logger.error("Error saving %s: %s", file_path, e)
        return False
