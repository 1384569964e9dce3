import json
import os

import pandas as pd
import pytest

from src.utils.io import refuse_overwrite, save_frame_csv, save_json
from src.utils.paths import PROJECT_ROOT, output_dir
from src.utils.settings import get_thread_count


def test_thread_count_default(monkeypatch):
    monkeypatch.delenv("OUTFORMATION_THREADS", raising=False)
    assert get_thread_count() == 1


def test_thread_count_zero_means_all_cpus(monkeypatch):
    monkeypatch.setenv("OUTFORMATION_THREADS", "0")
    assert get_thread_count() == (os.cpu_count() or 1)


@pytest.mark.parametrize("raw", ["-1", "many"])
def test_thread_count_rejects_bad_values(monkeypatch, raw):
    monkeypatch.setenv("OUTFORMATION_THREADS", raw)
    with pytest.raises(ValueError, match="OUTFORMATION_THREADS"):
        get_thread_count()


def test_output_dir(monkeypatch, tmp_path):
    monkeypatch.delenv("OUTFORMATION_OUTPUT_DIR", raising=False)
    assert output_dir() == PROJECT_ROOT / "outputs"
    monkeypatch.setenv("OUTFORMATION_OUTPUT_DIR", str(tmp_path))
    assert output_dir("verify") == tmp_path / "verify"


def test_save_json_is_sorted_and_newline_terminated(tmp_path):
    target = tmp_path / "a" / "report.json"
    assert save_json({"b": 1, "a": 2}, target)
    text = target.read_text()
    assert text.endswith("\n")
    assert list(json.loads(text)) == ["a", "b"]


def test_save_frame_csv_drops_index(tmp_path):
    target = tmp_path / "table.csv"
    assert save_frame_csv(pd.DataFrame({"x": [1, 2]}), target)
    assert target.read_text().splitlines() == ["x", "1", "2"]


def test_refuse_overwrite(tmp_path):
    target = tmp_path / "exists.json"
    refuse_overwrite(target, force=False)
    target.write_text("{}")
    with pytest.raises(FileExistsError, match="refusing to overwrite"):
        refuse_overwrite(target, force=False)
    refuse_overwrite(target, force=True)
