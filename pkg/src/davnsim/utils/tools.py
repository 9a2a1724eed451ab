"""CSV dialect helpers and output path handling."""

import os
from io import StringIO
from pathlib import Path
from typing import Iterable, List, Optional, Union

import pandas as pd

PathLike = Union[str, os.PathLike]

# Every file the simulator writes shares this dialect
CSV_OPTIONS = {
    "index": False,
    "float_format": "%.9g",
    "na_rep": "",
    "lineterminator": "\n",
    "encoding": "utf-8",
}

DATASET_COLUMNS = [
    "step",
    "uav_id",
    "x",
    "y",
    "z",
    "theta",
    "rho",
    "mean_wait",
    "mean_energy",
    "mean_risky_time",
    "mean_blocking_time",
    "collisions",
]

TRAJECTORY_COLUMNS = ["step", "uav_id", "x", "y", "z", "heading"]

STEP_TABLE_COLUMNS = ["step", "vehicles", "unassociated", "collisions", "expired", "unstable_uavs"]


def ensure_parent(path: PathLike) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


_UNSET = object()


def write_frame(
    frame: pd.DataFrame, path: PathLike, columns: Optional[List[str]] = None, float_format=_UNSET
) -> Path:
    """
    Write `frame` in the shared dialect, columns in the given order.
    float_format=None keeps full round-trip precision.
    """
    path = ensure_parent(path)
    if columns is not None:
        frame = frame.reindex(columns=columns)
    options = dict(CSV_OPTIONS)
    if float_format is not _UNSET:
        options["float_format"] = float_format
    frame.to_csv(path, **options)
    return path


def frame_to_text(frame: pd.DataFrame) -> str:
    return frame.to_csv(**{k: v for k, v in CSV_OPTIONS.items() if k != "encoding"})


def write_sections(sections: Iterable[pd.DataFrame], path: PathLike) -> Path:
    """Concatenate several tables into one file, separated by a blank line."""
    path = ensure_parent(path)
    text = "\n".join(frame_to_text(frame) for frame in sections)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return path


def read_sections(path: PathLike) -> List[pd.DataFrame]:
    """Inverse of write_sections."""
    with open(path, "r", encoding="utf-8") as f:
        blocks = [b for b in f.read().split("\n\n") if b.strip()]
    return [pd.read_csv(StringIO(block + "\n"), keep_default_na=False, na_values=[""]) for block in blocks]


def dataset_path(output_dir: PathLike, density: Optional[int], stem: str = "dataset") -> Path:
    """Per-density dataset file name; trace-driven runs use the bare stem."""
    name = f"{stem}_rho{density}.csv" if density is not None else f"{stem}.csv"
    return Path(output_dir) / name


def summary_path(dataset: PathLike) -> Path:
    dataset = Path(dataset)
    return dataset.with_name(f"{dataset.stem}_summary.csv")
