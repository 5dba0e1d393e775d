"""Loading referenced time series and writing schedules.

The portable container format is CSV: a header row naming one column per
dataset path (without the leading slash) and exactly N data rows.  HDF5
containers are supported through the same reference interface when h5py is
installed.  A reference naming a container in the one format that is given
in the other (e.g. a ``.h5`` reference next to a ``.csv`` file with the same
stem) resolves to the existing file, so scenarios can ship either way.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import InputError, LengthMismatch, NotFound
from .schedule import Schedule
from .xmlio import SeriesRef

_ALT_SUFFIX = {".h5": ".csv", ".hdf5": ".csv", ".csv": ".h5"}


def _resolve(path: Path) -> Path:
    if path.exists():
        return path
    alt_suffix = _ALT_SUFFIX.get(path.suffix.lower())
    if alt_suffix:
        alt = path.with_suffix(alt_suffix)
        if alt.exists():
            return alt
    raise NotFound(f"time-series container not found: {path}", str(path))


def _load_csv_column(path: Path, column: str):
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError("empty CSV container", str(path)) from None
        header = [h.strip() for h in header]
        if column not in header:
            raise NotFound(f"no column {column!r} in {path.name} "
                           f"(available: {', '.join(header)})", str(path))
        idx = header.index(column)
        values = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values.append(float(row[idx]))
            except (IndexError, ValueError) as exc:
                raise InputError(f"bad value in column {column!r} at line {row_no}",
                                 str(path)) from exc
    return values


def _load_hdf5_dataset(path: Path, dataset: str):
    try:
        import h5py
    except ImportError as exc:
        raise InputError(
            f"{path.name} is an HDF5 container but h5py is not installed", str(path)
        ) from exc
    with h5py.File(path, "r") as fh:
        if dataset not in fh:
            raise NotFound(f"no dataset {dataset!r} in {path.name}", str(path))
        data = fh[dataset][()]
    return [float(v) for v in list(data.reshape(-1))]


def load_timeseries(ref: SeriesRef, n_units: int, base_dir=".") -> list:
    """Resolve a series reference to exactly n_units floats in target units."""
    path = _resolve(Path(base_dir) / ref.file_name)
    if path.suffix.lower() == ".csv":
        column = ref.data_set_path.lstrip("/")
        values = _load_csv_column(path, column)
    else:
        values = _load_hdf5_dataset(path, ref.data_set_path)
    if len(values) != n_units:
        raise LengthMismatch(len(values), n_units, f"{path}:{ref.data_set_path}")
    return [v * ref.scale for v in values]


# ---------------------------------------------------------------------------
# schedule output


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _timestamps(schedule: Schedule):
    grid = schedule.grid
    if grid.start:
        import datetime as dt

        t0 = dt.datetime.fromisoformat(grid.start)
        step = dt.timedelta(hours=grid.hours_per_unit)
        return [(t0 + i * step).isoformat() for i in range(grid.n_units)]
    return [str(i + 1) for i in range(grid.n_units)]


def write_schedule(schedule: Schedule, out_dir) -> dict:
    """Write schedule.csv plus a metadata.json sidecar; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "status": schedule.status,
        "objective": schedule.objective,
        "nbsOfTimeUnits": schedule.grid.n_units,
        "hoursPerTimeUnit": schedule.grid.hours_per_unit,
        "start": schedule.grid.start,
        "stats": schedule.stats,
    }
    meta_path = out / "metadata.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written = {"metadata": str(meta_path)}
    if not schedule.series:
        return written

    csv_path = out / "schedule.csv"
    names = list(schedule.series)
    stamps = _timestamps(schedule)
    lines = [",".join(["timestamp"] + names)]
    for i in range(schedule.grid.n_units):
        row = [stamps[i]] + [_fmt(schedule.series[name][i]) for name in names]
        lines.append(",".join(row))
    csv_path.write_text("\n".join(lines) + "\n")
    written["schedule"] = str(csv_path)
    return written
