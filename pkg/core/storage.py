import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from core.config import settings
from core.exceptions import ConfigError

logger = logging.getLogger(__name__)

FIELD_SUFFIX = ".fld"
FIELD_DTYPE = "<f8"


def get_output_dir(out: Optional[str] = None) -> Path:
    """
    Resolve and create the directory that receives run artifacts.

    Args:
        out: directory requested on the command line, falls back to settings.OUTPUT_DIR

    Returns:
        Path of the existing output directory
    """
    path = Path(out or settings.OUTPUT_DIR)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: Path, payload: dict) -> Path:
    """Write a JSON artifact with stable key order"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    logger.debug("wrote %s", path)
    return path


def read_json(path: Path) -> dict:
    """Read a JSON config file, mapping IO and syntax problems to ConfigError"""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a CSV table; floats use repr so reruns compare byte for byte"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(value) for value in row])
    logger.debug("wrote %s", path)
    return path


def read_table(path: Path, columns: int = 2) -> np.ndarray:
    """
    Read a numeric CSV table (header lines starting with '#' or a non-numeric
    first row are skipped).

    Returns:
        array of shape (rows, columns)
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"table not found: {path}")
    rows: List[List[float]] = []
    with path.open("r", newline="", encoding="utf-8") as fh:
        for line in csv.reader(fh):
            if not line or line[0].strip().startswith("#"):
                continue
            try:
                rows.append([float(cell) for cell in line[:columns]])
            except ValueError:
                if rows:
                    raise ConfigError(f"non-numeric row in {path}: {line}")
    table = np.asarray(rows, dtype=np.float64)
    if table.ndim != 2 or table.shape[1] != columns or table.shape[0] < 2:
        raise ConfigError(f"table {path} must have at least two rows of {columns} numbers")
    return table


def write_field(path: Path, values: np.ndarray, dim: int, box_length: float, quantity: str, time: float) -> Path:
    """
    Dump a field snapshot: one JSON header line, then little-endian float64
    samples in row-major order.
    """
    path = Path(path)
    if path.suffix != FIELD_SUFFIX:
        path = path.with_name(path.name + FIELD_SUFFIX)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"dim": dim, "L": box_length, "N": int(values.shape[0]), "quantity": quantity, "time": time}
    with path.open("wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(values, dtype=FIELD_DTYPE).tobytes(order="C"))
    return path


def read_field(path: Path):
    """
    Load a snapshot written by write_field.

    Returns:
        (header dict, values array of shape (N,)*dim)
    """
    with Path(path).open("rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        payload = fh.read()
    shape = (header["N"],) * header["dim"]
    values = np.frombuffer(payload, dtype=FIELD_DTYPE).reshape(shape)
    return header, values.astype(np.float64)


def missing_artifacts(paths: Iterable[Path]) -> List[str]:
    """Artifacts that do not exist or are empty"""
    return [str(p) for p in paths if not Path(p).exists() or Path(p).stat().st_size == 0]


def _csv_cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")
