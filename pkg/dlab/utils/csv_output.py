# dlab/utils/csv_output.py

from pathlib import Path
from typing import Any, Iterable, List, Sequence
import csv
import logging
import os
import tempfile

import numpy as np

logger = logging.getLogger("dlab")


def format_cell(value: Any) -> str:
    """Render one CSV cell; floats use the shortest round-trip form"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return " ".join(format_cell(item) for item in value)
    return str(value)


def write_csv_atomic(
    path: str,
    preamble: Sequence[str],
    header: Sequence[str],
    rows: Iterable[Sequence[Any]]
) -> int:
    """
    Write a CSV with a `#` preamble through a temp file and rename

    Returns:
        Number of data rows written
    """
    from dlab.core.exceptions import OutputWriteError

    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    tmp_name = None
    count = 0

    try:
        with tempfile.NamedTemporaryFile(
            mode="w",
            encoding="utf-8",
            newline="",
            dir=directory,
            prefix=f".{target.name}.",
            suffix=".tmp",
            delete=False
        ) as handle:
            tmp_name = handle.name
            for line in preamble:
                handle.write(f"# {line}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_cell(cell) for cell in row])
                count += 1
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, target)
    except OSError as e:
        _discard(tmp_name)
        logger.error(f"Writing {path} failed: {str(e)}")
        raise OutputWriteError(f"Cannot write {path}: {str(e)}")
    except BaseException:
        _discard(tmp_name)
        raise

    logger.info(f"Wrote {count} rows to {path}")
    return count


def _discard(tmp_name) -> None:
    if tmp_name and os.path.exists(tmp_name):
        os.unlink(tmp_name)


def read_csv_rows(path: str) -> List[List[str]]:
    """Data rows of a CSV written by write_csv_atomic, header first"""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.reader(lines))
