from __future__ import annotations

import os
import tempfile
from pathlib import Path


def write_text_atomic(path: Path, content: str) -> None:
    """Write text to `path` atomically using a same-directory temp file."""
    temp_path: Path | None = None
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with tempfile.NamedTemporaryFile(
            mode="w",
            encoding="utf-8",
            dir=path.parent,
            prefix=f".{path.name}.",
            delete=False,
            newline="\n",
        ) as temp_file:
            temp_file.write(content)
            temp_file.flush()
            os.fsync(temp_file.fileno())
            temp_path = Path(temp_file.name)
        temp_path.replace(path)
    finally:
        if temp_path is not None:
            temp_path.unlink(missing_ok=True)


def write_result_files(path: Path, structured: str, table_csv: str | None = None) -> list[Path]:
    """Write the structured result and, when given, a CSV table next to it.

    The CSV lands at `path` with a `.csv` suffix. Returns the written paths.
    """
    write_text_atomic(path, structured)
    written = [path]
    if table_csv is not None:
        csv_path = path.with_suffix(".csv")
        if csv_path == path:
            csv_path = path.with_name(path.name + ".csv")
        write_text_atomic(csv_path, table_csv)
        written.append(csv_path)
    return written
