"""
CSV / JSON rendering of result records.

CSV floats are written with 17 significant digits so that reading a file
back reproduces every value exactly.
"""
import io
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from errors import DomainError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
FLOAT_FORMAT = "%.17g"


def flatten_pairs(record: Dict, key: str = "eigenvalues") -> Dict:
    """Replace a list of [re, im] pairs by columns key0_re, key0_im, ..."""
    if key not in record:
        return dict(record)
    flat = {k: v for k, v in record.items() if k != key}
    for i, (re, im) in enumerate(record[key]):
        flat[f"{key}{i}_re"] = re
        flat[f"{key}{i}_im"] = im
    return flat


def render(records: Sequence[Dict], fmt: str, columns: Optional[List[str]] = None) -> str:
    """Records as CSV or JSON text"""
    if fmt == "json":
        return json.dumps(list(records), indent=2) + "\n"
    if fmt == "csv":
        rows = [flatten_pairs(r) for r in records]
        df = pd.DataFrame(rows, columns=columns)
        buffer = io.StringIO()
        df.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return buffer.getvalue()
    raise DomainError(f"Unknown output format {fmt!r}; expected one of {FORMATS}")


def write_records(records: Sequence[Dict], fmt: str, output: Optional[str] = None,
                  columns: Optional[List[str]] = None) -> str:
    """
    Render records and write them to `output` (stdout when None).

    Returns:
        The rendered text
    """
    text = render(records, fmt, columns)
    if output:
        Path(output).write_text(text)
        logger.info(f"Wrote {len(records)} records to {output}")
    else:
        print(text, end="")
    return text


def read_records(path: str, fmt: Optional[str] = None) -> List[Dict]:
    """Parse a file written by write_records; format inferred from the suffix when not given"""
    fmt = fmt or Path(path).suffix.lstrip(".").lower()
    if fmt == "json":
        return json.loads(Path(path).read_text())
    if fmt == "csv":
        return pd.read_csv(path, float_precision="round_trip").to_dict("records")
    raise DomainError(f"Cannot infer a record format for {path!r}")
