"""
Utility Functions Module
========================

Handles:
- Export functions (CSV, JSON, SVG)
- Artifact bookkeeping with content digests (manifest.json)
- Helper functions
"""

import hashlib
import io
import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

# Fixed salt and no date so that SVG output is reproducible
matplotlib.rcParams['svg.hashsalt'] = 'blowup-lab'
SVG_METADATA = {'Date': None}


def to_serializable(value):
    """
    Convert numpy scalars/arrays, tuples and dataclass-style objects into
    plain JSON values; non-finite floats become None
    """
    if hasattr(value, 'to_dict'):
        return to_serializable(value.to_dict())
    if isinstance(value, dict):
        return {str(k): to_serializable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_serializable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_serializable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def export_to_json(data: Dict) -> str:
    """
    Export a report to JSON format

    Args:
        data: Report dict (or object with to_dict)

    Returns:
        JSON string with lexicographically sorted keys
    """
    return json.dumps(to_serializable(data), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def export_to_csv(table: Union[pd.DataFrame, List[Dict]]) -> str:
    """
    Export a table to CSV format

    Floats are written with the shortest representation that round-trips.

    Args:
        table: DataFrame or list of row dicts

    Returns:
        CSV string
    """
    df = table if isinstance(table, pd.DataFrame) else pd.DataFrame(table)

    # Use StringIO for CSV export
    output = io.StringIO()
    df.to_csv(output, index=False, lineterminator='\n')
    return output.getvalue()


def digest(content: bytes) -> str:
    return hashlib.sha256(content).hexdigest()


class ArtifactWriter:
    """Writes report files into one output directory and records their digests"""

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.files: Dict[str, str] = {}

    def _write(self, name: str, content: bytes) -> Path:
        path = self.output_dir / name
        with open(path, 'wb') as f:
            f.write(content)
        self.files[name] = digest(content)
        return path

    def write_json(self, name: str, data: Dict) -> Path:
        return self._write(name, export_to_json(data).encode('utf-8'))

    def write_csv(self, name: str, table: Union[pd.DataFrame, List[Dict]]) -> Path:
        return self._write(name, export_to_csv(table).encode('utf-8'))

    def write_svg(self, name: str, fig) -> Path:
        buffer = io.BytesIO()
        fig.savefig(buffer, format='svg', metadata=SVG_METADATA)
        plt.close(fig)
        return self._write(name, buffer.getvalue())

    def write_manifest(self, extra: Optional[Dict] = None) -> Path:
        """Write manifest.json listing every file emitted so far with its sha256"""
        manifest = {
            'files': [{'name': name, 'sha256': sha} for name, sha in sorted(self.files.items())],
        }
        if extra:
            manifest.update(extra)
        content = export_to_json(manifest).encode('utf-8')
        path = self.output_dir / 'manifest.json'
        with open(path, 'wb') as f:
            f.write(content)
        return path


def new_figure(width: float = 6.4, height: float = 4.2, ncols: int = 1):
    """Figure and axes on the non-interactive backend (an array of axes when ncols > 1)"""
    fig, ax = plt.subplots(1, ncols, figsize=(width, height))
    return fig, ax


def geometric_grid(lo: float, hi: float, per_decade: int = 10) -> np.ndarray:
    """Geometric grid from lo to hi, endpoints included"""
    count = max(int(math.ceil(per_decade * math.log10(hi / lo))) + 1, 2)
    return np.geomspace(lo, hi, count)
