"""
Serializer - CSV, JSON and msgpack output with reproducibility manifests
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import msgpack
import numpy as np

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    """Full double precision, round-trip exact"""
    return f"{float(value):.17g}"


def _to_builtin(data: Any) -> Any:
    """Convert numpy scalars/arrays nested in data to plain Python"""
    if isinstance(data, dict):
        return {str(k): _to_builtin(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_to_builtin(v) for v in data]
    if isinstance(data, np.ndarray):
        return [_to_builtin(v) for v in data.tolist()]
    if isinstance(data, np.integer):
        return int(data)
    if isinstance(data, np.floating):
        return float(data)
    if isinstance(data, float) and not math.isfinite(data):
        return str(data)
    return data


class Serializer:
    """Serialize and deserialize data"""

    @staticmethod
    def to_json(data: Any) -> str:
        """Serialize to JSON"""
        return json.dumps(_to_builtin(data), indent=2, sort_keys=True, default=str)

    @staticmethod
    def from_json(json_str: str) -> Any:
        """Deserialize from JSON"""
        return json.loads(json_str)

    @staticmethod
    def to_bytes(data: Any) -> bytes:
        """Serialize to bytes using msgpack"""
        return msgpack.packb(_to_builtin(data), use_bin_type=True)

    @staticmethod
    def from_bytes(data: bytes) -> Any:
        """Deserialize from bytes"""
        return msgpack.unpackb(data, raw=False, strict_map_key=False)


def write_json(path: PathLike, payload: Any) -> Path:
    """Write a JSON document, creating parent directories"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8") as handle:
        handle.write(Serializer.to_json(payload))
        handle.write("\n")
    return target


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows with floats at 17 significant digits"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([
                format_float(v) if isinstance(v, (float, np.floating)) else v
                for v in row
            ])
    return target


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    """Read a CSV file written by write_csv"""
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def write_msgpack(path: PathLike, payload: Any) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(Serializer.to_bytes(payload))
    return target


def read_msgpack(path: PathLike) -> Any:
    return Serializer.from_bytes(Path(path).read_bytes())


def build_manifest(command: str, parameters: Dict[str, Any], files: List[str],
                   seed: Optional[int] = None) -> Dict[str, Any]:
    """Everything needed to reproduce a CLI output directory"""
    from pycascade import __version__

    return {
        "schema_version": 1,
        "command": command,
        "parameters": _to_builtin(parameters),
        "seed": seed,
        "version": __version__,
        "files": sorted(files),
    }
