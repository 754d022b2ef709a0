"""File formats: JSON documents for quantum objects, CSV tables for runs.

JSON conventions: complex numbers are two-element [real, imag] arrays and
matrices are row-major nested lists of them. Documents are discriminated
by which keys they carry:

    {"dim": d, "matrix": ...}       Hermitian observable (or density matrix,
                                    depending on which loader consumes it)
    {"bloch": [x, y, z]}            qubit observable by Bloch axis
    {"dim": d, "projectors": [...]} projective measurement
    {"dim": d, "kraus": [...]}      channel by Kraus operators

Dumping is deterministic (sorted keys, fixed indentation, trailing
newline) so identical objects produce byte-identical files.

CSV conventions: comma separators, "\\n" line endings, floats at 17
significant digits so values round-trip exactly. Distance matrices are
headerless n x n tables.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .cluster import DistanceMatrix
from .errors import ParseError
from .experiment import ExperimentResult
from .quantum import (
    BlochObservable,
    DensityMatrix,
    KrausChannel,
    ProjectorFamily,
    bloch_to_pvm,
    dephasing_channel,
    pvm_from_observable,
)

MAXIMALLY_MIXED = "maximally-mixed"

# Exactly one of these keys selects the shape of a quantum-object document.
_SHAPE_KEYS = ("projectors", "kraus", "matrix", "bloch")


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(data: Any) -> complex:
    if not isinstance(data, (list, tuple)) or len(data) != 2:
        raise ParseError(f"complex number must be a [real, imag] pair, got {data!r}")
    re, im = data
    if not isinstance(re, (int, float)) or isinstance(re, bool):
        raise ParseError(f"complex components must be numbers, got {data!r}")
    if not isinstance(im, (int, float)) or isinstance(im, bool):
        raise ParseError(f"complex components must be numbers, got {data!r}")
    return complex(float(re), float(im))


def encode_matrix(m: np.ndarray) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(x) for x in row] for row in m]


def decode_matrix(data: Any) -> np.ndarray:
    if not isinstance(data, (list, tuple)) or not data:
        raise ParseError("matrix must be a nonempty list of rows")
    rows = []
    width = None
    for row in data:
        if not isinstance(row, (list, tuple)) or not row:
            raise ParseError("matrix rows must be nonempty lists")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError("matrix rows must have equal length")
        rows.append([decode_complex(x) for x in row])
    return np.array(rows, dtype=complex)


def measurement_to_dict(measurement: ProjectorFamily) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "dim": measurement.dim,
        "projectors": [encode_matrix(p) for p in measurement.projectors],
    }
    if measurement.labels is not None:
        doc["labels"] = list(measurement.labels)
    return doc


def observable_to_dict(matrix: np.ndarray) -> dict[str, Any]:
    matrix = np.asarray(matrix, dtype=complex)
    return {"dim": int(matrix.shape[0]), "matrix": encode_matrix(matrix)}


def channel_to_dict(channel: KrausChannel) -> dict[str, Any]:
    if channel.dim_in != channel.dim_out:
        raise ParseError(
            f"only square channels serialize; got {channel.dim_in} -> {channel.dim_out}"
        )
    return {
        "dim": channel.dim_in,
        "kraus": [encode_matrix(k) for k in channel.kraus],
    }


def density_to_dict(rho: DensityMatrix) -> dict[str, Any]:
    return {"dim": rho.dim, "matrix": encode_matrix(rho.matrix)}


def bloch_to_dict(obs: BlochObservable) -> dict[str, Any]:
    return {"bloch": [float(x) for x in obs.bloch]}


def _shape_of(data: Any) -> str:
    if not isinstance(data, Mapping):
        raise ParseError(f"document must be a JSON object, got {type(data).__name__}")
    present = [key for key in _SHAPE_KEYS if key in data]
    if len(present) != 1:
        raise ParseError(
            "document must carry exactly one of 'projectors', 'kraus', 'matrix', "
            f"'bloch'; found {present or 'none'}"
        )
    return present[0]


def _check_declared_dim(data: Mapping[str, Any], actual: int) -> None:
    if "dim" not in data:
        raise ParseError("document is missing the 'dim' field")
    declared = data["dim"]
    if not isinstance(declared, int) or isinstance(declared, bool):
        raise ParseError(f"'dim' must be an integer, got {declared!r}")
    if declared != actual:
        raise ParseError(f"declared dim {declared} does not match matrices of dim {actual}")


def _matrix_list(data: Mapping[str, Any], key: str) -> list[np.ndarray]:
    value = data[key]
    if not isinstance(value, Sequence) or isinstance(value, (str, bytes)):
        raise ParseError(f"{key!r} must be a list of matrices")
    return [decode_matrix(m) for m in value]


def _decode_bloch(data: Mapping[str, Any]) -> BlochObservable:
    vector = data["bloch"]
    if not isinstance(vector, Sequence) or len(vector) != 3:
        raise ParseError("'bloch' must have exactly 3 components")
    return BlochObservable([float(x) for x in vector])


def measurement_from_dict(data: Any) -> ProjectorFamily:
    """Build a projective measurement from any measurement-like document.

    Accepts explicit projectors, a Hermitian observable matrix (measured
    in its eigenbasis), or a qubit Bloch axis.
    """
    shape = _shape_of(data)
    if shape == "projectors":
        labels = data.get("labels")
        family = ProjectorFamily(_matrix_list(data, "projectors"), labels=labels)
        _check_declared_dim(data, family.dim)
        return family
    if shape == "matrix":
        matrix = decode_matrix(data["matrix"])
        _check_declared_dim(data, int(matrix.shape[0]))
        return pvm_from_observable(matrix)
    if shape == "bloch":
        return bloch_to_pvm(_decode_bloch(data))
    raise ParseError("a channel document is not a measurement")


def channel_from_dict(data: Any) -> KrausChannel:
    """Build a channel from a channel or measurement-like document.

    A document with Kraus operators gives the channel directly;
    measurement documents are promoted to their dephasing channel.
    """
    shape = _shape_of(data)
    if shape == "kraus":
        channel = KrausChannel(_matrix_list(data, "kraus"))
        if channel.dim_in != channel.dim_out:
            raise ParseError(
                f"channel documents must be square; got {channel.dim_in} -> {channel.dim_out}"
            )
        _check_declared_dim(data, channel.dim_in)
        return channel
    return dephasing_channel(measurement_from_dict(data))


def density_from_dict(data: Any) -> DensityMatrix:
    shape = _shape_of(data)
    if shape != "matrix":
        raise ParseError(f"a density matrix document needs a 'matrix' key, found {shape!r}")
    matrix = decode_matrix(data["matrix"])
    _check_declared_dim(data, int(matrix.shape[0]))
    return DensityMatrix(matrix)


def distances_to_dict(d: DistanceMatrix) -> dict[str, Any]:
    return {"n": d.n, "entries": [[float(x) for x in row] for row in d.values]}


def distances_from_dict(data: Any) -> DistanceMatrix:
    if not isinstance(data, Mapping) or "entries" not in data:
        raise ParseError("distance matrix document needs an 'entries' key")
    entries = data["entries"]
    if not isinstance(entries, Sequence):
        raise ParseError("'entries' must be a list of rows")
    values = np.array([[float(x) for x in row] for row in entries], dtype=float)
    if values.ndim != 2:
        raise ParseError("'entries' must be a rectangular table")
    d = DistanceMatrix(values)
    declared = data.get("n")
    if declared is not None and int(declared) != d.n:
        raise ParseError(f"declared n {declared} does not match {d.n} rows")
    return d


def load_json(path: str | Path) -> Any:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p} is not valid JSON: {exc}") from exc


def dump_json(data: Any, path: str | Path | None = None) -> str:
    """Serialize deterministically; optionally write to a file."""
    text = json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_measurement(path: str | Path) -> ProjectorFamily:
    return measurement_from_dict(load_json(path))


def load_channel(path: str | Path) -> KrausChannel:
    return channel_from_dict(load_json(path))


def load_density(spec: str, dim: int) -> DensityMatrix:
    """Resolve a state argument: the literal "maximally-mixed" or a file path."""
    if spec == MAXIMALLY_MIXED:
        return DensityMatrix.maximally_mixed(dim)
    rho = density_from_dict(load_json(spec))
    if rho.dim != dim:
        raise ParseError(f"state dimension {rho.dim} does not match operand dimension {dim}")
    return rho


def format_float(x: float) -> str:
    """17 significant digits: every double round-trips exactly."""
    return format(float(x), ".17g")


def write_csv(
    path: str | Path,
    header: Sequence[str] | None,
    rows: Sequence[Sequence[Any]],
) -> None:
    lines = [] if header is None else [",".join(header)]
    for row in rows:
        cells = [format_float(x) if isinstance(x, float) else str(x) for x in row]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def write_observables_csv(
    path: str | Path,
    observables: Sequence[BlochObservable],
    truth: Sequence[int],
    labels: Sequence[int] | None = None,
) -> None:
    header = ["x", "y", "z", "truth"]
    if labels is not None:
        header.append("label")
    rows = []
    for idx, (obs, t) in enumerate(zip(observables, truth)):
        x, y, z = (float(v) for v in obs.bloch)
        row: list[Any] = [x, y, z, int(t)]
        if labels is not None:
            row.append(int(labels[idx]))
        rows.append(row)
    write_csv(path, header, rows)


def write_distances_csv(path: str | Path, d: DistanceMatrix) -> None:
    write_csv(path, None, [[float(x) for x in row] for row in d.values])


def result_to_dict(result: ExperimentResult) -> dict[str, Any]:
    return {
        "config": result.config.to_dict(),
        "labels": [int(x) for x in result.clustering.labels],
        "medoids": [int(x) for x in result.clustering.medoids],
        "cost": float(result.clustering.cost),
        "purity": float(result.purity),
        "seed": int(result.config.seed),
    }


def write_experiment(out_dir: str | Path, result: ExperimentResult) -> dict[str, Path]:
    """Write observables.csv, distances.csv, and result.json to a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "observables": out / "observables.csv",
        "distances": out / "distances.csv",
        "result": out / "result.json",
    }
    write_observables_csv(
        paths["observables"],
        result.observables,
        result.truth,
        labels=result.clustering.labels,
    )
    write_distances_csv(paths["distances"], result.distances)
    dump_json(result_to_dict(result), paths["result"])
    return paths
