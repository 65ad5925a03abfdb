"""JSON input parsing and CSV/JSON output with fixed float formatting."""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .bell_operator import BellCoefficients, BellOperator, MeasurementFrame
from .errors import InvalidInputError
from .states import QuantumState
from .tensor_core import N_MAX

SIG_DIGITS = 12


def fmt(x) -> str:
    """12 significant digits, '.' decimal, no negative zero."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if x == 0.0:
        x = 0.0
    return format(x, f".{SIG_DIGITS}g")


def load_json(path) -> dict:
    """Read a JSON object; syntax errors carry ``file:line:col``."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InvalidInputError(f"{p}: cannot read ({exc.strerror})") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise InvalidInputError(f"{p}: top level must be a JSON object")
    return obj


def _field(obj: dict, name: str):
    if name not in obj:
        raise InvalidInputError(f"field '{name}': missing")
    return obj[name]


def _int_field(obj: dict, name: str, lo: int, hi: int) -> int:
    v = _field(obj, name)
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidInputError(f"field '{name}': expected an integer, got {v!r}")
    if not lo <= v <= hi:
        raise InvalidInputError(f"field '{name}': {v} outside {lo}..{hi}")
    return v


def _real_list(obj: dict, name: str, length: int) -> tuple[float, ...]:
    v = _field(obj, name)
    if not isinstance(v, list) or len(v) != length:
        raise InvalidInputError(f"field '{name}': expected a list of {length} numbers")
    for i, x in enumerate(v):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise InvalidInputError(f"field '{name}[{i}]': expected a number, got {x!r}")
    return tuple(float(x) for x in v)


def _complex(entry, where: str) -> complex:
    if (
        not isinstance(entry, list)
        or len(entry) != 2
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in entry)
    ):
        raise InvalidInputError(f"field '{where}': expected [re, im], got {entry!r}")
    return complex(entry[0], entry[1])


def parse_operator_spec(obj: dict, n_max: int = N_MAX) -> BellOperator:
    """``{"n", "beta": {bits: value}, "alpha": [...], "alpha_prime": [...]}``.

    Bit strings list qubit 1 first.  An optional ``"axes"`` entry of shape
    ``(n, 2, 3)`` sets each qubit's measurement plane.
    """
    n = _int_field(obj, "n", 1, min(n_max, N_MAX))
    table = _field(obj, "beta")
    if not isinstance(table, dict) or not table:
        raise InvalidInputError("field 'beta': expected a non-empty object of bitstring -> number")
    for key, value in table.items():
        if len(key) != n or set(key) - {"0", "1"}:
            raise InvalidInputError(f"field 'beta.{key}': key must be a {n}-character bitstring")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidInputError(f"field 'beta.{key}': expected a number, got {value!r}")
    coefficients = BellCoefficients.from_bitstrings(table, n)
    alpha = _real_list(obj, "alpha", n)
    alpha_prime = _real_list(obj, "alpha_prime", n)
    axes = None
    if "axes" in obj:
        axes = np.asarray(obj["axes"], dtype=float) if _is_numeric_nested(obj["axes"]) else None
        if axes is None or axes.shape != (n, 2, 3):
            raise InvalidInputError(f"field 'axes': expected shape ({n}, 2, 3)")
    try:
        frame = MeasurementFrame(alpha, alpha_prime, axes)
    except InvalidInputError as exc:
        raise InvalidInputError(f"field 'axes': {exc}") from exc
    return BellOperator(coefficients, frame)


def _is_numeric_nested(v) -> bool:
    if isinstance(v, list):
        return all(_is_numeric_nested(x) for x in v)
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_state_spec(obj: dict, n_max: int = N_MAX) -> QuantumState:
    """``{"n", "amplitudes": [[re, im], ...]}`` or ``{"n", "rho": [[[re, im], ...], ...]}``.

    Input off normalization by more than 1e-6 is rescaled with a warning.
    """
    n = _int_field(obj, "n", 1, min(n_max, N_MAX))
    dim = 1 << n
    if ("amplitudes" in obj) == ("rho" in obj):
        raise InvalidInputError("give exactly one of 'amplitudes' or 'rho'")
    if "amplitudes" in obj:
        amps = obj["amplitudes"]
        if not isinstance(amps, list) or len(amps) != dim:
            raise InvalidInputError(f"field 'amplitudes': expected {dim} entries for n={n}")
        data = np.array([_complex(a, f"amplitudes[{i}]") for i, a in enumerate(amps)])
    else:
        rho = obj["rho"]
        if not isinstance(rho, list) or len(rho) != dim:
            raise InvalidInputError(f"field 'rho': expected {dim} rows for n={n}")
        rows = []
        for i, row in enumerate(rho):
            if not isinstance(row, list) or len(row) != dim:
                raise InvalidInputError(f"field 'rho[{i}]': expected {dim} entries")
            rows.append([_complex(e, f"rho[{i}][{j}]") for j, e in enumerate(row)])
        data = np.array(rows)
    return QuantumState.normalized(data)


def csv_text(header, rows, footer=()) -> str:
    """CSV with fixed float formatting; ``footer`` lines are emitted as ``# ...`` comments."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        # round-trip through the fixed format so JSON and CSV agree
        return float(fmt(v))
    return v


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def emit(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
