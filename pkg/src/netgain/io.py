"""Text formats: matrix files and network JSON.

Matrix files look like::

    # optional comment lines
    2 2
    0.5 -0.5
    0.25 1e-3

Floats are written with ``repr`` (shortest round-trip form), so
``parse_matrix(format_matrix(A))`` reproduces ``A`` bit for bit.
"""

import json
import math
from pathlib import Path

import numpy as np

from .errors import FormatError

__all__ = [
    "format_matrix",
    "parse_matrix",
    "read_matrix",
    "write_matrix",
    "parse_network",
    "read_network",
    "network_to_json",
    "parse_rank_one_perturbation",
    "parse_systems",
    "read_systems",
]


def _parse_float(token, line, column):
    try:
        value = float(token)
    except ValueError:
        raise FormatError(f"cannot parse {token!r} as a number", line, column) from None
    if not math.isfinite(value):
        raise FormatError(f"non-finite entry {token!r}", line, column)
    return value


def _tokens(text):
    """Yield ``(line_no, [(column, token), ...])`` for non-comment, non-blank lines."""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        row = []
        col = 0
        for tok in raw.split():
            col = raw.index(tok, col)
            row.append((col + 1, tok))
            col += len(tok)
        yield line_no, row


def parse_matrix(text):
    lines = list(_tokens(text))
    if not lines:
        raise FormatError("empty matrix file", 1)
    line_no, header = lines[0]
    if len(header) != 2:
        raise FormatError("header must be 'rows cols'", line_no, 1)
    dims = []
    for col, tok in header:
        try:
            dims.append(int(tok))
        except ValueError:
            raise FormatError(f"bad dimension {tok!r}", line_no, col) from None
        if dims[-1] <= 0:
            raise FormatError(f"dimension must be positive, got {tok}", line_no, col)
    rows, cols = dims
    body = lines[1:]
    if len(body) != rows:
        where = body[-1][0] + 1 if body else line_no + 1
        raise FormatError(f"expected {rows} rows, found {len(body)}", where)
    out = np.empty((rows, cols))
    for i, (ln, row) in enumerate(body):
        if len(row) != cols:
            column = row[cols][0] if len(row) > cols else (row[-1][0] + len(row[-1][1]) if row else 1)
            raise FormatError(f"expected {cols} entries, found {len(row)}", ln, column)
        for j, (col, tok) in enumerate(row):
            out[i, j] = _parse_float(tok, ln, col)
    return out


def format_matrix(A, comment=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    parts = []
    if comment:
        parts.extend("# " + c for c in comment.splitlines())
    parts.append(f"{A.shape[0]} {A.shape[1]}")
    parts.extend(" ".join(repr(float(x)) for x in row) for row in A)
    return "\n".join(parts) + "\n"


def read_matrix(path):
    return parse_matrix(Path(path).read_text())


def write_matrix(path, A, comment=None):
    Path(path).write_text(format_matrix(A, comment))


_NETWORK_KEYS = {"subsystems", "A", "rank_one"}
_SUBSYSTEM_KEYS = {"gamma", "beta", "m"}
_RANK_ONE_KEYS = {"s", "k", "g"}


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise FormatError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise FormatError(f"unknown key {unknown[0]!r} in {where}")


def _number_list(value, where):
    if not isinstance(value, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        raise FormatError(f"{where} must be a list of numbers")
    return [float(x) for x in value]


def parse_network(text):
    """Parse network JSON into a :class:`~netgain.smallgain.NetworkSpec`."""
    from .smallgain import NetworkSpec, RankOneInterconnection, SubsystemGain

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, exc.colno) from None
    _reject_unknown(data, _NETWORK_KEYS, "network")
    for key in ("subsystems", "A"):
        if key not in data:
            raise FormatError(f"missing key {key!r} in network")
    subs = data["subsystems"]
    if not isinstance(subs, list) or not subs:
        raise FormatError("'subsystems' must be a non-empty list")
    gains = []
    for i, entry in enumerate(subs):
        where = f"subsystems[{i}]"
        _reject_unknown(entry, _SUBSYSTEM_KEYS, where)
        if "gamma" not in entry:
            raise FormatError(f"missing key 'gamma' in {where}")
        m = entry.get("m", 1)
        if not isinstance(m, int) or isinstance(m, bool):
            raise FormatError(f"'m' in {where} must be an integer")
        gains.append(SubsystemGain(float(entry["gamma"]), float(entry.get("beta", 0.0)), m))
    A = data["A"]
    if not isinstance(A, list) or not A:
        raise FormatError("'A' must be a non-empty list of rows")
    rows = [_number_list(r, f"A[{i}]") for i, r in enumerate(A)]
    if len({len(r) for r in rows}) != 1:
        raise FormatError("rows of 'A' have different lengths")
    rank_one = None
    if "rank_one" in data:
        r1 = data["rank_one"]
        _reject_unknown(r1, _RANK_ONE_KEYS, "rank_one")
        for key in ("s", "k", "g"):
            if key not in r1:
                raise FormatError(f"missing key {key!r} in rank_one")
        rank_one = RankOneInterconnection(
            *(np.array(_number_list(r1[key], f"rank_one.{key}")) for key in ("s", "k", "g"))
        )
    return NetworkSpec(tuple(gains), np.array(rows), rank_one)


def read_network(path):
    return parse_network(Path(path).read_text())


def network_to_json(net):
    data = {
        "subsystems": [{"gamma": g.gamma, "beta": g.beta, "m": g.m} for g in net.subsystems],
        "A": net.A.tolist(),
    }
    if net.rank_one is not None:
        data["rank_one"] = {
            "s": net.rank_one.s.tolist(),
            "k": net.rank_one.k.tolist(),
            "g": net.rank_one.g.tolist(),
        }
    return json.dumps(data, indent=2)


_SYSTEM_KEYS = {"F", "G", "H", "J"}


def _parse_system(obj, where):
    from .netsim import LtiSystem

    _reject_unknown(obj, _SYSTEM_KEYS, where)
    if "J" not in obj:
        raise FormatError(f"missing key 'J' in {where}")
    J = np.array([_number_list(r, f"{where}.J") for r in obj["J"]])
    if not any(k in obj for k in ("F", "G", "H")):
        return LtiSystem.static(J)
    for key in ("F", "G", "H"):
        if key not in obj:
            raise FormatError(f"missing key {key!r} in {where}")
    mats = [np.array([_number_list(r, f"{where}.{k}") for r in obj[k]], dtype=float)
            for k in ("F", "G", "H")]
    return LtiSystem(*mats, J)


def parse_systems(text):
    """Parse ``{"systems": [{"F":..,"G":..,"H":..,"J":..}, ...]}`` or one system object.

    A system with only ``J`` is static.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, exc.colno) from None
    if isinstance(data, dict) and "systems" in data:
        _reject_unknown(data, {"systems"}, "realizations")
        if not isinstance(data["systems"], list) or not data["systems"]:
            raise FormatError("'systems' must be a non-empty list")
        return [_parse_system(s, f"systems[{i}]") for i, s in enumerate(data["systems"])]
    return [_parse_system(data, "system")]


def read_systems(path):
    return parse_systems(Path(path).read_text())


_RANK_ONE_PERTURBATION_KEYS = {"delta", "u", "v"}


def parse_rank_one_perturbation(text):
    from .diagstab import RankOnePerturbation

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, exc.colno) from None
    _reject_unknown(data, _RANK_ONE_PERTURBATION_KEYS, "rank-one perturbation")
    for key in ("delta", "u", "v"):
        if key not in data:
            raise FormatError(f"missing key {key!r} in rank-one perturbation")
    return RankOnePerturbation(*(np.array(_number_list(data[k], k)) for k in ("delta", "u", "v")))
