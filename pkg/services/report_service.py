import csv
import dataclasses
import logging
import os
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List

import orjson
from pydantic import ValidationError

from models import ConfigurationFile, RunReport, format_rational, parse_rational
from services.configuration import ColorfulPartition, Configuration
from services.errors import CertificateError, GeometryError
from services.exact_geometry import HalfSpace
from services.split_service import SplitCertificate

logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS


def to_jsonable(value):
    """Plain JSON types only; every Fraction becomes a ``"p/q"`` string."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, float, str)):
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, HalfSpace):
        return halfspace_to_dict(value)
    if isinstance(value, SplitCertificate):
        return certificate_to_dict(value)
    if isinstance(value, ColorfulPartition):
        return [list(perm) for perm in value.assignment]
    if isinstance(value, Configuration):
        return configuration_to_dict(value)
    if dataclasses.is_dataclass(value):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    raise TypeError(f"cannot serialise {type(value).__name__}")


def dumps(value) -> bytes:
    return orjson.dumps(to_jsonable(value), option=JSON_OPTIONS)


def configuration_to_dict(config: Configuration) -> Dict:
    return {
        "d": config.d,
        "r": config.r,
        "classes": [[[format_rational(v) for v in p] for p in points] for points in config.classes],
    }


def configuration_from_dict(data) -> Configuration:
    try:
        parsed = ConfigurationFile.model_validate(data)
    except ValidationError as e:
        raise GeometryError(f"invalid configuration: {e}") from e
    return Configuration.from_lists(parsed.d, parsed.r,
                                    [[[parse_rational(v) for v in p] for p in points] for points in parsed.classes])


def load_configuration(path: str) -> Configuration:
    try:
        with open(path, "rb") as f:
            data = orjson.loads(f.read())
    except FileNotFoundError:
        raise GeometryError(f"configuration file {path} does not exist") from None
    except orjson.JSONDecodeError as e:
        raise GeometryError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    return configuration_from_dict(data)


def save_configuration(config: Configuration, path: str) -> str:
    _ensure_parent(path)
    with open(path, "wb") as f:
        f.write(orjson.dumps(configuration_to_dict(config), option=JSON_OPTIONS))
    logger.info(f"Wrote configuration to {path}")
    return path


def halfspace_to_dict(h: HalfSpace) -> Dict:
    return {"normal": [format_rational(a) for a in h.normal], "offset": format_rational(h.offset), "closed": h.closed}


def halfspace_from_dict(data) -> HalfSpace:
    try:
        return HalfSpace.make([parse_rational(a) for a in data["normal"]],
                              parse_rational(data["offset"]), bool(data.get("closed", False)))
    except (KeyError, TypeError, ValueError) as e:
        raise CertificateError(f"malformed half-space {data!r}: {e}") from None


def certificate_to_dict(certificate: SplitCertificate) -> Dict:
    return {
        "family": [halfspace_to_dict(h) for h in certificate.family],
        "matchings": {str(c): list(m) for c, m in sorted(certificate.matchings.items())},
        "split_class_indices": list(certificate.split_class_indices),
    }


def certificate_from_dict(data) -> SplitCertificate:
    try:
        return SplitCertificate(
            tuple(halfspace_from_dict(h) for h in data["family"]),
            {int(c): tuple(int(i) for i in m) for c, m in data.get("matchings", {}).items()},
            tuple(int(c) for c in data.get("split_class_indices", [])),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CertificateError(f"malformed certificate: {e}") from None


def load_certificate(path: str) -> SplitCertificate:
    try:
        with open(path, "rb") as f:
            data = orjson.loads(f.read())
    except FileNotFoundError:
        raise CertificateError(f"certificate file {path} does not exist") from None
    except orjson.JSONDecodeError as e:
        raise CertificateError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    return certificate_from_dict(data)


def _ensure_parent(path):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_csv(rows: Iterable[Dict], columns: List[str], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: to_jsonable(v) for k, v in row.items()})
    return path


def write_report(report: RunReport, out_dir: str, fmt: str = "json", rows=None, columns=None) -> List[str]:
    """Write ``<command>.json`` and/or ``<command>.csv`` under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        path = os.path.join(out_dir, f"{report.command}.json")
        with open(path, "wb") as f:
            f.write(orjson.dumps(to_jsonable(report.model_dump()), option=JSON_OPTIONS))
        written.append(path)
    if fmt in ("csv", "both") and rows is not None:
        written.append(write_csv(rows, columns, os.path.join(out_dir, f"{report.command}.csv")))
    logger.info(f"Report for {report.command} written to {', '.join(written) or 'nowhere'}")
    return written


def results_bytes(report: RunReport) -> bytes:
    """The reproducible part of a report: results only, no wall time."""
    return orjson.dumps(to_jsonable(report.results), option=JSON_OPTIONS)
