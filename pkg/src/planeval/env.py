"""Object-table environments and their flattened token encodings.

An environment is a table with one row per object (the agent included,
as just another object). Flattening renders the table row by row into a
single token sequence that is appended to the goal:

    <goal> Env: id=... type=... pos=... rot=... on=... [SEP] id=... ...
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

from .errors import (
    BudgetTooSmallError,
    DanglingReceptacleError,
    DuplicateIdError,
    EmptyTableWarning,
    SchemaError,
)

ENV_MARKER = "Env:"
DEFAULT_SEPARATOR = "[SEP]"

COLUMNS = ("id", "type", "position", "rotation", "receptacle")

AGENT_TYPE = "Agent"


def _normalize_degrees(value: float) -> float:
    return float(value) % 360.0


@dataclass(frozen=True)
class ObjectRow:
    """One object: id, type, pose, parent receptacle, boolean properties."""

    object_id: str
    object_type: str
    position: tuple[float, float, float]
    rotation: tuple[float, float, float]
    parent_receptacle: str | None = None
    properties: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.object_id:
            raise SchemaError("object id must be non-empty")
        if not self.object_type:
            raise SchemaError(f"object {self.object_id}: type must be non-empty")
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(
            self, "rotation", tuple(_normalize_degrees(v) for v in self.rotation)
        )
        if len(self.position) != 3 or len(self.rotation) != 3:
            raise SchemaError(f"object {self.object_id}: position and rotation need 3 components")
        if self.parent_receptacle == self.object_id:
            raise SchemaError(f"object {self.object_id}: parent_receptacle is self-referential")


@dataclass(frozen=True)
class ObjectTable:
    """An ordered, validated collection of object rows."""

    rows: tuple[ObjectRow, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.rows, tuple):
            object.__setattr__(self, "rows", tuple(self.rows))
        ids = [row.object_id for row in self.rows]
        seen: set[str] = set()
        for object_id in ids:
            if object_id in seen:
                raise DuplicateIdError(f"duplicate object id {object_id!r}")
            seen.add(object_id)
        for row in self.rows:
            parent = row.parent_receptacle
            if parent is not None and parent not in seen:
                raise DanglingReceptacleError(
                    f"object {row.object_id}: parent_receptacle {parent!r} not in table"
                )
        agents = [row for row in self.rows if row.object_type == AGENT_TYPE]
        if len(agents) > 1:
            raise SchemaError("at most one Agent row is permitted")

    def __len__(self) -> int:
        return len(self.rows)

    def to_document(self) -> dict:
        """The JSON environment document this table round-trips through."""
        objects = []
        for row in self.rows:
            objects.append(
                {
                    "id": row.object_id,
                    "type": row.object_type,
                    "position": dict(zip("xyz", row.position)),
                    "rotation": dict(zip("xyz", row.rotation)),
                    "parent_receptacle": row.parent_receptacle,
                    "properties": dict(row.properties),
                }
            )
        return {"objects": objects}


@dataclass(frozen=True)
class FlattenConfig:
    """Which columns a flattened row renders, and how."""

    included_columns: tuple[str, ...] = COLUMNS
    precision: int = 2
    separator: str = DEFAULT_SEPARATOR

    def __post_init__(self) -> None:
        if not isinstance(self.included_columns, tuple):
            object.__setattr__(self, "included_columns", tuple(self.included_columns))
        if not self.included_columns:
            raise SchemaError("included_columns must be non-empty")
        unknown = [c for c in self.included_columns if c not in COLUMNS]
        if unknown:
            raise SchemaError(f"unknown columns: {unknown}; choose from {COLUMNS}")
        if self.precision < 0:
            raise SchemaError("precision must be >= 0")
        if not self.separator:
            raise SchemaError("separator must be non-empty")


_ROW_KEYS = {"id", "type", "position", "rotation", "parent_receptacle", "properties"}
_REQUIRED_ROW_KEYS = {"id", "type", "position", "rotation"}


def load_table(document: Mapping) -> ObjectTable:
    """Validate an environment document and build the object table."""
    if not isinstance(document, Mapping):
        raise SchemaError("environment document must be a JSON object")
    if set(document) != {"objects"}:
        raise SchemaError('environment document must have exactly one key: "objects"')
    objects = document["objects"]
    if not isinstance(objects, list):
        raise SchemaError('"objects" must be a list')

    rows = []
    for i, obj in enumerate(objects):
        if not isinstance(obj, Mapping):
            raise SchemaError(f"objects[{i}] must be a JSON object")
        missing = _REQUIRED_ROW_KEYS - set(obj)
        if missing:
            raise SchemaError(f"objects[{i}] missing fields: {sorted(missing)}")
        extra = set(obj) - _ROW_KEYS
        if extra:
            raise SchemaError(f"objects[{i}] has unknown fields: {sorted(extra)}")
        rows.append(
            ObjectRow(
                object_id=str(obj["id"]),
                object_type=str(obj["type"]),
                position=_xyz(obj["position"], f"objects[{i}].position"),
                rotation=_xyz(obj["rotation"], f"objects[{i}].rotation"),
                parent_receptacle=obj.get("parent_receptacle"),
                properties=_properties(obj.get("properties", {}), f"objects[{i}].properties"),
            )
        )
    return ObjectTable(tuple(rows))


def _xyz(doc, where: str) -> tuple[float, float, float]:
    if not isinstance(doc, Mapping) or set(doc) != {"x", "y", "z"}:
        raise SchemaError(f"{where} must be an object with x, y, z")
    try:
        return (float(doc["x"]), float(doc["y"]), float(doc["z"]))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: components must be numbers") from exc


def _properties(doc, where: str) -> dict[str, bool]:
    if not isinstance(doc, Mapping):
        raise SchemaError(f"{where} must be an object")
    for key, value in doc.items():
        if not isinstance(value, bool):
            raise SchemaError(f"{where}.{key} must be a boolean")
    return dict(doc)


def render_row(row: ObjectRow, config: FlattenConfig = FlattenConfig()) -> str:
    """Render one row's included columns, in config order."""
    p = config.precision
    pieces = []
    for column in config.included_columns:
        if column == "id":
            pieces.append(f"id={row.object_id}")
        elif column == "type":
            pieces.append(f"type={row.object_type}")
        elif column == "position":
            pieces.append("pos=" + ",".join(f"{v:.{p}f}" for v in row.position))
        elif column == "rotation":
            pieces.append("rot=" + ",".join(f"{v:.{p}f}" for v in row.rotation))
        elif column == "receptacle":
            pieces.append(f"on={row.parent_receptacle or 'none'}")
    return " ".join(pieces)


def encode_environment(table: ObjectTable, config: FlattenConfig = FlattenConfig()) -> str:
    """The ``Env: <row> [SEP] <row> ...`` portion, without the goal."""
    if not table.rows:
        _warnings.warn("flattening an empty object table", EmptyTableWarning, stacklevel=2)
        return ENV_MARKER
    body = f" {config.separator} ".join(render_row(row, config) for row in table.rows)
    return f"{ENV_MARKER} {body}"


def flatten(goal: str, table: ObjectTable, config: FlattenConfig = FlattenConfig()) -> str:
    """Full generator input: the goal followed by the flattened table."""
    return f"{goal} {encode_environment(table, config)}"


class TruncationResult(NamedTuple):
    encoded: str
    rows_dropped: int


def truncate_encoding(
    encoded: str,
    max_tokens: int,
    table: ObjectTable | None = None,
    separator: str = DEFAULT_SEPARATOR,
) -> TruncationResult:
    """Drop whole trailing rows until the encoding fits the token budget.

    Tokens are whitespace tokens. The result is always a row-granular
    prefix of the input. ``table`` is an optional cross-check that the
    encoding holds the expected number of rows.
    """
    marker_at = encoded.find(ENV_MARKER)
    if marker_at < 0:
        raise SchemaError(f"encoding has no {ENV_MARKER!r} marker")
    head = encoded[: marker_at + len(ENV_MARKER)]
    tail = encoded[marker_at + len(ENV_MARKER) :].strip()
    rows = tail.split(f" {separator} ") if tail else []
    if table is not None and len(rows) != len(table.rows):
        raise SchemaError(
            f"encoding holds {len(rows)} rows but the table has {len(table.rows)}"
        )

    if len(head.split()) > max_tokens:
        raise BudgetTooSmallError(
            f"budget of {max_tokens} tokens cannot fit the goal and {ENV_MARKER!r} prefix"
        )

    kept = list(rows)
    while kept and len(_assemble(head, kept, separator).split()) > max_tokens:
        kept.pop()
    return TruncationResult(_assemble(head, kept, separator), len(rows) - len(kept))


def _assemble(head: str, rows: list[str], separator: str) -> str:
    if not rows:
        return head
    return f"{head} " + f" {separator} ".join(rows)
