"""JSON varifold documents and deterministic CSV emission.

Document schema (all sections optional except ambient_dim):

    {
      "ambient_dim": n,
      "segments": [{"a": [...], "b": [...], "weight": w}, ...],
      "rays": [{"origin": [...], "direction": [...], "weight": w}, ...],
      "conic": {
        "atoms": [{"dir": [...], "mass": m}, ...],
        "density": {"grid": "s1:720", "values": [...]}
      }
    }

Floats are serialized in decimal with enough digits to round-trip exactly.
Pieces are sorted lexicographically by coordinates before emission so that
identical inputs always produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import (
    ConicVarifold,
    DiscreteVarifold,
    RayPiece,
    SampledDensity,
    SegmentPiece,
    Subspace,
    grid_from_descriptor,
)


class SchemaError(ValueError):
    """The document does not match the varifold JSON schema."""


@dataclass(frozen=True)
class VarifoldDocument:
    """Parsed contents of a varifold JSON file."""

    ambient_dim: int
    discrete: DiscreteVarifold | None = None
    conic: ConicVarifold | None = None

    def require_discrete(self) -> DiscreteVarifold:
        if self.discrete is None or self.discrete.is_empty:
            raise SchemaError("document carries no segments or rays")
        return self.discrete

    def require_conic(self) -> ConicVarifold:
        if self.conic is None:
            raise SchemaError("document carries no conic section")
        return self.conic


def _vec(x) -> list[float]:
    return [float(t) for t in np.asarray(x, dtype=float)]


def _sorted_segments(segments: Iterable[SegmentPiece]) -> list[SegmentPiece]:
    return sorted(segments, key=lambda s: (tuple(s.a), tuple(s.b), s.weight))


def _sorted_rays(rays: Iterable[RayPiece]) -> list[RayPiece]:
    return sorted(rays, key=lambda r: (tuple(r.origin), tuple(r.direction), r.weight))


def document_to_dict(
    discrete: DiscreteVarifold | None = None,
    conic: ConicVarifold | None = None,
) -> dict:
    if discrete is None and conic is None:
        raise ValueError("nothing to serialize")
    n = discrete.ambient_dim if discrete is not None else conic.ambient_dim
    if conic is not None and conic.ambient_dim != n:
        raise ValueError("discrete and conic parts disagree on the dimension")
    doc: dict = {"ambient_dim": n}
    if discrete is not None:
        doc["segments"] = [
            {"a": _vec(s.a), "b": _vec(s.b), "weight": s.weight}
            for s in _sorted_segments(discrete.segments)
        ]
        doc["rays"] = [
            {"origin": _vec(r.origin), "direction": _vec(r.direction), "weight": r.weight}
            for r in _sorted_rays(discrete.rays)
        ]
    if conic is not None:
        order = sorted(range(conic.n_atoms), key=lambda i: tuple(conic.atom_directions[i]))
        section: dict = {
            "atoms": [
                {"dir": _vec(conic.atom_directions[i]), "mass": float(conic.atom_masses[i])}
                for i in order
            ]
        }
        if conic.density is not None:
            section["density"] = {
                "grid": conic.density.grid.descriptor,
                "values": _vec(conic.density.values),
            }
        doc["conic"] = section
    return doc


def document_from_dict(doc: dict) -> VarifoldDocument:
    try:
        n = int(doc["ambient_dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("missing or invalid ambient_dim") from exc
    try:
        segments = tuple(
            SegmentPiece(np.array(s["a"], dtype=float), np.array(s["b"], dtype=float),
                         float(s["weight"]))
            for s in doc.get("segments", [])
        )
        rays = tuple(
            RayPiece(np.array(r["origin"], dtype=float),
                     np.array(r["direction"], dtype=float), float(r["weight"]))
            for r in doc.get("rays", [])
        )
        discrete = None
        if segments or rays:
            discrete = DiscreteVarifold(n, segments, rays)
        conic = None
        if "conic" in doc:
            sec = doc["conic"]
            atoms = sec.get("atoms", [])
            dirs = np.array([a["dir"] for a in atoms], dtype=float) if atoms else np.zeros((0, n))
            masses = np.array([a["mass"] for a in atoms], dtype=float)
            dens = None
            if "density" in sec and sec["density"] is not None:
                grid = grid_from_descriptor(str(sec["density"]["grid"]))
                dens = SampledDensity(grid, np.array(sec["density"]["values"], dtype=float))
            conic = ConicVarifold(n, dirs, masses, dens)
        if discrete is None and conic is None:
            raise SchemaError("document contains no varifold data")
        return VarifoldDocument(n, discrete, conic)
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed varifold document: {exc}") from exc


def save_varifold(
    path: str | Path,
    discrete: DiscreteVarifold | None = None,
    conic: ConicVarifold | None = None,
) -> None:
    Path(path).write_text(json.dumps(document_to_dict(discrete, conic), indent=2) + "\n")


def load_varifold(path: str | Path) -> VarifoldDocument:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("document root must be an object")
    return document_from_dict(raw)


def load_subspace(path: str | Path) -> Subspace:
    try:
        raw = json.loads(Path(path).read_text())
        basis = np.array(raw["basis"], dtype=float)
        n = int(raw.get("ambient_dim", basis.shape[1]))
        return Subspace(n, basis)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"malformed subspace document: {exc}") from exc


def save_subspace(path: str | Path, subspace: Subspace) -> None:
    doc = {
        "ambient_dim": subspace.ambient_dim,
        "basis": [_vec(row) for row in subspace.basis],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def format_float(x: float) -> str:
    """Decimal with 17 significant digits: lossless double round-trip."""
    return f"{x:.17g}"


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write rows with floats at 17 significant digits, sorted as given."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                format_float(c) if isinstance(c, (float, np.floating)) else str(c)
                for c in row
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")
