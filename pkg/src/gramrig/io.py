"""JSON and CSV formats.

Indices in files are 1-based, in memory 0-based.

Mask::

    {"W": 3, "V": 1, "K": 2, "D": 4, "st_pairs": [[1, 1], [2, 2]],
     "m_pairs": [], "data_block": true}

Knowledge is ``{"mask": <mask>, "values": [...]}`` with values in the
canonical order (state pairs, measurement pairs, data block row-major).
A configuration is ``{"W":.., "V":.., "K":.., "D":.., "entries": [...]}``
with the ``D x N`` entries flattened row-major.  Matrices in CSV are plain
comma-separated rows without header.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import ShapeError
from .model import Configuration, GramKnowledge, OmegaMask, ProblemShape


def _shape_to_dict(shape: ProblemShape) -> dict:
    out = {"W": shape.W, "V": shape.V, "K": shape.K, "D": shape.D}
    if shape.d is not None:
        out["d"] = shape.d
    return out


def _shape_from_dict(obj: dict) -> ProblemShape:
    try:
        return ProblemShape(D=int(obj["D"]), W=int(obj["W"]), V=int(obj["V"]),
                            K=int(obj.get("K", 1)), d=obj.get("d"))
    except KeyError as exc:
        raise ShapeError(f"missing field {exc.args[0]!r}") from None


def mask_to_dict(mask: OmegaMask) -> dict:
    out = _shape_to_dict(mask.shape)
    out["st_pairs"] = [[i + 1, j + 1] for i, j in mask.st_pairs]
    out["m_pairs"] = [[i + 1, j + 1] for i, j in mask.m_pairs]
    out["data_block"] = mask.include_data_block
    return out


def mask_from_dict(obj: dict) -> OmegaMask:
    shape = _shape_from_dict(obj)

    def pairs(key):
        out = []
        for p in obj.get(key, []):
            if len(p) != 2:
                raise ShapeError(f"{key} entries must be index pairs, got {p!r}")
            out.append((int(p[0]) - 1, int(p[1]) - 1))
        return out

    return OmegaMask(shape, pairs("st_pairs"), pairs("m_pairs"), bool(obj.get("data_block", True)))


def knowledge_to_dict(knowledge: GramKnowledge) -> dict:
    return {"mask": mask_to_dict(knowledge.mask), "values": knowledge.values.tolist()}


def knowledge_from_dict(obj: dict) -> GramKnowledge:
    return GramKnowledge(mask_from_dict(obj["mask"]), np.asarray(obj["values"], dtype=float))


def configuration_to_dict(P: Configuration) -> dict:
    out = _shape_to_dict(P.shape)
    out["entries"] = np.asarray(P.entries, dtype=float).ravel().tolist()
    return out


def configuration_from_dict(obj: dict) -> Configuration:
    shape = _shape_from_dict(obj)
    entries = np.asarray(obj["entries"], dtype=float)
    if entries.size != shape.D * shape.N:
        raise ShapeError(f"expected {shape.D * shape.N} entries, got {entries.size}")
    return Configuration(shape, entries.reshape(shape.D, shape.N))


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def load_mask(path) -> OmegaMask:
    return mask_from_dict(read_json(path))


def load_knowledge(path) -> GramKnowledge:
    return knowledge_from_dict(read_json(path))


def load_configuration(path) -> Configuration:
    return configuration_from_dict(read_json(path))


def read_matrix_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float, ndmin=2))


def write_matrix_csv(A: np.ndarray, path) -> None:
    np.savetxt(path, np.atleast_2d(A), delimiter=",", fmt="%.17g")
