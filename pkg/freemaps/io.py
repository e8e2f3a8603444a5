"""
JSON file formats for matrices, tuples, pencils and domains.

Matrix:  ``{"rows": n, "cols": m, "re": [[...]], "im": [[...]]}``
Tuple:   a JSON array of matrices (a single matrix is a 1-tuple)
Pencil:  ``{"d": d, "g": g, "A": [<matrix>, ...]}``
Domain:  ``{"kind": "eps", "eps": e, "g": g}``,
         ``{"kind": "pencil", "pencil": <pencil>}`` (or a bare pencil),
         ``{"kind": "poly", "g": g, "q": "<expr>" | [["<expr>", ...], ...]}``
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from .domains import (
    EpsNeighborhood,
    NCDomain,
    PencilDomain,
    PolynomialDomain,
    TrulyLinearPencil,
)
from .exceptions import DimensionError, FormatError
from .linalg import ComplexMatrix, MatrixTuple

logger = logging.getLogger(__name__)


class MatrixFile(BaseModel):
    """A dense complex matrix stored as separate real and imaginary parts."""

    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    re: List[List[float]]
    im: List[List[float]]

    @model_validator(mode="after")
    def check_shape(self) -> "MatrixFile":
        for name in ("re", "im"):
            part = getattr(self, name)
            if len(part) != self.rows or any(len(row) != self.cols for row in part):
                raise ValueError(f"'{name}' must be a {self.rows}x{self.cols} array")
        return self

    def to_array(self) -> ComplexMatrix:
        re = np.array(self.re, dtype=np.float64)
        return re + 1j * np.array(self.im, dtype=np.float64)

    @classmethod
    def from_array(cls, m: ComplexMatrix) -> "MatrixFile":
        m = np.asarray(m, dtype=np.complex128)
        return cls(
            rows=m.shape[0],
            cols=m.shape[1],
            re=[[float(v) for v in row] for row in m.real],
            im=[[float(v) for v in row] for row in m.imag],
        )


class PencilFile(BaseModel):
    d: int = Field(..., ge=1)
    g: int = Field(..., ge=1)
    A: List[MatrixFile]

    @model_validator(mode="after")
    def check_coefficients(self) -> "PencilFile":
        if len(self.A) != self.g:
            raise ValueError(f"Expected {self.g} coefficients, got {len(self.A)}")
        for a in self.A:
            if a.rows != self.d or a.cols != self.d:
                raise ValueError(f"Coefficients must be {self.d}x{self.d}")
        return self

    def to_pencil(self) -> TrulyLinearPencil:
        return TrulyLinearPencil(tuple(a.to_array() for a in self.A))

    @classmethod
    def from_pencil(cls, pencil: TrulyLinearPencil) -> "PencilFile":
        return cls(
            d=pencil.d,
            g=pencil.g,
            A=[MatrixFile.from_array(a) for a in pencil.coefficients],
        )


def _validate(model: type, data: Any, what: str) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise FormatError(f"Invalid {what}: {e.errors()[0]['msg']}") from e


def read_json(path: Union[str, Path]) -> Any:
    """Load a JSON document; OS errors propagate unchanged."""
    logger.debug("Reading %s", path)
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from e


def matrix_from_json(data: Any) -> ComplexMatrix:
    return _validate(MatrixFile, data, "matrix").to_array()


def matrix_to_json(m: ComplexMatrix) -> Dict[str, Any]:
    return MatrixFile.from_array(m).model_dump()


def tuple_from_json(data: Any) -> MatrixTuple:
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not data:
        raise FormatError("A tuple must be a non-empty JSON array of matrices")
    try:
        return MatrixTuple(tuple(matrix_from_json(item) for item in data))
    except DimensionError as e:
        raise FormatError(f"Invalid tuple: {e}") from e


def tuple_to_json(x: MatrixTuple) -> List[Dict[str, Any]]:
    return [matrix_to_json(c) for c in x]


def pencil_from_json(data: Any) -> TrulyLinearPencil:
    return _validate(PencilFile, data, "pencil").to_pencil()


def pencil_to_json(pencil: TrulyLinearPencil) -> Dict[str, Any]:
    return PencilFile.from_pencil(pencil).model_dump()


def domain_from_json(data: Any) -> NCDomain:
    """Build a domain from its tagged JSON form.

    Raises:
        FormatError: If the kind is unknown or a field is missing
        ExpressionSyntaxError: If a polynomial entry does not parse
    """
    if not isinstance(data, dict):
        raise FormatError("A domain must be a JSON object")
    kind = data.get("kind")
    if kind is None and "A" in data:
        kind, data = "pencil", {"pencil": data}
    try:
        if kind == "eps":
            return EpsNeighborhood(float(data["eps"]), int(data.get("g", 1)))
        if kind == "pencil":
            return PencilDomain(pencil_from_json(data["pencil"]))
        if kind == "poly":
            g = int(data["g"])
            q = data["q"]
            rows = [[q]] if isinstance(q, str) else q
            return PolynomialDomain.from_strings(rows, g)
    except KeyError as e:
        raise FormatError(f"Domain of kind {kind!r} is missing field {e}") from e
    except (TypeError, ValueError, DimensionError) as e:
        raise FormatError(f"Invalid domain: {e}") from e
    raise FormatError(f"Unknown domain kind {kind!r}; expected eps, pencil or poly")


def domain_to_json(dom: NCDomain) -> Dict[str, Any]:
    if isinstance(dom, EpsNeighborhood):
        return {"kind": "eps", "eps": dom.eps, "g": dom.g}
    if isinstance(dom, PencilDomain):
        return {"kind": "pencil", "pencil": pencil_to_json(dom.pencil)}
    if isinstance(dom, PolynomialDomain):
        return {
            "kind": "poly",
            "g": dom.g,
            "q": [[entry.render() for entry in row] for row in dom.entries],
        }
    raise FormatError(f"Cannot serialize domain of type {type(dom).__name__}")


def load_tuple(path: Union[str, Path]) -> MatrixTuple:
    return tuple_from_json(read_json(path))


def load_domain(path: Union[str, Path]) -> NCDomain:
    return domain_from_json(read_json(path))


def fingerprint(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def fingerprint_file(path: Union[str, Path]) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()
