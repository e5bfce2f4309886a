"""Density-matrix JSON files.

Format::

    {"re": [[...4x4...]], "im": [[...4x4...]],
     "scale": "absolute" | "deviation_epsilon",
     "epsilon": 0.00735,
     "errors": [[...4x4...]] | {"re": [[...]], "im": [[...]]}}

With ``"deviation_epsilon"`` the state is ``1/4 + epsilon (re + i im)`` and
errors are in the same units of epsilon.  ``im`` and ``errors`` are optional.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .correlations import ElementErrors
from .states import DEFAULT_EPSILON


class MatrixFileError(ValueError):
    pass


@dataclass
class MatrixFile:
    rho: np.ndarray
    epsilon: float
    errors: ElementErrors | None = None


def _matrix(value, what: str) -> np.ndarray:
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MatrixFileError(f"{what} is not a numeric array") from exc
    if a.shape != (4, 4):
        raise MatrixFileError(f"{what} must be 4x4, got shape {a.shape}")
    return a


def parse_matrix(data: dict) -> MatrixFile:
    if not isinstance(data, dict) or "re" not in data:
        raise MatrixFileError("expected a JSON object with at least an 're' array")
    unknown = set(data) - {"re", "im", "scale", "epsilon", "errors"}
    if unknown:
        raise MatrixFileError(f"unknown key(s): {sorted(unknown)}")
    re = _matrix(data["re"], "re")
    im = _matrix(data.get("im", np.zeros((4, 4))), "im")
    scale = data.get("scale", "absolute")
    eps = float(data.get("epsilon", DEFAULT_EPSILON))
    if scale == "absolute":
        factor, rho = 1.0, re + 1j * im
    elif scale == "deviation_epsilon":
        factor, rho = eps, np.eye(4) / 4 + eps * (re + 1j * im)
    else:
        raise MatrixFileError(f"scale must be 'absolute' or 'deviation_epsilon', not {scale!r}")

    errors = None
    if "errors" in data:
        raw = data["errors"]
        try:
            if isinstance(raw, dict):
                errors = ElementErrors(_matrix(raw["re"], "errors.re"), _matrix(raw["im"], "errors.im"))
            else:
                e = _matrix(raw, "errors")
                errors = ElementErrors(e, e)
        except (KeyError, ValueError) as exc:
            raise MatrixFileError(f"bad errors block: {exc}") from exc
        errors = errors.scaled(factor)
    return MatrixFile(rho, eps, errors)


def load_matrix(path) -> MatrixFile:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MatrixFileError(f"cannot read {path}: {exc}") from exc
    return parse_matrix(data)


def dump_matrix(rho, epsilon: float | None = None) -> dict:
    """Serialize ``rho``; with ``epsilon`` the deviation scale is used."""
    rho = np.asarray(rho, dtype=complex)
    if epsilon is None:
        return {"re": rho.real.tolist(), "im": rho.imag.tolist(), "scale": "absolute"}
    dev = (rho - np.eye(4) / 4) / epsilon
    return {"re": dev.real.tolist(), "im": dev.imag.tolist(), "scale": "deviation_epsilon", "epsilon": epsilon}


def measured_state() -> MatrixFile:
    """Tomographically reconstructed initial state shipped with the package."""
    text = resources.files("qcorr").joinpath("data/measured_state.json").read_text()
    return parse_matrix(json.loads(text))
