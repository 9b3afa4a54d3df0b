"""Tolerances, exceptions and input validation helpers shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances threaded through validation and certification."""

    validation: float = 1e-12
    reconstruction: float = 1e-10
    completeness: float = 1e-10
    extremal: float = 1e-8
    dead_band: float = 1e-9
    chain: float = 1e-7


DEFAULT_TOL = Tolerances()


class ValidationError(ValueError):
    """Base class for rejected inputs."""


class NotHermitianError(ValidationError):
    pass


class NotPositiveError(ValidationError):
    pass


class TraceError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class NormError(ValidationError):
    pass


class CompletenessError(ValidationError):
    pass


class ParameterRangeError(ValidationError):
    pass


class NotExtremalError(ValidationError):
    pass


def as_square(matrix, name="matrix"):
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def check_hermitian(a, tol=DEFAULT_TOL.validation, name="matrix"):
    err = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if err > tol:
        raise NotHermitianError(f"{name} is not Hermitian (max deviation {err:.3e})")


def check_probability_matrix(matrix, tol=DEFAULT_TOL.validation, name="matrix"):
    """Validate a Hermitian PSD trace-one matrix and return it as a complex array."""
    a = as_square(matrix, name)
    check_hermitian(a, tol, name)
    tr = np.trace(a).real
    if abs(tr - 1.0) > tol:
        raise TraceError(f"{name} has trace {tr!r}, expected 1")
    lo = np.linalg.eigvalsh((a + a.conj().T) / 2)[0]
    if lo < -tol:
        raise NotPositiveError(f"{name} has negative eigenvalue {lo:.3e}")
    return a


def check_dims(d1, d2):
    for d in (d1, d2):
        if int(d) != d or d < 1:
            raise DimensionError(f"dimensions must be positive integers, got {(d1, d2)}")
    return int(d1), int(d2)


def check_unit_vector(v, tol=1e-9, name="vector"):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise DimensionError(f"{name} must be a 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise NormError(f"{name} must have unit length")
    return v
