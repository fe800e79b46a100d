"""Input validation helpers shared by the public API."""

import numpy as np


def check_positive(name, value, *, strict=True):
    value = float(value)
    if not np.isfinite(value) or (value <= 0 if strict else value < 0):
        bound = "> 0" if strict else ">= 0"
        raise ValueError(f"{name} must be {bound}, got {value!r}")
    return value


def check_count(name, value, minimum):
    if int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_unit_vector(name, vec, atol=1e-10):
    vec = np.asarray(vec, dtype=float)
    if vec.shape[-1] != 3:
        raise ValueError(f"{name} must have a trailing dimension of 3")
    norm = np.linalg.norm(vec, axis=-1)
    if np.any(np.abs(norm - 1.0) > atol):
        raise ValueError(f"{name} must be unit length (|{name}| = {np.max(norm)!r})")
    return vec


def check_finite(name, arr):
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_field_values(values, sgrid, vgrid, name="field"):
    """Coerce ``values`` to float64 of shape (sgrid.size, vgrid.size)."""
    values = np.asarray(values, dtype=float)
    expected = (sgrid.size, vgrid.size)
    if values.shape != expected:
        raise ValueError(f"{name} has shape {values.shape}, expected {expected}")
    return values


def check_slice(values, vgrid, name="slice"):
    values = np.asarray(values, dtype=float)
    if values.shape != (vgrid.size,):
        raise ValueError(
            f"{name} has shape {values.shape}, expected ({vgrid.size},) "
            "for this velocity grid")
    return values
