"""Input validation helpers shared across the pipeline."""

import numpy as np

SYMMETRY_TOL = 1e-12


def as_float_matrix(values, name):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name}: expected a 2-d matrix, got shape {arr.shape}")
    return arr


def check_square(matrix, name):
    matrix = as_float_matrix(matrix, name)
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name}: expected a square matrix, got shape {matrix.shape}")
    return matrix


def check_symmetric(matrix, name, tol=SYMMETRY_TOL):
    matrix = check_square(matrix, name)
    if not np.allclose(matrix, matrix.T, atol=tol, rtol=0.0):
        raise ValueError(f"{name}: matrix is not symmetric within {tol}")
    return matrix


def check_binary(matrix, name):
    arr = np.asarray(matrix)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name}: entries must be 0 or 1")
    return np.asarray(arr, dtype=np.float64)


def check_unit_interval(matrix, name):
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{name}: entries must lie in [0, 1]")
    return arr


def check_pairs(pairs, n_peptides, n_diseases):
    """Validate an array of (peptide_index, disease_index) pairs."""
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"pairs: expected shape (n, 2), got {arr.shape}")
    if arr.size:
        if arr[:, 0].min() < 0 or arr[:, 0].max() >= n_peptides:
            raise ValueError(f"pairs: peptide index outside [0, {n_peptides})")
        if arr[:, 1].min() < 0 or arr[:, 1].max() >= n_diseases:
            raise ValueError(f"pairs: disease index outside [0, {n_diseases})")
    return arr


def check_labels(labels, n_pairs):
    arr = np.asarray(labels, dtype=np.float64).reshape(-1)
    if arr.shape[0] != n_pairs:
        raise ValueError(f"labels: expected {n_pairs} entries, got {arr.shape[0]}")
    if arr.size and not np.isin(arr, (0.0, 1.0)).all():
        raise ValueError("labels: entries must be 0 or 1")
    return arr
