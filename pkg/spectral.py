import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from graph_core import Graph, NumericError, ParameterError

logger = logging.getLogger(__name__)

QuantizerRule = Literal["absolute", "relative"]

DENSE_LIMIT = 2048
RESIDUAL_TOL = 1e-8
DEGENERACY_TOL = 1e-9
SIGN_EPS = 1e-12


@dataclass(frozen=True)
class SpectralBasis:
    eigenvalues: np.ndarray  # ascending, includes the trivial eigenvalue
    vectors: np.ndarray  # n x (m+1), columns aligned with eigenvalues
    degeneracy_flag: bool
    residuals: np.ndarray

    @property
    def nontrivial_count(self) -> int:
        return max(len(self.eigenvalues) - 1, 0)


@dataclass(frozen=True)
class EnergyEmbedding:
    values: np.ndarray  # n x m
    scaled: bool

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class QuantizedCodes:
    codes: np.ndarray  # n x m int64 bin indices
    rule: QuantizerRule
    eta: float
    delta: float

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def m(self) -> int:
        return self.codes.shape[1]


# ----------------------------------------------------------------------------
# Laplacian + eigenbasis
# ----------------------------------------------------------------------------


def normalized_laplacian(g: Graph) -> sparse.csr_matrix:
    """L = I - D^{-1/2} A D^{-1/2} as a sparse symmetric matrix."""
    deg = g.degrees
    if g.n and deg.min() == 0:
        isolated = int(np.argmin(deg))
        raise ParameterError(f"vertex {isolated} is isolated; normalized Laplacian undefined")
    inv_sqrt = sparse.diags(1.0 / np.sqrt(deg.astype(float)))
    lap = sparse.identity(g.n, format="csr") - inv_sqrt @ g.csr @ inv_sqrt
    return sparse.csr_matrix(lap)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    vectors = vectors.copy()
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        big = np.flatnonzero(np.abs(col) > SIGN_EPS)
        if big.size and col[big[0]] < 0:
            vectors[:, j] = -col
    return vectors


def _residuals(op, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return np.linalg.norm(op @ vectors - vectors * values, axis=0)


def _dense_pairs(op, count: int):
    dense = op.toarray() if sparse.issparse(op) else np.asarray(op, dtype=float)
    return scipy.linalg.eigh(dense, subset_by_index=[0, count - 1])


def _dense_solve(op, count: int):
    try:
        return _dense_pairs(op, count)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"dense eigensolver failed on n={op.shape[0]}: {exc}") from exc


def _lanczos_pairs(op, count: int):
    n = op.shape[0]
    # largest eigenpairs of 2I - L are the smallest of L
    shifted = 2.0 * sparse.identity(n, format="csr") - op
    v0 = np.random.default_rng(0).standard_normal(n)
    values, vectors = eigsh(shifted, k=count, which="LA", tol=0.0, v0=v0, ncv=min(n, max(2 * count + 1, 40)))
    order = np.argsort(2.0 - values)
    return 2.0 - values[order], vectors[:, order]


def low_frequency_basis(op, m: int, tol: float = DEGENERACY_TOL, dense_limit: int = DENSE_LIMIT) -> SpectralBasis:
    n = op.shape[0]
    if m < 0 or m + 1 > n:
        raise ParameterError(f"need 0 <= m and m + 1 <= n, got m={m}, n={n}")
    count = m + 1

    if n <= dense_limit:
        values, vectors = _dense_solve(op, count)
    else:
        try:
            values, vectors = _lanczos_pairs(op, count)
        except ArpackNoConvergence as exc:
            raise NumericError(f"Lanczos did not converge for {count} eigenpairs") from exc
        except ArpackError as exc:
            raise NumericError(f"ARPACK failed on n={n}: {exc}") from exc
        if _residuals(op, values, vectors).max() > RESIDUAL_TOL:
            logger.info("Lanczos residual above %.0e on n=%d, falling back to dense solver", RESIDUAL_TOL, n)
            values, vectors = _dense_solve(op, count)

    vectors = _fix_signs(vectors)
    residuals = _residuals(op, values, vectors)
    if residuals.max() > RESIDUAL_TOL:
        raise NumericError(f"eigenpairs of n={n} operator failed the residual check", float(residuals.max()))

    nontrivial = values[1:]
    gaps = np.diff(nontrivial)
    degenerate = bool(np.any(gaps < tol * np.maximum(1.0, np.abs(nontrivial[:-1])))) if gaps.size else False
    if degenerate:
        logger.warning("degenerate eigenspace among the first %d nontrivial eigenvalues; energy codes depend on the computed basis", m)

    return SpectralBasis(eigenvalues=values, vectors=vectors, degeneracy_flag=degenerate, residuals=residuals)


def graph_basis(g: Graph, m: int, tol: float = DEGENERACY_TOL) -> SpectralBasis:
    return low_frequency_basis(normalized_laplacian(g), m, tol=tol)


# ----------------------------------------------------------------------------
# Embeddings + quantizers
# ----------------------------------------------------------------------------


def energy_embedding(basis: SpectralBasis, m: int, scaled: bool = False) -> EnergyEmbedding:
    """Squared entries of the first m nontrivial eigenvectors (times n when scaled)."""
    if m < 0 or m > basis.nontrivial_count:
        raise ParameterError(f"basis holds {basis.nontrivial_count} nontrivial vectors, asked for m={m}")
    values = basis.vectors[:, 1 : m + 1] ** 2
    if scaled:
        values = values * basis.vectors.shape[0]
    return EnergyEmbedding(values=values, scaled=scaled)


def _check_eta(eta: float):
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta}")


def quantize_absolute(emb: EnergyEmbedding, eta: float) -> QuantizedCodes:
    _check_eta(eta)
    codes = np.floor(emb.values / eta).astype(np.int64)
    return QuantizedCodes(codes=codes, rule="absolute", eta=eta, delta=eta)


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_relative(emb: EnergyEmbedding, eta: float) -> QuantizedCodes:
    _check_eta(eta)
    n, m = emb.values.shape
    peak = float(np.abs(emb.values).max()) if emb.values.size else 0.0
    if m == 0 or peak == 0.0:
        return QuantizedCodes(codes=np.zeros((n, m), dtype=np.int64), rule="relative", eta=eta, delta=0.0)
    delta = eta * peak
    codes = round_half_away(emb.values / delta).astype(np.int64)
    return QuantizedCodes(codes=codes, rule="relative", eta=eta, delta=delta)


def quantize(emb: EnergyEmbedding, eta: float, rule: QuantizerRule) -> QuantizedCodes:
    if rule == "absolute":
        return quantize_absolute(emb, eta)
    if rule == "relative":
        return quantize_relative(emb, eta)
    raise ParameterError(f"unknown quantizer rule {rule!r}")


def codebook_size(codes: QuantizedCodes) -> int:
    if codes.n == 0:
        return 0
    if codes.m == 0:
        return 1
    return int(np.unique(codes.codes, axis=0).shape[0])


def spectral_code_ratio(codes: QuantizedCodes) -> float:
    return codebook_size(codes) / codes.n if codes.n else 0.0


def dump_basis_tsv(basis: SpectralBasis, emb: EnergyEmbedding, path: str | Path):
    """One row per (vertex, eigen-index) of the retained basis; energy is n/a for the trivial vector."""
    n, cols = basis.vectors.shape
    vertex = np.repeat(np.arange(n), cols)
    index = np.tile(np.arange(cols), n)
    energy = np.full((n, cols), np.nan)
    energy[:, 1 : 1 + emb.m] = emb.values
    frame = pd.DataFrame(
        {
            "vertex": vertex,
            "index": index,
            "eigenvalue": basis.eigenvalues[index],
            "vector": basis.vectors.ravel(),
            "energy": energy.ravel(),
        }
    )
    frame.to_csv(path, sep="\t", index=False, float_format="%.17g", na_rep="n/a")
