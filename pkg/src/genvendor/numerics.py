"""Deterministic randomness and Gaussian numerics shared by every module.

Provides:

- :class:`RngStream` — a counter-based random stream that is a pure function
  of ``(seed, label path)``.  Substreams derived with :func:`derive_stream`
  never collide for distinct labels and are unaffected by how much the parent
  stream has been consumed, so parallel evaluation cannot reorder draws.
- :func:`std_normal_cdf` / :func:`std_normal_quantile` — high-precision
  standard-normal distribution functions (quantile absolute error <= 1e-9).
- :class:`Covariance` and :func:`sample_mvn` — validated covariance matrices
  and multivariate-normal sampling via Cholesky factors.

Only the distributions the demand models need are exposed (normal, uniform,
integers); anything heavier belongs elsewhere.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RngStream",
    "Covariance",
    "derive_stream",
    "fold_seed",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "sample_mvn",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

#: Smallest admissible covariance eigenvalue.  Matrices whose minimum
#: eigenvalue falls at or below this are rejected as numerically singular
#: even when a raw Cholesky factorization would happen to succeed.
PD_EIGENVALUE_TOL = 1e-10


def _philox_key(seed: int, path: tuple[str, ...]) -> np.ndarray:
    """Derive a 128-bit Philox key from a seed and a label path.

    Hashing the (seed, path) pair means child streams depend only on their
    labels, never on draw order, and distinct paths land on cryptographically
    separated keys.
    """
    h = hashlib.sha256()
    h.update(int(seed).to_bytes(8, "little", signed=False))
    for label in path:
        h.update(b"\x00")
        h.update(label.encode("utf-8"))
    digest = h.digest()
    return np.frombuffer(digest[:16], dtype=np.uint64).copy()


@dataclass
class RngStream:
    """Counter-based random stream keyed by ``(seed, label path)``.

    The draw sequence is a pure function of the seed and the labels used to
    derive the stream: reconstructing a stream with the same ``(seed, path)``
    replays the identical sequence bit for bit.  Derived substreams (see
    :func:`derive_stream`) are independent of the parent's consumed state.
    """

    seed: int
    path: tuple[str, ...] = ()
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        self.path = tuple(str(p) for p in self.path)
        bitgen = np.random.Philox(key=_philox_key(self.seed, self.path))
        self._gen = np.random.Generator(bitgen)

    # -- draw primitives ---------------------------------------------------

    def standard_normal(self, size=None) -> np.ndarray | float:
        return self._gen.standard_normal(size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low: int, high: int | None = None, size=None):
        return self._gen.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def child(self, label: str) -> "RngStream":
        """Alias for :func:`derive_stream` as a method."""
        return derive_stream(self, label)


def derive_stream(parent: RngStream, label: str) -> RngStream:
    """Return a deterministic child stream of ``parent`` for ``label``.

    Children with distinct labels are statistically independent; deriving the
    same label twice yields identical sequences regardless of how many draws
    the parent or any sibling has consumed.
    """
    return RngStream(parent.seed, parent.path + (str(label),))


def fold_seed(seed: int, *labels: str) -> int:
    """Collapse (seed, labels) into a fresh 64-bit seed, deterministically.

    Uses bytes of the same keyed hash as the stream derivation but disjoint
    from the Philox key material, so folded seeds and derived streams never
    alias.
    """
    h = hashlib.sha256()
    h.update(int(seed).to_bytes(8, "little", signed=False))
    for label in labels:
        h.update(b"\x00")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[16:24], "little")


# ---------------------------------------------------------------------------
# Gaussian distribution functions
# ---------------------------------------------------------------------------


def std_normal_cdf(z):
    """Standard normal CDF Phi(z), accurate to ~1 ulp via ``erfc``.

    Accepts scalars or arrays; returns a float for scalar input.
    """
    arr = np.asarray(z, dtype=float)
    if arr.ndim == 0:
        return 0.5 * math.erfc(-float(arr) / _SQRT2)
    flat = np.array([0.5 * math.erfc(-v / _SQRT2) for v in arr.ravel()])
    return flat.reshape(arr.shape)


def std_normal_pdf(z):
    """Standard normal density phi(z); scalar in, float out."""
    arr = np.asarray(z, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * arr * arr)
    return float(out) if arr.ndim == 0 else out


# Coefficients of Acklam's rational approximation to the normal quantile.
_ACKLAM_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_ACKLAM_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_ACKLAM_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_ACKLAM_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_ACKLAM_P_LOW = 0.02425


def _acklam_initial(u: float) -> float:
    """Acklam's rational approximation to Phi^{-1}(u) (|err| < 1.15e-9)."""
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    if u < _ACKLAM_P_LOW:
        q = math.sqrt(-2.0 * math.log(u))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    if u > 1.0 - _ACKLAM_P_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - u))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    q = u - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / (
        ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
    )


def std_normal_quantile(u: float) -> float:
    """Standard normal quantile Phi^{-1}(u) with absolute error <= 1e-9.

    An initial rational approximation is polished by Newton steps against the
    high-precision CDF, which brings the error to near machine precision.

    Raises:
        ValueError: if ``u`` is outside the open interval (0, 1).
    """
    u = float(u)
    if not 0.0 < u < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {u}")
    z = _acklam_initial(u)
    for _ in range(2):
        density = std_normal_pdf(z)
        if density <= 0.0:  # far tail: initial approximation already maximal
            break
        z -= (std_normal_cdf(z) - u) / density
    return z


# ---------------------------------------------------------------------------
# Covariance matrices and multivariate normal sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Covariance:
    """A validated symmetric positive-definite covariance matrix.

    Validation enforces symmetry and a minimum-eigenvalue tolerance
    (:data:`PD_EIGENVALUE_TOL`), so near-singular matrices such as
    ``diag(1e-12)`` are rejected even though a raw Cholesky call might
    numerically succeed on them.
    """

    matrix: np.ndarray
    cholesky: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"covariance must be a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("covariance contains non-finite entries")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        eigenvalues = np.linalg.eigvalsh(m)
        if eigenvalues.min() <= PD_EIGENVALUE_TOL:
            raise np.linalg.LinAlgError(
                "covariance is not positive definite within tolerance "
                f"{PD_EIGENVALUE_TOL:g} (min eigenvalue {eigenvalues.min():.3g})"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "cholesky", np.linalg.cholesky(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def equicorrelated(k: int, diag: float = 1.0, offdiag: float = 0.5) -> "Covariance":
        """Covariance with ``diag`` on the diagonal and ``offdiag`` elsewhere."""
        m = np.full((k, k), float(offdiag))
        np.fill_diagonal(m, float(diag))
        return Covariance(m)


def sample_mvn(mean: np.ndarray, cov: Covariance, rng: RngStream, size: int | None = None) -> np.ndarray:
    """Draw from N(mean, cov) as ``mean + L z`` with ``L`` the Cholesky factor.

    With ``size=None`` returns one k-vector; with an integer ``size`` returns
    a ``(size, k)`` array of independent draws.
    """
    mean = np.asarray(mean, dtype=float)
    if mean.shape != (cov.dim,):
        raise ValueError(f"mean has shape {mean.shape}, expected ({cov.dim},)")
    if size is None:
        z = rng.standard_normal(cov.dim)
        return mean + cov.cholesky @ z
    z = rng.standard_normal((int(size), cov.dim))
    return mean + z @ cov.cholesky.T
