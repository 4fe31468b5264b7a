"""The unitary attached to an ordered pair of Lagrangian subspaces.

For frames lam, mu in the same space, the real operator

    S = (Id - 2 P_mu)(2 P_lam - Id)

commutes with the complex structure, so it has a complex matrix W (n x n,
unitary).  Its eigenspace at -1 is the complexified intersection mu ∩ lam,
which is what every index in this package counts.

General metrics are first moved onto the standard model by the congruence
from ``standardize``; the returned matrix always refers to the standard
complexification of that model.
"""

import numpy as np

from .core import (
    DEFAULT_TOL,
    _require_same_space,
    complexify,
    lagrangian,
    realify,
)
from .errors import ValidationError

__all__ = ["souriau", "kernel_dim_minus_one", "lagrangian_from_souriau"]


def _standard_pair(lam, mu=None):
    std = lam.space.standardization
    lam_s = lam if lam.space.is_standard else std.push_frame(lam)
    if mu is None:
        return std, lam_s
    mu_s = mu if mu.space.is_standard else std.push_frame(mu)
    return std, lam_s, mu_s


def souriau(lam, mu, tol=None):
    """Unitary of the ordered pair (lam, mu).

    Parameters
    ----------
    lam, mu : LagrangianFrame
        Frames in the same space.  A non-standard metric is converted by
        congruence first.

    Returns
    -------
    (n, n) complex ndarray, unitary to 1e-10.  Key facts (all covered by
    tests): W(lam, J lam) = Id, W(lam, lam) = -Id, the -1-eigenspace is
    the complexified intersection, and W(lam, mu)^H = W(mu, lam).
    """
    _require_same_space(lam.space, mu.space, "souriau")
    _, lam_s, mu_s = _standard_pair(lam, mu)
    n = lam_s.space.n
    S_real = (np.eye(2 * n) - 2.0 * mu_s.P) @ lam_s.tau
    W = complexify(S_real)
    if np.linalg.norm(W.conj().T @ W - np.eye(n), 2) > 1e-10:
        raise ValidationError("pair unitary drifted", where="souriau")
    return W


def kernel_dim_minus_one(W, tol=1e-7):
    """Multiplicity of the eigenvalue -1 of a unitary matrix.

    Eigenvalues within angular distance ``tol`` of -1 are counted.
    """
    if not (0.0 < tol < 0.5):
        raise ValidationError(
            "tol must lie in (0, 0.5)", where="kernel_dim_minus_one"
        )
    W = np.asarray(W, dtype=complex)
    if np.linalg.norm(W.conj().T @ W - np.eye(W.shape[0]), 2) > 1e-9:
        raise ValidationError("matrix not unitary", where="kernel_dim_minus_one")
    offsets = np.angle(-np.linalg.eigvals(W))
    return int(np.count_nonzero(np.abs(offsets) < tol))


def minus_one_offsets(W):
    """Signed angular offsets of the spectrum from -1 (no validation)."""
    return np.angle(-np.linalg.eigvals(np.asarray(W, dtype=complex)))


def lagrangian_from_souriau(lam, W, tol=DEFAULT_TOL):
    """Invert the pair map: recover mu with souriau(lam, mu) = W.

    mu is the real kernel of (realify(W) tau_lam + Id), which is exactly
    n-dimensional when W is in the image of the pair map for lam.
    """
    W = np.asarray(W, dtype=complex)
    n = lam.space.n
    if W.shape != (n, n):
        raise ValidationError("size mismatch", where="lagrangian_from_souriau")
    if np.linalg.norm(W.conj().T @ W - np.eye(n), 2) > 1e-9:
        raise ValidationError(
            "matrix not unitary", where="lagrangian_from_souriau"
        )
    std, lam_s = _standard_pair(lam)
    A = realify(W) @ lam_s.tau + np.eye(2 * n)
    _, sv, Vt = np.linalg.svd(A)
    if sv[n - 1] <= 1e-8:
        raise ValidationError(
            "kernel larger than n: not a pair unitary for this base",
            where="lagrangian_from_souriau",
        )
    if sv[n] > 1e-8:
        raise ValidationError(
            "kernel smaller than n: not symmetric relative to the base",
            where="lagrangian_from_souriau",
        )
    mu_s = lagrangian(lam_s.space, Vt[n:].T)
    if std.source.is_standard:
        return mu_s
    return std.pull_frame(mu_s)
