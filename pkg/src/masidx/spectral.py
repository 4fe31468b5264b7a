"""Spectral flow of constant-coefficient first-order boundary problems.

A family member is the operator  JJ u' + B u + C_t u  on [0, 1] with
JJ = [[0, I], [-I, 0]], B symmetric and anticommuting with JJ, C_t
symmetric, and boundary conditions u(0) in lambda0, u(1) in lambda1.
s is an eigenvalue iff the constant-coefficient flow
Phi_{t,s} = expm(-B + JJ C_t - s JJ) moves lambda0 onto a subspace
meeting lambda1.

The flow of eigenvalues through 0 as t sweeps [0, 1] is counted by the
same partition / test-angle scheme as the unitary index, with the arc
[0, eps] on the real axis (closed at 0).  The coincidence theorem equates
it with the index of the Cauchy-data path in the doubled space against
lambda0 ⊞ lambda1, and ``verify_coincidence`` computes both sides.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar

from .core import DEFAULT_TOL, box_space, lagrangian, standard_space
from .errors import AmbiguityError, PreconditionError, ValidationError
from .paths import LagrangianPath, maslov

__all__ = [
    "BoundaryProblem",
    "boundary_problem",
    "fundamental_solution",
    "cauchy_data_path",
    "eigenvalues_near",
    "eigenvalue_trace",
    "spectral_flow",
    "SpectralFlowReport",
    "verify_coincidence",
    "JJ",
]

_DETECT_LO = -0.55
_DETECT_HI = 1.55
_TRACK_LO = -0.3
_TRACK_HI = 1.3
_MOTION = 0.2
_GRID = 0.29
_EPS_CAP = 1.0


def JJ(N):
    z = np.zeros((N, N))
    eye = np.eye(N)
    return np.block([[z, eye], [-eye, z]])


@dataclass(frozen=True, eq=False)
class BoundaryProblem:
    """Sampled family of boundary problems over t in [0, 1].

    ``c_func`` (optional) evaluates C_t exactly; otherwise intermediate
    values are linear interpolations of the samples.
    """

    N: int
    B: np.ndarray
    ts: np.ndarray
    cs: np.ndarray
    lambda0: np.ndarray
    lambda1: np.ndarray
    c_func: object = field(default=None, repr=False)

    def c_at(self, t):
        if self.c_func is not None:
            return np.asarray(self.c_func(t), dtype=float)
        i = np.searchsorted(self.ts, t)
        if i == 0:
            return self.cs[0]
        if i >= len(self.ts):
            return self.cs[-1]
        t0, t1 = self.ts[i - 1], self.ts[i]
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * self.cs[i - 1] + w * self.cs[i]

    def solution(self, t, s):
        return fundamental_solution(self.B, self.c_at(t), s)


def boundary_problem(N, B, family, lambda0, lambda1, c_func=None):
    """Validated BoundaryProblem.

    ``family`` is a sequence of (t, C_t) covering [0, 1].
    """
    if N < 1:
        raise ValidationError("N must be >= 1", where="boundary_problem")
    m = 2 * N
    B = np.asarray(B, dtype=float)
    if B.shape != (m, m):
        raise ValidationError("B has wrong shape", where="boundary_problem")
    if np.linalg.norm(B - B.T, 2) > 1e-10 * max(1.0, np.linalg.norm(B, 2)):
        raise ValidationError("B not symmetric", where="boundary_problem")
    jj = JJ(N)
    if np.linalg.norm(jj @ B + B @ jj, 2) > 1e-9 * max(
        1.0, np.linalg.norm(B, 2)
    ):
        raise ValidationError(
            "B must anticommute with the structure matrix "
            "(otherwise the flow is not symplectic)",
            where="boundary_problem",
        )
    ts = np.array([float(t) for t, _ in family])
    if (
        ts.size < 2
        or abs(ts[0]) > 1e-12
        or abs(ts[-1] - 1.0) > 1e-12
        or np.any(np.diff(ts) <= 0)
    ):
        raise ValidationError(
            "family times must increase from 0 to 1", where="boundary_problem"
        )
    cs = []
    for _, C in family:
        C = np.asarray(C, dtype=float)
        if C.shape != (m, m):
            raise ValidationError(
                "C has wrong shape", where="boundary_problem"
            )
        if np.linalg.norm(C - C.T, 2) > 1e-10 * max(
            1.0, np.linalg.norm(C, 2)
        ):
            raise ValidationError("C not symmetric", where="boundary_problem")
        cs.append(C)
    space = standard_space(N)
    f0 = lagrangian(space, np.asarray(lambda0, dtype=float))
    f1 = lagrangian(space, np.asarray(lambda1, dtype=float))
    return BoundaryProblem(
        N=N,
        B=B,
        ts=ts,
        cs=np.array(cs),
        lambda0=f0.F,
        lambda1=f1.F,
        c_func=c_func,
    )


def fundamental_solution(B, C, s):
    """expm(-B + JJ C - s JJ); symplectic for the JJ-form to 1e-9."""
    B = np.asarray(B, dtype=float)
    N = B.shape[0] // 2
    jj = JJ(N)
    Phi = expm(-B + jj @ np.asarray(C, dtype=float) - s * jj)
    res = np.linalg.norm(Phi.T @ jj @ Phi - jj, 2)
    if res > 1e-9 * max(1.0, np.linalg.norm(Phi, 2) ** 2):
        raise ValidationError(
            "flow not symplectic (check B, C)", where="fundamental_solution"
        )
    return Phi


# --------------------------------------------------------------------------
# eigenvalue detection at fixed t
# --------------------------------------------------------------------------


def _shoot(bp, t, s):
    Phi = bp.solution(t, s)
    M = np.hstack([Phi @ bp.lambda0, bp.lambda1])
    det = float(np.linalg.det(M))
    smin = float(np.linalg.svd(M, compute_uv=False)[-1])
    return det, smin


def _multiplicity(bp, t, s, thresh=1e-6):
    Phi = bp.solution(t, s)
    M = np.hstack([Phi @ bp.lambda0, bp.lambda1])
    sv = np.linalg.svd(M, compute_uv=False)
    return max(1, int(np.count_nonzero(sv < thresh)))


def _scan_cell(bp, t, lo, hi, flo, fhi, slope, tol, depth, found):
    """Collect zeros of the shooting determinant inside (lo, hi).

    Sign change: one bracketed root.  No sign change: the cell can only
    hide roots if the smallest singular value could descend to zero and
    come back inside it, which the slope bound excludes once the edges
    clear ``slope * width``; otherwise split until individual roots show
    up as sign changes or the dip search resolves a genuine tangency.
    """
    (dlo, mlo), (dhi, mhi) = flo, fhi
    if (dlo < 0.0) != (dhi < 0.0):
        found.append(
            float(
                brentq(
                    lambda s: _shoot(bp, t, s)[0],
                    lo,
                    hi,
                    xtol=tol.bisect_t,
                )
            )
        )
        return
    if min(mlo, mhi) >= slope * (hi - lo):
        return
    if depth > 0:
        mid = 0.5 * (lo + hi)
        fmid = _shoot(bp, t, mid)
        if fmid[1] < 1e-9:
            found.append(mid)
            return
        _scan_cell(bp, t, lo, mid, flo, fmid, slope, tol, depth - 1, found)
        _scan_cell(bp, t, mid, hi, fmid, fhi, slope, tol, depth - 1, found)
        return
    if min(mlo, mhi) < 0.15:
        res = minimize_scalar(
            lambda s: _shoot(bp, t, s)[1],
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": tol.bisect_t},
        )
        if res.fun < 1e-6:
            found.append(float(res.x))


def eigenvalues_near(bp, t, lo, hi, tol=DEFAULT_TOL):
    """Eigenvalues in [lo, hi] at family time t, with multiplicity.

    Bracketed on determinant sign changes over a grid finer than the
    ladder spacing, refined to ``tol.bisect_t`` in s, with recursive
    subdivision of cells whose edges look near-singular (close root
    pairs, roots next to grid points).
    """
    grid = np.arange(lo, hi + _GRID, _GRID)
    vals = [_shoot(bp, t, float(s)) for s in grid]
    # empirical bound on how fast the smallest singular value can move;
    # V-shaped cells understate their own slope, so take the global max
    slope = max(
        2.0,
        3.0
        * max(
            abs(vals[i + 1][1] - vals[i][1]) / (grid[i + 1] - grid[i])
            for i in range(len(grid) - 1)
        ),
    )
    found = [float(s) for s, (_, m) in zip(grid, vals) if m < 1e-9]
    for i in range(len(grid) - 1):
        _scan_cell(
            bp,
            t,
            float(grid[i]),
            float(grid[i + 1]),
            vals[i],
            vals[i + 1],
            slope,
            tol,
            5,
            found,
        )
    found.sort()
    out = []
    for s in found:
        if out and s - out[-1] <= 100.0 * tol.bisect_t:
            continue
        out.extend([s] * _multiplicity(bp, t, s))
    return np.array([s for s in out if lo - 1e-12 <= s <= hi + 1e-12])


# --------------------------------------------------------------------------
# the flow count
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralFlowReport:
    value: int
    partition: np.ndarray
    epsilons: np.ndarray
    trace: tuple
    diagnostics: dict


def _match_sets(prev, cur, reach):
    """Pairs (i, j) of nearby values; unmatched entries are ignored."""
    if len(prev) == 0 or len(cur) == 0:
        return []
    cost = np.abs(cur[None, :] - prev[:, None])
    rows, cols = linear_sum_assignment(cost)
    return [
        (i, j) for i, j in zip(rows, cols) if cost[i, j] <= reach
    ]


def _blocked_line(prev, cur, pairs):
    out = []
    for i, j in pairs:
        a, b = prev[i], cur[j]
        lo, hi = min(a, b), max(a, b)
        lo = max(lo, 0.0)
        hi = min(hi, _EPS_CAP)
        if hi >= lo and hi > 0.0:
            out.append((lo, hi))
    return out


def _free_gaps_line(blocked, cap):
    gaps = []
    cursor = 0.0
    for lo, hi in sorted(blocked):
        if hi < cursor:
            continue
        if lo > cursor:
            gaps.append((cursor, min(lo, cap)))
        cursor = max(cursor, hi)
        if cursor >= cap:
            break
    if cursor < cap:
        gaps.append((cursor, cap))
    return [(lo, hi) for lo, hi in gaps if hi > lo]


def _flow_eps(prev, cur, pairs, tol):
    gaps = _free_gaps_line(_blocked_line(prev, cur, pairs), _EPS_CAP)
    if not gaps:
        return None
    width, lo, hi = max((hi - lo, lo, hi) for lo, hi in gaps)
    if width / 2.0 < tol.clearance:
        return None
    return 0.5 * (lo + hi)


def _count_line(vals, eps, snap):
    return int(np.count_nonzero((vals >= -snap) & (vals <= eps + snap)))


def spectral_flow(bp, window=8.0, tol=DEFAULT_TOL, nodes=25, compute_trace=False):
    """Net count of eigenvalues crossing 0 as t sweeps [0, 1].

    Preconditions: no eigenvalue within 1e-8 of +-window at t = 0 or 1.
    AmbiguityError when no admissible test value exists at the achievable
    time resolution (tangential crossing).

    Starts from ``nodes`` uniform time samples and inserts midpoints until
    adjacent spectra near 0 are in slow-motion correspondence, so the
    count is independent of the family's own sampling density.  The
    full-window eigenvalue trace is only computed when ``compute_trace``
    is set (it costs more than the flow itself).
    """
    for t_end in (0.0, 1.0):
        for edge in (-window, window):
            near = eigenvalues_near(
                bp, t_end, edge - 0.5, edge + 0.5, tol
            )
            if near.size and np.min(np.abs(near - edge)) < tol.flow_guard:
                raise PreconditionError(
                    f"eigenvalue within guard of {edge} at t={t_end}",
                    where="spectral_flow",
                )

    spectra = {}

    def spec(t):
        if t not in spectra:
            spectra[t] = eigenvalues_near(bp, t, _DETECT_LO, _DETECT_HI, tol)
        return spectra[t]

    def tracked(s):
        return _TRACK_LO <= s <= _TRACK_HI

    def step_ok(prev, cur):
        # matched pairs near the counting region must move slowly, and
        # nothing may appear or vanish there between adjacent samples
        pairs = _match_sets(prev, cur, reach=2.0)
        mp, mc = set(), set()
        for a, b in pairs:
            mp.add(a)
            mc.add(b)
            if (tracked(prev[a]) or tracked(cur[b])) and abs(
                cur[b] - prev[a]
            ) > _MOTION:
                return False
        for k, s in enumerate(prev):
            if k not in mp and tracked(s):
                return False
        for k, s in enumerate(cur):
            if k not in mc and tracked(s):
                return False
        return True

    ts = [float(t) for t in np.linspace(0.0, 1.0, max(2, nodes))]
    i = 0
    while i < len(ts) - 1:
        if step_ok(spec(ts[i]), spec(ts[i + 1])):
            i += 1
            continue
        if ts[i + 1] - ts[i] <= 1e-9 or len(ts) > 5000:
            raise AmbiguityError(
                "eigenvalue tracking did not stabilize",
                where="spectral_flow",
            )
        ts.insert(i + 1, 0.5 * (ts[i] + ts[i + 1]))

    total = 0
    epsilons = []
    snap = tol.flow_snap
    for i in range(len(ts) - 1):
        prev, cur = spec(ts[i]), spec(ts[i + 1])
        pairs = _match_sets(prev, cur, reach=2.0)
        eps = _flow_eps(prev, cur, pairs, tol)
        if eps is None:
            raise AmbiguityError(
                "no admissible test value (tangential crossing?)",
                where="spectral_flow",
            )
        epsilons.append(eps)
        total += _count_line(cur, eps, snap) - _count_line(prev, eps, snap)

    trace = None
    if compute_trace:
        trace = eigenvalue_trace(bp, window=window, tol=tol)
    return SpectralFlowReport(
        value=int(total),
        partition=np.array(ts),
        epsilons=np.array(epsilons),
        trace=trace,
        diagnostics={"time_samples": len(ts)},
    )


def eigenvalue_trace(bp, window=8.0, tol=DEFAULT_TOL):
    """Per-family-sample eigenvalue lists inside [-window, window]."""
    return tuple(
        (float(t), tuple(eigenvalues_near(bp, float(t), -window, window, tol)))
        for t in bp.ts
    )


# --------------------------------------------------------------------------
# the Maslov side
# --------------------------------------------------------------------------


def cauchy_data_path(bp, tol=DEFAULT_TOL):
    """Path of graph Lagrangians {(v, Phi_t v)} in the doubled space.

    Returns (path, boundary) where ``boundary`` is the lambda0 ⊞ lambda1
    frame the coincidence theorem pairs the path with.
    """
    base = standard_space(bp.N)
    bs = box_space(base)
    eye = np.eye(2 * bp.N)

    def frame_at(t):
        Phi = bp.solution(t, 0.0)
        return lagrangian(bs.space, np.vstack([eye, Phi]))

    samples = tuple((float(t), frame_at(float(t))) for t in bp.ts)
    path = LagrangianPath(samples=samples, refiner=frame_at)
    z = np.zeros((2 * bp.N, bp.N))
    boundary = lagrangian(
        bs.space,
        np.block([[bp.lambda0, z], [z, bp.lambda1]]),
    )
    return path, boundary


def verify_coincidence(bp, window=8.0, tol=DEFAULT_TOL):
    """Both sides of the coincidence theorem: {sf, mas, equal}."""
    sf = spectral_flow(bp, window=window, tol=tol)
    path, boundary = cauchy_data_path(bp, tol)
    mas = maslov(path, boundary, tol)
    return {
        "sf": int(sf.value),
        "mas": int(mas.value),
        "equal": bool(sf.value == mas.value),
    }
