"""Single-qubit QSP: signal rotation, phase circuit, response polynomials, phase fitting.

The circuit for phases ``phi[0..d]`` is

    U(a) = R(phi[0]) @ W(a) @ R(phi[1]) @ W(a) @ ... @ W(a) @ R(phi[d])

with ``R(phi) = diag(exp(i phi), exp(-i phi))`` and
``W(a) = [[a, i s], [i s, a]]``, ``s = sqrt(1 - a^2)``.  Then
``U(a)[0, 0] = P(a)`` and ``U(a)[0, 1] = i s Q(a)`` with ``deg P <= d``,
``deg Q <= d - 1``, P of parity ``d mod 2`` and ``|P|^2 + (1 - a^2)|Q|^2 = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import least_squares

from .errors import CapError, DomainError, InvalidInput, ParityError
from .sim import make_rng

BOUNDARY = 1.0 - 1e-9


def as_phases(phi) -> np.ndarray:
    """Validate a phase sequence (length >= 1, finite) and return it as a float array."""
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 1 or phi.size < 1:
        raise InvalidInput("a phase sequence needs at least one angle")
    if not np.all(np.isfinite(phi)):
        raise InvalidInput("phase angles must be finite")
    return phi


def check_signal(a):
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(np.abs(a) > 1.0):
        raise DomainError(f"signal values must lie in [-1, 1], got {a!r}")
    return a


def chebyshev_nodes(n: int) -> np.ndarray:
    """cos((2j+1) pi / 2n) for j = 0..n-1 (descending from near 1 to near -1)."""
    j = np.arange(n)
    return np.cos((2 * j + 1) * np.pi / (2 * n))


def signal_operator(a: float) -> np.ndarray:
    a = float(check_signal(a))
    s = np.sqrt(max(0.0, 1.0 - a * a))
    return np.array([[a, 1j * s], [1j * s, a]], dtype=complex)


def phase_gate(phi: float) -> np.ndarray:
    if not np.isfinite(phi):
        raise InvalidInput(f"phase must be finite, got {phi!r}")
    e = np.exp(1j * phi)
    return np.array([[e, 0], [0, np.conj(e)]], dtype=complex)


def qsp_matrices(phases, a) -> np.ndarray:
    """Broadcasted QSP unitaries.

    ``phases`` has shape ``(..., d+1)`` and ``a`` any shape broadcastable with
    ``phases.shape[:-1]``; the result has shape ``broadcast + (2, 2)``.
    """
    phases = np.asarray(phases, dtype=float)
    a = check_signal(a)
    s = np.sqrt(np.clip(1.0 - a * a, 0.0, None))
    e = np.exp(1j * phases)
    shape = np.broadcast_shapes(phases.shape[:-1], a.shape)
    e0 = np.broadcast_to(e[..., 0], shape)
    u00 = e0.astype(complex)
    u01 = np.zeros(shape, dtype=complex)
    u10 = np.zeros(shape, dtype=complex)
    u11 = np.conj(e0)
    is_ = 1j * s
    for k in range(1, phases.shape[-1]):
        ek = e[..., k]
        v00 = (u00 * a + u01 * is_) * ek
        v01 = (u00 * is_ + u01 * a) * np.conj(ek)
        v10 = (u10 * a + u11 * is_) * ek
        v11 = (u10 * is_ + u11 * a) * np.conj(ek)
        u00, u01, u10, u11 = v00, v01, v10, v11
    return np.stack([np.stack([u00, u01], -1), np.stack([u10, u11], -1)], -2)


def qsp_p(phases, a) -> np.ndarray:
    """Broadcasted P(a) = <0|U(a)|0>; only the first row of U is propagated."""
    phases = np.asarray(phases, dtype=float)
    a = check_signal(a)
    is_ = 1j * np.sqrt(np.clip(1.0 - a * a, 0.0, None))
    e = np.exp(1j * phases)
    shape = np.broadcast_shapes(phases.shape[:-1], a.shape)
    u00 = np.broadcast_to(e[..., 0], shape).astype(complex)
    u01 = np.zeros(shape, dtype=complex)
    for k in range(1, phases.shape[-1]):
        ek = e[..., k]
        u00, u01 = (u00 * a + u01 * is_) * ek, (u00 * is_ + u01 * a) * np.conj(ek)
    return u00


def qsp_unitary(phi, a: float) -> np.ndarray:
    phi = as_phases(phi)
    return qsp_matrices(phi, float(check_signal(a)))


@dataclass(frozen=True)
class QspResponse:
    p_value: complex
    q_value: complex
    a: float

    @property
    def identity_residual(self) -> float:
        return abs(self.p_value) ** 2 + (1.0 - self.a ** 2) * abs(self.q_value) ** 2 - 1.0


def _cheb_interp(nodes, values, deg):
    """Exact Chebyshev-basis interpolation (square system); complex values allowed."""
    return np.linalg.solve(C.chebvander(nodes, deg), values)


def q_values(phi, a) -> np.ndarray:
    """Q(a) for an array of signal values, extrapolating near |a| = 1."""
    phi = as_phases(phi)
    a = np.atleast_1d(check_signal(a))
    d = phi.size - 1
    out = np.zeros(a.shape, dtype=complex)
    if d == 0:
        return out
    interior = np.abs(a) < BOUNDARY
    if np.any(interior):
        ai = a[interior]
        u = qsp_matrices(phi, ai)
        out[interior] = u[..., 0, 1] / (1j * np.sqrt(1.0 - ai * ai))
    if not np.all(interior):
        nodes = chebyshev_nodes(d)
        un = qsp_matrices(phi, nodes)
        qn = un[..., 0, 1] / (1j * np.sqrt(1.0 - nodes * nodes))
        coef = _cheb_interp(nodes, qn, d - 1)
        out[~interior] = C.chebval(a[~interior], coef)
    return out


def response(phi, a: float) -> QspResponse:
    phi = as_phases(phi)
    a = float(check_signal(a))
    p = complex(qsp_matrices(phi, a)[0, 0])
    q = complex(q_values(phi, a)[0])
    return QspResponse(p, q, a)


def real_response(phi, a) -> float:
    return float(np.real(qsp_p(as_phases(phi), float(check_signal(a)))))


def prob_response(phi, a) -> float:
    return float(abs(qsp_p(as_phases(phi), float(check_signal(a)))) ** 2)


def interpolate_p(phi, degree: int | None = None) -> np.ndarray:
    """Monomial coefficients of P, lowest order first.

    P is sampled at ``degree + 1`` Chebyshev nodes (``degree`` defaults to the
    circuit degree) and interpolated exactly.  Passing a larger ``degree`` is a
    way to check that the surplus coefficients vanish.
    """
    phi = as_phases(phi)
    deg = phi.size - 1 if degree is None else int(degree)
    if deg < 0:
        raise InvalidInput("interpolation degree must be non-negative")
    nodes = chebyshev_nodes(deg + 1)
    cheb = _cheb_interp(nodes, qsp_p(phi, nodes), deg)
    out = np.zeros(deg + 1, dtype=complex)
    re, im = C.cheb2poly(cheb.real), C.cheb2poly(cheb.imag)
    out[: re.size] += re
    out[: im.size] += 1j * im
    return out


# ---------------------------------------------------------------------------
# phase fitting


@dataclass
class SolverOptions:
    tol: float = 1e-3
    cap_margin: float = 1e-3
    parity_tol: float = 1e-6
    restarts: int = 8
    init_sigma: float = 0.1
    seed: int = 0
    max_iters: int = 2000


@dataclass
class FitReport:
    residual_max: float
    residual_l2: float
    grid: np.ndarray = field(repr=False)
    iterations: int
    converged: bool
    parity_discarded: float = 0.0
    restart: int = 0

    def to_dict(self) -> dict:
        return {
            "residual_max": self.residual_max,
            "residual_l2": self.residual_l2,
            "grid_size": int(len(self.grid)),
            "iterations": self.iterations,
            "converged": self.converged,
            "parity_discarded": self.parity_discarded,
            "restart": self.restart,
        }


def _eval_target(target: Callable, grid: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(target(grid), dtype=float)
        if vals.shape != grid.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([float(target(float(x))) for x in grid])
    if not np.all(np.isfinite(vals)):
        raise InvalidInput("target produced non-finite values on the grid")
    return vals


def _shift_jacobian(phi: np.ndarray, grid: np.ndarray) -> np.ndarray:
    # each phase enters P through exp(+-i phi_k) only: dP/dphi_k = [P(+pi/2) - P(-pi/2)] / 2
    n = phi.size
    shifts = np.eye(n) * (np.pi / 2)
    plus = qsp_p((phi + shifts)[:, None, :], grid)
    minus = qsp_p((phi - shifts)[:, None, :], grid)
    return (np.real(plus - minus) / 2.0).T


def solve_phases(
    target: Callable,
    degree: int,
    grid_size: int | None = None,
    options: SolverOptions | None = None,
) -> tuple[np.ndarray, FitReport]:
    """Fit phases so that Re P matches ``target`` on Chebyshev nodes.

    Each restart starts from zero phases plus N(0, init_sigma^2) noise and is
    refined with Levenberg-Marquardt on the node residuals, using the exact
    parameter-shift Jacobian.  The winner is the restart with the smallest
    max residual (ties broken by restart index).
    """
    opts = options or SolverOptions()
    if degree < 1:
        raise InvalidInput(f"degree must be >= 1, got {degree}")
    m = 4 * degree if grid_size is None else int(grid_size)
    if m < degree + 1:
        raise InvalidInput(f"grid_size {m} too small for degree {degree}")
    grid = chebyshev_nodes(m)
    raw = _eval_target(target, grid)
    # Chebyshev nodes are symmetric: grid[::-1] == -grid
    sign = -1.0 if degree % 2 else 1.0
    projected = 0.5 * (raw + sign * raw[::-1])
    discarded = float(np.max(np.abs(raw - projected)))
    if discarded > opts.parity_tol:
        parity = "odd" if degree % 2 else "even"
        raise ParityError(
            f"target has a {discarded:.3g} component outside the {parity} class of degree {degree}"
        )
    peak = float(np.max(np.abs(projected)))
    if peak > 1.0 - opts.cap_margin:
        raise CapError(f"|target| reaches {peak:.6g} on the grid (limit {1.0 - opts.cap_margin:.6g})")

    def residual(phi):
        return np.real(qsp_p(phi, grid)) - projected

    def jac(phi):
        return _shift_jacobian(phi, grid)

    seeds = np.random.SeedSequence(opts.seed).spawn(opts.restarts)
    best = None
    for idx, ss in enumerate(seeds):
        x0 = make_rng(ss).normal(0.0, opts.init_sigma, degree + 1)
        sol = least_squares(
            residual, x0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
            max_nfev=opts.max_iters,
        )
        r = residual(sol.x)
        rmax = float(np.max(np.abs(r)))
        if best is None or rmax < best[0]:
            best = (rmax, idx, sol.x.copy(), r, int(sol.nfev))
    rmax, idx, phi, r, nfev = best
    phi = np.mod(phi + np.pi, 2 * np.pi) - np.pi
    r = residual(phi)
    rmax = float(np.max(np.abs(r)))
    report = FitReport(
        residual_max=rmax,
        residual_l2=float(np.linalg.norm(r)),
        grid=grid,
        iterations=nfev,
        converged=rmax <= opts.tol,
        parity_discarded=discarded,
        restart=idx,
    )
    return phi, report
