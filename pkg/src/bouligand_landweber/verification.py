"""Empirical instruments for the analytic assumptions behind the iteration.

The convergence theory rests on a tangential-cone-type bound: the
linearization error ||F(u_hat) - F(u) - G_u(u_hat - u)||_M stays below a
multiple mu < 1 of the nonlinear residual ||F(u_hat) - F(u)||_M on a ball.
No computable constants are available for this bound, so this module
measures it: :func:`tcc_ratio` evaluates the quotient for a given pair, and
:func:`tcc_survey` samples seeded random pairs around a center.  The
companion quantity is the lumped area of the set where the two states
disagree in sign, computed by :func:`mismatch_measure`; the surveys report
both so that the ratio can be related to the mismatch (the fitted constants
are diagnostics, not assertions).

The module also hosts the brute-force oracle harness for the forward solver
and a randomized self-adjointness check for the subderivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bouligand import apply_subderivative, build_linearized
from .forward import ForwardProblem, brute_force_forward, solve_forward
from .mesh_fem import build_mesh, m_inner, m_norm, values_of


class DegeneratePairError(ValueError):
    """The nonlinear residual of a pair is too small to form the ratio."""


@dataclass(frozen=True)
class TCCEstimate:
    """Linearization-error ratio and sign-mismatch area of one pair."""

    ratio: float
    mismatch: float
    radius: float


def mismatch_measure(D: np.ndarray, y, y_hat) -> float:
    """Lumped area of the set where y and y_hat disagree in sign.

    Counts nodes with (y_i <= 0 and y_hat_i > 0) or (y_i > 0 and
    y_hat_i <= 0), each weighted by its lumped-mass entry D_ii; a quadrature
    surrogate for the Lebesgue measure of the continuum mismatch set.
    """
    a, b = values_of(y), values_of(y_hat)
    D = np.asarray(D, dtype=float)
    if a.shape != b.shape or D.shape != a.shape:
        raise ValueError(f"dimension mismatch: D {D.shape}, y {a.shape}, y_hat {b.shape}")
    flipped = (a <= 0.0) != (b <= 0.0)
    return float(np.sum(D[flipped]))


def tcc_ratio(problem: ForwardProblem, u, u_hat) -> TCCEstimate:
    """Measure the linearization error of G_u against the residual for one pair.

    Costs one forward solve per argument and one subderivative solve.  Raises
    :class:`DegeneratePairError` when ||F(u_hat) - F(u)||_M falls below
    1e-14 times the pair distance.
    """
    M = problem.M
    uv, uhv = values_of(u), values_of(u_hat)
    radius = m_norm(M, uhv - uv)
    sol = solve_forward(problem, uv)
    sol_hat = solve_forward(problem, uhv)
    state_diff = sol_hat.y.values - sol.y.values
    denom = m_norm(M, state_diff)
    if denom <= 1e-14 * radius:
        raise DegeneratePairError(
            f"degenerate pair: residual {denom:.3e} below 1e-14 * radius {radius:.3e}"
        )
    op = build_linearized(problem, sol.y)
    linearized = apply_subderivative(op, M, uhv - uv)
    ratio = m_norm(M, state_diff - linearized.values) / denom
    return TCCEstimate(
        ratio=ratio,
        mismatch=mismatch_measure(problem.D, sol.y.values, sol_hat.y.values),
        radius=radius,
    )


def _smooth_bump(problem: ForwardProblem, rng: np.random.Generator, modes: int = 4) -> np.ndarray:
    """Random low-frequency field: sine modes with 1/(i^2+j^2) weighted coefficients."""
    x1, x2 = problem.mesh.interior_coords()
    out = np.zeros_like(x1)
    for i in range(1, modes + 1):
        for j in range(1, modes + 1):
            c = rng.standard_normal() / (i * i + j * j)
            out += c * np.sin(i * np.pi * x1) * np.sin(j * np.pi * x2)
    return out


@dataclass
class TCCSurvey:
    """Seeded random-pair survey of the tangential-cone ratio around a center.

    Sampling: perturbations are either iid normal nodal vectors ('nodal') or
    smooth low-frequency bumps ('bump'), scaled to a uniform random M-radius
    within the ball; both pair members are drawn around the center.
    """

    estimates: list[TCCEstimate]
    mode: str
    seed: int
    ball_radius: float

    @property
    def max_ratio(self) -> float:
        return max(e.ratio for e in self.estimates)

    def fitted_constants(self, exponents=(4.0, 6.0, 10.0)) -> dict[float, float]:
        """Smallest C with ratio <= C * mismatch^(1/p') over the survey, per p'."""
        out = {}
        for p in exponents:
            quotients = [
                e.ratio / e.mismatch ** (1.0 / p) for e in self.estimates if e.mismatch > 0.0
            ]
            out[p] = max(quotients) if quotients else 0.0
        return out

    def rows(self) -> list[tuple[float, float, float]]:
        return [(e.radius, e.ratio, e.mismatch) for e in self.estimates]


def tcc_survey(
    problem: ForwardProblem,
    center,
    n_pairs: int,
    ball_radius: float = 0.5,
    seed: int = 0,
    mode: str = "nodal",
) -> TCCSurvey:
    """Sample n_pairs random pairs in the M-ball around `center` and measure ratios."""
    if mode not in ("nodal", "bump"):
        raise ValueError(f"unknown sampling mode {mode!r}")
    rng = np.random.default_rng(seed)
    M = problem.M
    c = values_of(center)
    estimates = []
    while len(estimates) < n_pairs:
        pair = []
        for _ in range(2):
            g = rng.standard_normal(c.size) if mode == "nodal" else _smooth_bump(problem, rng)
            r = ball_radius * rng.uniform(0.05, 1.0)
            pair.append(c + g * (r / m_norm(M, g)))
        try:
            estimates.append(tcc_ratio(problem, pair[0], pair[1]))
        except DegeneratePairError:
            continue
    return TCCSurvey(estimates=estimates, mode=mode, seed=seed, ball_radius=ball_radius)


@dataclass
class OracleReport:
    """Result of a brute-force vs semi-smooth Newton comparison sweep."""

    n_h: int
    trials: int
    seed: int
    diffs: np.ndarray
    tolerance: float = 1e-10

    @property
    def max_diff(self) -> float:
        return float(np.max(self.diffs))

    @property
    def failures(self) -> list[int]:
        return [int(i) for i in np.nonzero(self.diffs > self.tolerance)[0]]

    @property
    def passed(self) -> bool:
        return not self.failures


def oracle_sweep(n_h: int, trials: int = 100, seed: int = 0) -> OracleReport:
    """Compare solve_forward against pattern enumeration on seeded random sources.

    Sources are iid uniform on [-1, 1] per interior node; feasible only for
    meshes with at most 16 interior unknowns.
    """
    mesh = build_mesh(n_h)
    if mesh.n_interior > 16:
        raise ValueError(f"enumeration infeasible: {mesh.n_interior} > 16 unknowns")
    problem = ForwardProblem.build(mesh)
    rng = np.random.default_rng(seed)
    diffs = np.empty(trials)
    for t in range(trials):
        u = rng.uniform(-1.0, 1.0, mesh.n_interior)
        y_newton = solve_forward(problem, u).y.values
        y_oracle = brute_force_forward(problem, u).values
        diffs[t] = np.max(np.abs(y_newton - y_oracle))
    return OracleReport(n_h=n_h, trials=trials, seed=seed, diffs=diffs)


@dataclass
class AdjointReport:
    """Randomized self-adjointness and norm-bound probe of the subderivative."""

    n_h: int
    trials: int
    seed: int
    asymmetries: np.ndarray  # relative, per trial
    rayleigh: np.ndarray  # ||G w||_M / ||w||_M per trial

    @property
    def max_asymmetry(self) -> float:
        return float(np.max(self.asymmetries))

    @property
    def max_rayleigh(self) -> float:
        return float(np.max(self.rayleigh))


def adjoint_check(problem: ForwardProblem, trials: int = 50, seed: int = 0) -> AdjointReport:
    """Probe |(h, G w)_M - (w, G h)_M| / (||h||_M ||w||_M) on random triples (u, h, w)."""
    rng = np.random.default_rng(seed)
    M = problem.M
    n = problem.mesh.n_interior
    asym = np.empty(trials)
    rayleigh = np.empty(trials)
    for t in range(trials):
        u = rng.standard_normal(n)
        h = rng.standard_normal(n)
        w = rng.standard_normal(n)
        op = build_linearized(problem, solve_forward(problem, u).y)
        Gw = apply_subderivative(op, M, w).values
        Gh = apply_subderivative(op, M, h).values
        asym[t] = abs(m_inner(M, h, Gw) - m_inner(M, w, Gh)) / (m_norm(M, h) * m_norm(M, w))
        rayleigh[t] = m_norm(M, Gw) / m_norm(M, w)
    return AdjointReport(
        n_h=problem.mesh.n_h, trials=trials, seed=seed, asymmetries=asym, rayleigh=rayleigh
    )
