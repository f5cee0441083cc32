"""Degradation and less-noisy orders between channels and channel families.

Degradation V = W o V' is decided exactly (up to tolerance) as a linear
feasibility problem over the stochastic-matrix polytope.  Less noisiness is
decided through the concavity of F(P) = I(P;W) - I(P;V) on the input simplex:
a midpoint violation is itself a binary-auxiliary counterexample, so negative
verdicts are sound constructions while positive verdicts are numerical
evidence and flagged as such.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from .channels import ChannelFamily, Distribution, WiretapPair, mix
from .errors import ValidationError
from .info import mutual_information

LP_TOL = 1e-9
GRADE_ORDER = {"none": 0, "weak": 1, "strong": 2, "severe": 3}


@dataclass(frozen=True)
class OrderVerdict:
    """Result of a weak/strong/severe classification.

    ``grade`` is the strongest level that held; grades are downward closed.
    ``witness`` documents the first failure of the next level up, so a
    ``strong`` verdict carries the (q, q') pair or distribution that broke
    ``severe``.
    """

    grade: str
    witness: dict = field(default_factory=dict)
    grid_resolution: int | None = None
    numerically_supported: bool = False

    def at_least(self, grade: str) -> bool:
        return GRADE_ORDER[self.grade] >= GRADE_ORDER[grade]


def is_degraded(v: np.ndarray, w: np.ndarray, tol: float = LP_TOL):
    """Whether V(z|x) = sum_y W(y|x) V'(z|y) for some row-stochastic V'.

    Solved by minimizing the worst-entry residual t subject to V' lying in
    the stochastic polytope; degradation holds iff the optimum t <= tol.
    Returns (bool, V' or None).  On failure the infeasibility certificate is
    the optimal residual, available via ``degradation_residual``.
    """
    t, vprime = degradation_residual(v, w)
    if t <= tol:
        return True, vprime
    return False, None


def degradation_residual(v: np.ndarray, w: np.ndarray):
    """Minimal worst-entry residual of V - W V' over stochastic V', with argmin."""
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if v.ndim != 2 or w.ndim != 2 or v.shape[0] != w.shape[0]:
        raise ValidationError("channels must share the input alphabet")
    nx, ny = w.shape
    nz = v.shape[1]
    nvars = ny * nz + 1  # V' entries then the residual t

    def var(y, z):
        return y * nz + z

    t_idx = ny * nz
    c = np.zeros(nvars)
    c[t_idx] = 1.0

    # |(W V' - V)[x, z]| <= t, two inequalities per entry.
    a_ub = []
    b_ub = []
    for x in range(nx):
        for z in range(nz):
            row = np.zeros(nvars)
            for y in range(ny):
                row[var(y, z)] = w[x, y]
            row[t_idx] = -1.0
            a_ub.append(row.copy())
            b_ub.append(v[x, z])
            row2 = -row
            row2[t_idx] = -1.0
            a_ub.append(row2)
            b_ub.append(-v[x, z])

    a_eq = np.zeros((ny, nvars))
    for y in range(ny):
        a_eq[y, var(y, 0):var(y, nz - 1) + 1] = 1.0
    b_eq = np.ones(ny)

    bounds = [(0.0, 1.0)] * (ny * nz) + [(0.0, None)]
    res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"degradation LP failed: {res.message}")
    vprime = res.x[: ny * nz].reshape(ny, nz)
    return float(res.x[t_idx]), vprime


def _concavity_defect(w, v, p1, p2, lam):
    """F(mixture) - lam F(p1) - (1-lam) F(p2); negative values witness a failure."""

    def f(p):
        return mutual_information(p, w) - mutual_information(p, v)

    mixture = lam * p1 + (1.0 - lam) * p2
    return f(mixture) - lam * f(p1) - (1.0 - lam) * f(p2)


def _simplex_grid(dim: int, steps: int) -> np.ndarray:
    """All points of the (dim-1)-simplex with coordinates multiples of 1/steps."""
    pts = []
    for combo in itertools.combinations_with_replacement(range(dim), steps):
        counts = np.bincount(combo, minlength=dim)
        pts.append(counts / steps)
    return np.array(pts)


def is_less_noisy(w: np.ndarray, v: np.ndarray, search_budget: int = 64,
                  grid_steps: int = 8, tol: float = 1e-9, seed: int = 0):
    """Whether I(U;Y) >= I(U;Z) for every U -> X -> (Y, Z).

    A failing concavity midpoint yields the explicit binary-U witness
    (p1, p2, lam); the returned dict then has ``witness`` set.  A clean pass
    is numerical evidence only and is reported with ``numerically_supported``.
    """
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if w.shape[0] != v.shape[0]:
        raise ValidationError("channels must share the input alphabet")
    dim = w.shape[0]
    grid = _simplex_grid(dim, grid_steps)

    for i in range(len(grid)):
        for j in range(i + 1, len(grid)):
            defect = _concavity_defect(w, v, grid[i], grid[j], 0.5)
            if defect < -tol:
                return False, {"p1": grid[i], "p2": grid[j], "lam": 0.5,
                               "defect": float(defect)}

    rng = np.random.Generator(np.random.Philox(seed))
    best = None
    for _ in range(search_budget):
        p1 = rng.dirichlet(np.ones(dim))
        p2 = rng.dirichlet(np.ones(dim))
        lam = float(rng.uniform(0.05, 0.95))

        def objective(z):
            x1 = np.abs(z[:dim]) + 1e-12
            x2 = np.abs(z[dim:2 * dim]) + 1e-12
            lam_ = min(max(z[-1], 0.001), 0.999)
            return _concavity_defect(w, v, x1 / x1.sum(), x2 / x2.sum(), lam_)

        z0 = np.concatenate([p1, p2, [lam]])
        res = minimize(objective, z0, method="Nelder-Mead",
                       options={"maxiter": 200, "xatol": 1e-8, "fatol": 1e-12})
        if best is None or res.fun < best[0]:
            x1 = np.abs(res.x[:dim]) + 1e-12
            x2 = np.abs(res.x[dim:2 * dim]) + 1e-12
            best = (float(res.fun), x1 / x1.sum(), x2 / x2.sum(),
                    float(min(max(res.x[-1], 0.001), 0.999)))
    if best is not None and best[0] < -tol:
        return False, {"p1": best[1], "p2": best[2], "lam": best[3], "defect": best[0]}
    return True, {"numerically_supported": True, "min_defect": best[0] if best else 0.0}


def _pairwise_verdict(check, ns: int, grid_resolution: int) -> OrderVerdict:
    """Shared weak -> strong -> severe ladder; ``check(a, b)`` compares mixtures."""
    for s in range(ns):
        ok, info = check(_unit(ns, s), _unit(ns, s))
        if not ok:
            return OrderVerdict("none", {"s": s, **info}, grid_resolution)
    for s in range(ns):
        for s2 in range(ns):
            ok, info = check(_unit(ns, s), _unit(ns, s2))
            if not ok:
                return OrderVerdict("weak", {"s": s, "s_prime": s2, **info},
                                    grid_resolution)
    grid = _simplex_grid(ns, grid_resolution)
    for q in grid:
        for q2 in grid:
            ok, info = check(q, q2)
            if not ok:
                return OrderVerdict("strong", {"q": q, "q_prime": q2, **info},
                                    grid_resolution)
    return OrderVerdict("severe", {}, grid_resolution)


def _unit(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


def classify_degradation(pair: WiretapPair, grid_resolution: int = 32,
                         tol: float = LP_TOL) -> OrderVerdict:
    """Strongest degradation grade of the wiretap family w.r.t. the main family."""
    w_fam, v_fam = pair.main, pair.wiretap

    def check(q_main, q_wiretap):
        wq = np.tensordot(q_main, w_fam.matrices, axes=(0, 0))
        vq = np.tensordot(q_wiretap, v_fam.matrices, axes=(0, 0))
        residual, _ = degradation_residual(vq, wq)
        return residual <= tol, ({} if residual <= tol else {"residual": residual})

    return _pairwise_verdict(check, pair.num_states, grid_resolution)


def classify_less_noisy(pair: WiretapPair, grid_resolution: int = 8,
                        search_budget: int = 16, seed: int = 0) -> OrderVerdict:
    """Strongest less-noisy grade of the main family over the wiretap family.

    Positive grades are numerical evidence (flagged); any failure carries the
    explicit binary-auxiliary witness.
    """
    w_fam, v_fam = pair.main, pair.wiretap

    def check(q_main, q_wiretap):
        wq = np.tensordot(q_main, w_fam.matrices, axes=(0, 0))
        vq = np.tensordot(q_wiretap, v_fam.matrices, axes=(0, 0))
        return is_less_noisy(wq, vq, search_budget=search_budget, seed=seed)

    verdict = _pairwise_verdict(check, pair.num_states, grid_resolution)
    return OrderVerdict(verdict.grade, verdict.witness, verdict.grid_resolution,
                        numerically_supported=verdict.grade != "none")


def csr_max_error_positive(family: ChannelFamily, tol: float = 1e-12):
    """Whether some input pair stays distinguishable under every state.

    Returns (flag, witness): the witness is the first (x, x') such that for
    all states s some output separates the two rows by more than tol.
    """
    m = family.matrices
    for x in range(family.num_inputs):
        for x2 in range(x + 1, family.num_inputs):
            separated = np.all(np.abs(m[:, x, :] - m[:, x2, :]).max(axis=1) > tol)
            if separated:
                return True, (x, x2)
    return False, None
