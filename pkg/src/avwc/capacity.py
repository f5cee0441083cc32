"""Capacity formulas and secrecy-capacity bounds for state-varying channels.

Every solver returns a :class:`BoundResult` carrying the value in bits, the
maximizing input (or prefixed-input) distribution, the adversary argument
that attains the inner optimum, and diagnostics.  Values are clamped at zero,
matching the positivity conventions of the capacity formulas.

Inner adversary minimizations over the state simplex are convex and solved
reliably; outer maximizations over prefix joints are non-concave and handled
by seeded multi-start searches, so lower bounds are certified by their
returned argument while the inner maxima of the converse-side bound are
heuristic and flagged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .channels import ChannelFamily, CostModel, Distribution, WiretapPair
from .errors import ValidationError
from .info import entropy, mutual_information, prefix_mutual_information

GAP_TOL = 1e-5


@dataclass
class BoundResult:
    value: float
    input_dist: np.ndarray | None = None
    prefix_joint: np.ndarray | None = None
    worst_q: np.ndarray | None = None
    worst_s: int | None = None
    diagnostics: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def flagged(self, name: str) -> bool:
        return any(f.startswith(name) for f in self.flags)


@dataclass(frozen=True)
class ConstraintSet:
    """Admissible state distributions for the adversary.

    kinds: ``all-states`` (the whole simplex), ``cost-budget`` (simplex cut by
    an average-cost halfspace), ``type-set`` (an explicit finite list), and
    ``single-type`` (one distribution).
    """

    kind: str
    cost_model: CostModel | None = None
    types: tuple = ()

    @staticmethod
    def all_states() -> "ConstraintSet":
        return ConstraintSet("all-states")

    @staticmethod
    def cost_budget(model: CostModel) -> "ConstraintSet":
        if float(model.per_state_cost.min()) > model.budget:
            raise ValidationError("cost budget admits no state distribution")
        return ConstraintSet("cost-budget", cost_model=model)

    @staticmethod
    def type_set(dists) -> "ConstraintSet":
        types = tuple(np.asarray(d.probs if isinstance(d, Distribution) else d,
                                 dtype=np.float64) for d in dists)
        if not types:
            raise ValidationError("type set must be nonempty")
        return ConstraintSet("type-set", types=types)

    @staticmethod
    def single_type(q) -> "ConstraintSet":
        qv = np.asarray(q.probs if isinstance(q, Distribution) else q, dtype=np.float64)
        return ConstraintSet("single-type", types=(qv,))

    def vertices(self, num_states: int) -> list[np.ndarray]:
        """Extreme points; for cost budgets these are the simplex vertices that
        fit the budget plus every tight edge intersection."""
        if self.kind == "all-states":
            return [_unit(num_states, s) for s in range(num_states)]
        if self.kind in ("type-set", "single-type"):
            return list(self.types)
        model = self.cost_model
        cost = model.per_state_cost
        verts = [_unit(num_states, s) for s in range(num_states) if cost[s] <= model.budget]
        for s in range(num_states):
            for t in range(num_states):
                if cost[s] < model.budget < cost[t]:
                    lam = (cost[t] - model.budget) / (cost[t] - cost[s])
                    verts.append(lam * _unit(num_states, s) + (1 - lam) * _unit(num_states, t))
        return verts


def _unit(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


def _as_probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=np.float64)


# ---------------------------------------------------------------------------
# Generic optimization helpers.

def _max_scalar_unimodal(fn, tol: float = 1e-10):
    """Maximize a unimodal function of one variable on [0, 1]."""
    res = minimize_scalar(lambda t: -fn(t), bounds=(0.0, 1.0), method="bounded",
                          options={"xatol": tol})
    best_t, best_v = float(res.x), float(-res.fun)
    for t in (0.0, 0.5, 1.0):
        v = fn(t)
        if v > best_v:
            best_t, best_v = t, v
    return best_t, best_v


def _min_convex_over_simplex(fn, dim: int, extra_leq=None, seeds: int = 6,
                             seed: int = 0):
    """Minimize a convex function over the probability simplex (optionally cut
    by one linear inequality).  Returns (value, argmin)."""
    if dim == 1:
        return fn(np.ones(1)), np.ones(1)
    if dim == 2 and extra_leq is None:
        t, neg = _max_scalar_unimodal(lambda t: -fn(np.array([1.0 - t, t])))
        return -neg, np.array([1.0 - t, t])

    constraints = [{"type": "eq", "fun": lambda q: q.sum() - 1.0}]
    if extra_leq is not None:
        a, b = extra_leq
        constraints.append({"type": "ineq", "fun": lambda q: b - a @ q})
    bounds = [(0.0, 1.0)] * dim
    rng = np.random.Generator(np.random.Philox(seed))
    starts = [np.full(dim, 1.0 / dim)]
    starts += [_unit(dim, s) for s in range(dim)]
    starts += [rng.dirichlet(np.ones(dim)) for _ in range(seeds)]
    best_v, best_q = np.inf, starts[0]
    for q0 in starts:
        if extra_leq is not None and extra_leq[0] @ q0 > extra_leq[1] + 1e-12:
            continue
        res = minimize(fn, q0, method="SLSQP", bounds=bounds, constraints=constraints,
                       options={"maxiter": 300, "ftol": 1e-12})
        if res.success or res.fun < best_v:
            q = np.clip(res.x, 0.0, 1.0)
            q = q / q.sum()
            v = fn(q)
            if v < best_v:
                best_v, best_q = v, q
    return best_v, best_q


def _max_min_concave_over_simplex(funcs, dim: int, seed: int = 0, extra_starts=()):
    """Maximize min_i f_i(p) over the simplex where each f_i is concave.

    Solved as the epigraph program max t s.t. t <= f_i(p), from several
    deterministic starts.  Returns (value, argmax).
    """
    if dim == 2:
        def g(t):
            p = np.array([1.0 - t, t])
            return min(f(p) for f in funcs)

        t, v = _max_scalar_unimodal(g)
        return v, np.array([1.0 - t, t])

    def neg_obj(z):
        return -z[-1]

    constraints = [{"type": "eq", "fun": lambda z: z[:-1].sum() - 1.0}]
    for f in funcs:
        constraints.append({"type": "ineq", "fun": (lambda f: lambda z: f(z[:-1]) - z[-1])(f)})
    bounds = [(0.0, 1.0)] * dim + [(None, None)]
    rng = np.random.Generator(np.random.Philox(seed))
    starts = [np.full(dim, 1.0 / dim)]
    starts += [0.8 * _unit(dim, s) + 0.2 / dim for s in range(dim)]
    starts += [rng.dirichlet(np.ones(dim)) for _ in range(12)]
    starts += [np.asarray(p, dtype=np.float64) for p in extra_starts]
    best_v, best_p = -np.inf, starts[0]
    for p0 in starts:
        t0 = min(f(p0) for f in funcs)
        z0 = np.concatenate([p0, [t0]])
        res = minimize(neg_obj, z0, method="SLSQP", bounds=bounds,
                       constraints=constraints, options={"maxiter": 500, "ftol": 1e-12})
        p = np.clip(res.x[:-1], 0.0, 1.0)
        total = p.sum()
        if total <= 0:
            continue
        p = p / total
        v = min(f(p) for f in funcs)
        if v > best_v:
            best_v, best_p = v, p
    return best_v, best_p


def _blahut_arimoto(w: np.ndarray, tol: float = 1e-12, max_iter: int = 20_000):
    """Capacity of a fixed channel by the classical alternating update."""
    w = np.asarray(w, dtype=np.float64)
    nx = w.shape[0]
    p = np.full(nx, 1.0 / nx)
    log_w = np.where(w > 0, np.log(np.maximum(w, 1e-300)), 0.0)
    for _ in range(max_iter):
        q = p[:, None] * w
        denom = q.sum(axis=0)
        denom[denom == 0] = 1.0
        d = (w * (log_w - np.log(np.maximum(denom, 1e-300)))).sum(axis=1)
        new_p = p * np.exp(d - d.max())
        new_p /= new_p.sum()
        if np.abs(new_p - p).max() < tol:
            p = new_p
            break
        p = new_p
    return mutual_information(p, w), p


# ---------------------------------------------------------------------------
# Channel capacities.

def avc_capacity_random(family: ChannelFamily, seed: int = 0) -> BoundResult:
    """max over inputs of min over state mixtures of I(X; Y_q).

    The inner problem is convex in q and the outer value is concave in the
    input law, so the saddle value is found by maximizing the certified inner
    minimum; the reported gap compares with the capacity of the worst mixed
    channel found.
    """
    def inner(p):
        return _min_convex_over_simplex(
            lambda q: mutual_information(p, np.tensordot(q, family.matrices, axes=(0, 0))),
            family.num_states, seed=seed)

    def g(p):
        return inner(p)[0]

    if family.num_inputs == 2:
        t, value = _max_scalar_unimodal(lambda t: g(np.array([1.0 - t, t])))
        p_hat = np.array([1.0 - t, t])
    else:
        value, p_hat = _max_min_concave_over_simplex(
            [g], family.num_inputs, seed=seed)
    _, q_hat = inner(p_hat)
    w_mix = np.tensordot(q_hat, family.matrices, axes=(0, 0))
    upper, _ = _blahut_arimoto(w_mix)
    gap = max(0.0, upper - value)
    flags = () if gap <= GAP_TOL else (f"gap:{gap:.3g}",)
    return BoundResult(max(0.0, value), input_dist=p_hat, worst_q=q_hat,
                       diagnostics={"duality_gap": gap, "mixture_capacity": upper},
                       flags=flags)


def avc_csr_capacity(family: ChannelFamily, seed: int = 0) -> BoundResult:
    """max over inputs of min over individual states of I(X; Y_s)."""
    funcs = [
        (lambda s: lambda p: mutual_information(p, family.matrices[s]))(s)
        for s in range(family.num_states)
    ]
    value, p_hat = _max_min_concave_over_simplex(funcs, family.num_inputs, seed=seed)
    per_state = np.array([f(p_hat) for f in funcs])
    worst_s = int(per_state.argmin())
    return BoundResult(max(0.0, value), input_dist=p_hat, worst_s=worst_s,
                       diagnostics={"per_state": per_state})


def evaluate_random_code_objective(family: ChannelFamily, p, seed: int = 0) -> float:
    v, _ = _min_convex_over_simplex(
        lambda q: mutual_information(_as_probs(p), np.tensordot(q, family.matrices, axes=(0, 0))),
        family.num_states, seed=seed)
    return v


def evaluate_csr_objective(family: ChannelFamily, p) -> float:
    pv = _as_probs(p)
    return min(mutual_information(pv, family.matrices[s]) for s in range(family.num_states))


# ---------------------------------------------------------------------------
# Prefix (auxiliary-variable) machinery for wiretap bounds.

def _prefix_channels(rows: np.ndarray, channel: np.ndarray) -> np.ndarray:
    return rows @ channel


def _main_term(pair: WiretapPair, p_u, rows, constraint: ConstraintSet, csr: bool,
               seed: int = 0):
    """Inner minimum of I(U; Y_.) over the admissible adversary."""
    w = pair.main.matrices
    if csr:
        vals = [mutual_information(p_u, _prefix_channels(rows, w[s]))
                for s in range(pair.num_states)]
        s = int(np.argmin(vals))
        return vals[s], _unit(pair.num_states, s)
    if constraint.kind == "single-type":
        q = constraint.types[0]
        return mutual_information(p_u, _prefix_channels(rows, np.tensordot(q, w, axes=(0, 0)))), q
    if constraint.kind == "type-set":
        vals = [mutual_information(p_u, _prefix_channels(rows, np.tensordot(q, w, axes=(0, 0))))
                for q in constraint.types]
        i = int(np.argmin(vals))
        return vals[i], constraint.types[i]

    extra = None
    if constraint.kind == "cost-budget":
        extra = (constraint.cost_model.per_state_cost, constraint.cost_model.budget)

    def fn(q):
        return mutual_information(p_u, _prefix_channels(rows, np.tensordot(q, w, axes=(0, 0))))

    return _min_convex_over_simplex(fn, pair.num_states, extra_leq=extra, seed=seed)


def _wiretap_term(pair: WiretapPair, p_u, rows, constraint: ConstraintSet):
    """Adversary's best eavesdropping value.

    For the unconstrained set this is max_s I(U; Z_s); for constrained kinds
    it is the state-averaged information, linear in the averaging weights and
    therefore maximized at a vertex of the constraint polytope.
    """
    v = pair.wiretap.matrices
    per_state = np.array([mutual_information(p_u, _prefix_channels(rows, v[s]))
                          for s in range(pair.num_states)])
    if constraint.kind == "all-states":
        s = int(per_state.argmax())
        return float(per_state[s]), _unit(pair.num_states, s)
    verts = constraint.vertices(pair.num_states)
    vals = [float(q @ per_state) for q in verts]
    i = int(np.argmax(vals))
    return vals[i], verts[i]


def evaluate_lower_objective(pair: WiretapPair, p_u, rows, constraint: ConstraintSet,
                             csr: bool, seed: int = 0) -> float:
    p_u = _as_probs(p_u)
    rows = np.asarray(rows, dtype=np.float64)
    main, _ = _main_term(pair, p_u, rows, constraint, csr, seed=seed)
    leak, _ = _wiretap_term(pair, p_u, rows, constraint)
    return main - leak


def _prefix_joint(p_u: np.ndarray, rows: np.ndarray) -> np.ndarray:
    return p_u[:, None] * rows


def _optimize_prefix(pair: WiretapPair, constraint: ConstraintSet, csr: bool,
                     cardinality: int, seed: int, warm=None):
    """Seeded multi-start search over prefix joints P_UX of a given cardinality."""
    nx = pair.num_inputs

    def objective_from_params(z):
        p_u, rows = _params_to_prefix(z, cardinality, nx)
        return evaluate_lower_objective(pair, p_u, rows, constraint, csr, seed=seed)

    starts = []
    if cardinality >= nx:
        ident = np.eye(cardinality, nx)
        ident[nx:] = 1.0 / nx
        for w in (np.full(cardinality, 1.0 / cardinality),):
            starts.append(_prefix_to_params(w, ident))
    if cardinality == 2 and nx == 2:
        grid = np.linspace(0.0, 1.0, 9)
        for lam in grid[1:-1]:
            for a in grid:
                for b in grid:
                    if a <= b:
                        starts.append(np.array([lam, a, b]))
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(32 if (cardinality == 2 and nx == 2) else 128):
        p_u = rng.dirichlet(np.ones(cardinality))
        rows = rng.dirichlet(np.ones(nx), size=cardinality)
        starts.append(_prefix_to_params(p_u, rows))
    if warm is not None:
        starts.append(warm)

    scored = [(objective_from_params(z0), i, np.asarray(z0, dtype=np.float64))
              for i, z0 in enumerate(starts)]
    scored.sort(key=lambda t: (-t[0], t[1]))
    best_v, best_z = scored[0][0], scored[0][2]
    for _, _, z0 in scored[:8]:
        res = minimize(lambda z: -objective_from_params(z), z0, method="Nelder-Mead",
                       options={"maxiter": 400, "xatol": 1e-7, "fatol": 1e-10})
        if -res.fun > best_v:
            best_v, best_z = -res.fun, res.x
    p_u, rows = _params_to_prefix(best_z, cardinality, nx)
    return best_v, p_u, rows, best_z


def _params_to_prefix(z, cardinality: int, nx: int):
    z = np.asarray(z, dtype=np.float64)
    if cardinality == 2 and nx == 2:
        lam = float(np.clip(z[0], 0.0, 1.0))
        a = float(np.clip(z[1], 0.0, 1.0))
        b = float(np.clip(z[2], 0.0, 1.0))
        return np.array([lam, 1.0 - lam]), np.array([[1.0 - a, a], [1.0 - b, b]])
    k = cardinality
    raw_u = np.abs(z[:k]) + 1e-12
    p_u = raw_u / raw_u.sum()
    rows = np.abs(z[k:].reshape(k, nx)) + 1e-12
    rows = rows / rows.sum(axis=1, keepdims=True)
    return p_u, rows


def _prefix_to_params(p_u: np.ndarray, rows: np.ndarray):
    k, nx = rows.shape
    if k == 2 and nx == 2:
        return np.array([p_u[0], rows[0, 1], rows[1, 1]])
    return np.concatenate([p_u, rows.ravel()])


def avwc_lower_bound(pair: WiretapPair, constraint: ConstraintSet | None = None,
                     prefix_cardinality: int | None = None, seed: int = 0) -> BoundResult:
    """Achievable secrecy rate max_U [min I(U;Y.) - adversary leakage term].

    The reported distribution certifies the value: re-evaluating the returned
    prefix joint reproduces it, so the bound is sound even though the outer
    search is heuristic.
    """
    constraint = constraint or ConstraintSet.all_states()
    return _lower_bound_impl(pair, constraint, csr=False,
                             prefix_cardinality=prefix_cardinality, seed=seed)


def avwc_csr_lower_bound(pair: WiretapPair, prefix_cardinality: int | None = None,
                         seed: int = 0) -> BoundResult:
    """Achievable secrecy rate with the state sequence known at the receiver."""
    return _lower_bound_impl(pair, ConstraintSet.all_states(), csr=True,
                             prefix_cardinality=prefix_cardinality, seed=seed)


def _lower_bound_impl(pair, constraint, csr, prefix_cardinality, seed):
    nx = pair.num_inputs
    cardinality = min(prefix_cardinality or nx, nx)
    if cardinality < 1:
        raise ValidationError("prefix cardinality must be at least 1")
    best = (-np.inf, None, None)
    warm = None
    for k in range(2, cardinality + 1):
        v, p_u, rows, z = _optimize_prefix(pair, constraint, csr, k, seed, warm=warm)
        if v > best[0]:
            best = (v, p_u, rows)
        if k < cardinality:
            warm = _prefix_to_params(np.append(p_u, 0.0),
                                     np.vstack([rows, np.full((1, nx), 1.0 / nx)]))
    if cardinality == 1:
        best = (0.0, np.ones(1), np.full((1, nx), 1.0 / nx))
    value, p_u, rows = best
    main, worst_q = _main_term(pair, p_u, rows, constraint, csr, seed=seed)
    leak, leak_arg = _wiretap_term(pair, p_u, rows, constraint)
    worst_s = int(np.argmax(leak_arg)) if constraint.kind == "all-states" else None
    return BoundResult(max(0.0, value), input_dist=p_u @ rows,
                       prefix_joint=_prefix_joint(p_u, rows),
                       worst_q=np.asarray(worst_q), worst_s=worst_s,
                       diagnostics={"main_term": main, "leakage_term": leak,
                                    "constraint": constraint.kind,
                                    "prefix_cardinality": cardinality},
                       flags=("lower-bound-certified",))


# ---------------------------------------------------------------------------
# Converse-side bound and the less-noisy capacity.

def _entropy_difference_curve(w: np.ndarray, v: np.ndarray, grid: np.ndarray):
    vals = np.empty(grid.size)
    for i, t in enumerate(grid):
        p = np.array([1.0 - t, t])
        vals[i] = entropy(p @ w) - entropy(p @ v)
    return vals


def _lower_convex_envelope(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Envelope values at the grid points themselves (Andrew's monotone chain)."""
    hull = [0]
    for i in range(1, xs.size):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (xs[i1] - xs[i0]) * (ys[i] - ys[i0]) - (ys[i1] - ys[i0]) * (xs[i] - xs[i0])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    env = np.empty_like(ys)
    for a, b in zip(hull[:-1], hull[1:]):
        span = slice(a, b + 1)
        lam = (xs[span] - xs[a]) / (xs[b] - xs[a]) if xs[b] > xs[a] else 0.0
        env[span] = ys[a] + lam * (ys[b] - ys[a])
    return env


def _max_prefix_gain_binary(w: np.ndarray, v: np.ndarray, grid_size: int = 2049):
    """max_U [I(U;Y) - I(U;Z)] for binary inputs via the envelope of the
    output-entropy difference: the H(.|X) terms are linear in the input law
    and cancel against any convex combination."""
    grid = np.linspace(0.0, 1.0, grid_size)
    curve = _entropy_difference_curve(w, v, grid)
    env = _lower_convex_envelope(grid, curve)
    gaps = curve - env
    i = int(np.argmax(gaps))
    return float(max(0.0, gaps[i])), float(grid[i])


def _max_prefix_gain(w: np.ndarray, v: np.ndarray, seed: int = 0):
    nx = w.shape[0]
    if nx == 2:
        return _max_prefix_gain_binary(w, v)

    def obj(z):
        p_u, rows = _params_to_prefix(z, nx, nx)
        return (prefix_mutual_information(_prefix_joint(p_u, rows), w)
                - prefix_mutual_information(_prefix_joint(p_u, rows), v))

    rng = np.random.Generator(np.random.Philox(seed))
    best = 0.0
    arg = None
    for _ in range(64):
        z0 = np.concatenate([rng.dirichlet(np.ones(nx)),
                             rng.dirichlet(np.ones(nx), size=nx).ravel()])
        res = minimize(lambda z: -obj(z), z0, method="Nelder-Mead",
                       options={"maxiter": 300})
        if -res.fun > best:
            best, arg = -res.fun, res.x
    return float(max(0.0, best)), arg


def avwc_upper_bound(pair: WiretapPair, csr: bool = False,
                     prefix_cardinality: int | None = None, seed: int = 0,
                     q_grid: int = 32) -> BoundResult:
    """Converse-side bound: the adversary commits to its argument first.

    Outer minimum over (q, s) pairs (or (s, s') pairs with receiver state
    knowledge), inner maximum over prefix distributions.  The inner maximum
    is a search, so undershoot would make the bound unsoundly small; the
    result carries the ``inner-max-heuristic`` flag to say so.
    """
    ns = pair.num_states
    best = (np.inf, None, None)
    if csr:
        mains = [(_unit(ns, s), pair.main.matrices[s]) for s in range(ns)]
    else:
        qs = _simplex_grid_points(ns, q_grid)
        mains = [(q, np.tensordot(q, pair.main.matrices, axes=(0, 0))) for q in qs]
    for q, w_eff in mains:
        for s in range(ns):
            gain, _ = _max_prefix_gain(w_eff, pair.wiretap.matrices[s], seed=seed)
            if gain < best[0]:
                best = (gain, q, s)
    value, q_star, s_star = best
    if not csr and ns == 2:
        # One-dimensional local refinement around the best mixture weight.
        def f(t):
            q = np.array([1.0 - t, t])
            w_eff = np.tensordot(q, pair.main.matrices, axes=(0, 0))
            return min(_max_prefix_gain(w_eff, pair.wiretap.matrices[s], seed=seed)[0]
                       for s in range(ns))

        res = minimize_scalar(f, bounds=(max(0.0, q_star[1] - 1.5 / q_grid),
                                         min(1.0, q_star[1] + 1.5 / q_grid)),
                              method="bounded", options={"xatol": 1e-6})
        if res.fun < value:
            value = float(res.fun)
            q_star = np.array([1.0 - float(res.x), float(res.x)])
    return BoundResult(max(0.0, value), worst_q=np.asarray(q_star), worst_s=s_star,
                       diagnostics={"csr": csr, "q_grid": q_grid},
                       flags=("inner-max-heuristic",))


def _simplex_grid_points(dim: int, steps: int) -> list[np.ndarray]:
    pts = []
    for combo in itertools.combinations_with_replacement(range(dim), steps):
        counts = np.bincount(combo, minlength=dim)
        pts.append(counts / steps)
    return pts


def less_noisy_secrecy_capacity(pair: WiretapPair, csr: bool = False, seed: int = 0,
                                hypothesis_grade: str | None = None) -> BoundResult:
    """max over inputs of the worst-case information advantage, no prefix.

    Equals the secrecy capacity when the main family dominates the wiretap
    family in the appropriate less-noisy order; verifying that hypothesis is
    the caller's job (pass ``hypothesis_grade`` to record it).
    """
    ns = pair.num_states

    def objective(p):
        if csr:
            main = min(mutual_information(p, pair.main.matrices[s]) for s in range(ns))
        else:
            main, _ = _min_convex_over_simplex(
                lambda q: mutual_information(p, np.tensordot(q, pair.main.matrices, axes=(0, 0))),
                ns, seed=seed)
        leak = max(mutual_information(p, pair.wiretap.matrices[s]) for s in range(ns))
        return main - leak

    nx = pair.num_inputs
    if nx == 2:
        grid = np.linspace(0.0, 1.0, 513)
        vals = [objective(np.array([1.0 - t, t])) for t in grid]
        i = int(np.argmax(vals))
        lo = grid[max(0, i - 1)]
        hi = grid[min(grid.size - 1, i + 1)]
        res = minimize_scalar(lambda t: -objective(np.array([1.0 - t, t])),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-9})
        value = float(-res.fun)
        p_hat = np.array([1.0 - float(res.x), float(res.x)])
        if vals[i] > value:
            value, p_hat = vals[i], np.array([1.0 - grid[i], grid[i]])
    else:
        value, p_hat = _max_min_concave_over_simplex([objective], nx, seed=seed)

    if csr:
        per_main = [mutual_information(p_hat, pair.main.matrices[s]) for s in range(ns)]
        worst_q = _unit(ns, int(np.argmin(per_main)))
    else:
        _, worst_q = _min_convex_over_simplex(
            lambda q: mutual_information(p_hat, np.tensordot(q, pair.main.matrices, axes=(0, 0))),
            ns, seed=seed)
    per_leak = [mutual_information(p_hat, pair.wiretap.matrices[s]) for s in range(ns)]
    worst_s = int(np.argmax(per_leak))
    diag = {"csr": csr}
    if hypothesis_grade is not None:
        diag["less_noisy_grade"] = hypothesis_grade
    return BoundResult(max(0.0, value), input_dist=p_hat, worst_q=np.asarray(worst_q),
                       worst_s=worst_s, diagnostics=diag)


def evaluate_less_noisy_objective(pair: WiretapPair, p, csr: bool, seed: int = 0) -> float:
    pv = _as_probs(p)
    ns = pair.num_states
    if csr:
        main = min(mutual_information(pv, pair.main.matrices[s]) for s in range(ns))
    else:
        main, _ = _min_convex_over_simplex(
            lambda q: mutual_information(pv, np.tensordot(q, pair.main.matrices, axes=(0, 0))),
            ns, seed=seed)
    leak = max(mutual_information(pv, pair.wiretap.matrices[s]) for s in range(ns))
    return main - leak
