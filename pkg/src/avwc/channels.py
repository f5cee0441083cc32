"""Finite channel families, mixtures, and state-sequence bookkeeping.

A channel family is a finite collection of row-stochastic matrices indexed by
a state symbol.  Alphabets are canonically the integers 0..k-1 in memory;
human-readable labels are kept only for I/O.  All values are immutable after
construction and every operation here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

ROW_SUM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_prob_vector(p: np.ndarray, what: str) -> None:
    if p.ndim != 1:
        raise ValidationError(f"{what} must be one-dimensional, got shape {p.shape}")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValidationError(f"{what} has entries outside [0, 1]")
    if abs(float(p.sum()) - 1.0) > ROW_SUM_TOL:
        # Deliberately no renormalization: off-by-more-than-tolerance input is
        # treated as a data error, not something to paper over.
        raise ValidationError(f"{what} sums to {p.sum():.17g}, not 1 within {ROW_SUM_TOL}")


@dataclass(frozen=True)
class Distribution:
    """Probability vector over a finite alphabet."""

    probs: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        _check_prob_vector(p, "distribution")
        if self.labels is not None and len(self.labels) != p.size:
            raise ValidationError("label count does not match distribution size")
        object.__setattr__(self, "probs", _frozen(p))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    def __len__(self) -> int:
        return self.probs.size

    @staticmethod
    def uniform(k: int) -> "Distribution":
        return Distribution(np.full(k, 1.0 / k))

    @staticmethod
    def point_mass(i: int, k: int) -> "Distribution":
        p = np.zeros(k)
        p[i] = 1.0
        return Distribution(p)


def _default_labels(prefix: str, k: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(k))


@dataclass(frozen=True)
class ChannelFamily:
    """A finite set of |X| x |Y| row-stochastic matrices, one per state.

    ``matrices`` has shape (|S|, |X|, |Y|); ``matrices[s, x, y]`` is the
    probability of output y on input x when the state is s.
    """

    matrices: np.ndarray
    state_labels: tuple[str, ...] = ()
    input_labels: tuple[str, ...] = ()
    output_labels: tuple[str, ...] = ()

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=np.float64)
        if m.ndim != 3:
            raise ValidationError(f"matrices must be a (S, X, Y) array, got shape {m.shape}")
        if m.shape[0] < 1:
            raise ValidationError("a channel family needs at least one state")
        if np.any(m < 0.0) or np.any(m > 1.0):
            raise ValidationError("transition probabilities must lie in [0, 1]")
        row_sums = m.sum(axis=2)
        if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
            bad = np.unravel_index(int(np.argmax(np.abs(row_sums - 1.0))), row_sums.shape)
            raise ValidationError(
                f"row (state={bad[0]}, input={bad[1]}) sums to {row_sums[bad]:.17g}; "
                "refusing to renormalize"
            )
        object.__setattr__(self, "matrices", _frozen(m))
        for name, k, prefix in (
            ("state_labels", m.shape[0], "s"),
            ("input_labels", m.shape[1], "x"),
            ("output_labels", m.shape[2], "y"),
        ):
            labels = getattr(self, name)
            if not labels:
                labels = _default_labels(prefix, k)
            labels = tuple(str(x) for x in labels)
            if len(labels) != k:
                raise ValidationError(f"{name}: expected {k} labels, got {len(labels)}")
            object.__setattr__(self, name, labels)

    @property
    def num_states(self) -> int:
        return self.matrices.shape[0]

    @property
    def num_inputs(self) -> int:
        return self.matrices.shape[1]

    @property
    def num_outputs(self) -> int:
        return self.matrices.shape[2]

    @staticmethod
    def from_matrices(mats, state_labels=(), input_labels=(), output_labels=()) -> "ChannelFamily":
        return ChannelFamily(np.stack([np.asarray(m, dtype=np.float64) for m in mats]),
                             tuple(state_labels), tuple(input_labels), tuple(output_labels))


@dataclass(frozen=True)
class WiretapPair:
    """A main family and a wiretap family sharing state set and input alphabet."""

    main: ChannelFamily
    wiretap: ChannelFamily

    def __post_init__(self):
        if self.main.num_states != self.wiretap.num_states:
            raise ValidationError("main and wiretap families must share one state set")
        if self.main.state_labels != self.wiretap.state_labels:
            raise ValidationError("main and wiretap state labels disagree")
        if self.main.num_inputs != self.wiretap.num_inputs:
            raise ValidationError("main and wiretap families must share the input alphabet")

    @property
    def num_states(self) -> int:
        return self.main.num_states

    @property
    def num_inputs(self) -> int:
        return self.main.num_inputs


@dataclass(frozen=True)
class StateSequence:
    """A length-N word over the state alphabet {0, ..., num_states-1}."""

    symbols: np.ndarray
    num_states: int

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.int64)
        if s.ndim != 1 or s.size == 0:
            raise ValidationError("state sequence must be a nonempty vector")
        if self.num_states < 1:
            raise ValidationError("num_states must be positive")
        if np.any(s < 0) or np.any(s >= self.num_states):
            raise ValidationError("state symbol out of range")
        object.__setattr__(self, "symbols", np.ascontiguousarray(s))
        self.symbols.setflags(write=False)

    @property
    def n(self) -> int:
        return self.symbols.size

    def index_set(self, a: int) -> np.ndarray:
        """Positions (0-based) whose state equals ``a``."""
        return np.flatnonzero(self.symbols == a)

    def counts(self) -> np.ndarray:
        return np.bincount(self.symbols, minlength=self.num_states)

    @staticmethod
    def from_string(text: str, alphabet: str = "01") -> "StateSequence":
        idx = {c: i for i, c in enumerate(alphabet)}
        return StateSequence(np.array([idx[c] for c in text]), num_states=len(alphabet))


@dataclass(frozen=True)
class CostModel:
    """Nonnegative per-state costs plus a budget."""

    per_state_cost: np.ndarray
    budget: float

    def __post_init__(self):
        c = np.asarray(self.per_state_cost, dtype=np.float64)
        if c.ndim != 1 or np.any(c < 0):
            raise ValidationError("per-state costs must be a nonnegative vector")
        if self.budget < 0:
            raise ValidationError("budget must be nonnegative")
        object.__setattr__(self, "per_state_cost", _frozen(c))


def mix(family: ChannelFamily, q: Distribution) -> np.ndarray:
    """Convex combination sum_s q(s) * W_s of the family's matrices."""
    if len(q) != family.num_states:
        raise ValidationError(
            f"mixture weight over {len(q)} states, family has {family.num_states}"
        )
    return np.tensordot(q.probs, family.matrices, axes=(0, 0))


def sequence_transition_prob(family: ChannelFamily, x, s: StateSequence, y) -> float:
    """Probability prod_i W_{s_i}(y_i | x_i) of output word y given input word x.

    Computed in the log domain so long blocks do not underflow; an exact zero
    factor short-circuits to 0.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if not (x.shape == y.shape == s.symbols.shape):
        raise ValidationError("x, y and the state sequence must have equal length")
    if s.num_states != family.num_states:
        raise ValidationError("state sequence alphabet does not match the family")
    if np.any(x < 0) or np.any(x >= family.num_inputs):
        raise ValidationError("input symbol out of range")
    if np.any(y < 0) or np.any(y >= family.num_outputs):
        raise ValidationError("output symbol out of range")
    steps = family.matrices[s.symbols, x, y]
    if np.any(steps == 0.0):
        return 0.0
    return float(np.exp(np.log(steps).sum()))


def product_alignment(main: ChannelFamily, wiretap: ChannelFamily) -> WiretapPair:
    """Align two families with unrelated state sets onto the product state set.

    The returned pair has states (s, t) in lexicographic order with
    main matrix W_s and wiretap matrix V_t, so an adversary controlling the
    two original state sequences independently is modelled by one sequence.
    """
    if main.num_inputs != wiretap.num_inputs:
        raise ValidationError("families must share the input alphabet")
    ns, nt = main.num_states, wiretap.num_states
    labels = tuple(
        f"{ls}*{lt}" for ls in main.state_labels for lt in wiretap.state_labels
    )
    main_mats = np.repeat(main.matrices, nt, axis=0)
    wiretap_mats = np.tile(wiretap.matrices, (ns, 1, 1))
    return WiretapPair(
        ChannelFamily(main_mats, labels, main.input_labels, main.output_labels),
        ChannelFamily(wiretap_mats, labels, wiretap.input_labels, wiretap.output_labels),
    )


def sequence_type(s: StateSequence) -> Distribution:
    """Empirical distribution of the state sequence."""
    return Distribution(s.counts() / s.n)


def cost(s: StateSequence, model: CostModel) -> float:
    """Average per-position cost (1/N) sum_i c(s_i)."""
    if model.per_state_cost.size != s.num_states:
        raise ValidationError("cost vector size does not match the state alphabet")
    return float(model.per_state_cost[s.symbols].mean())


def cost_of_type(type_dist: Distribution, model: CostModel) -> float:
    """Cost of any sequence with the given type: sum_a type(a) c(a)."""
    if model.per_state_cost.size != len(type_dist):
        raise ValidationError("cost vector size does not match the state alphabet")
    return float(type_dist.probs @ model.per_state_cost)


def enumerate_words(alphabet_size: int, n: int, cap: int = 10_000_000) -> np.ndarray:
    """All length-n words over {0..alphabet_size-1}, shape (k**n, n), lexicographic."""
    from .errors import EnumerationLimitError

    total = alphabet_size**n
    if total > cap:
        raise EnumerationLimitError(
            f"{alphabet_size}**{n} = {total} words exceeds cap {cap}; "
            "use a sampled mode instead"
        )
    words = np.indices((alphabet_size,) * n).reshape(n, total).T
    return np.ascontiguousarray(words, dtype=np.int64)


def bsc(p: float) -> np.ndarray:
    """Binary symmetric channel matrix with crossover probability p."""
    return np.array([[1.0 - p, p], [p, 1.0 - p]])
