"""Executable coding schemes: codebooks, state-aware typicality decoding,
adversarial error measurement, code averaging, and permutation randomization.

Everything stochastic takes an explicit 64-bit seed and uses a counter-based
generator, so every run is bit-reproducible; trials that conceptually run in
parallel draw from independently spawned substreams.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelFamily, Distribution, StateSequence, enumerate_words
from .errors import EnumerationLimitError, ValidationError
from .ordering import csr_max_error_positive
from .typicality import (TypicalityParams, _count_bounds, _multinomial_box_prob,
                         conditional_typical_mask, state_typical_input,
                         typical_input_mask)

ERASURE = -1
DEFAULT_Y_CAP = 10_000_000
DEFAULT_S_CAP = 1_000_000


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.Philox(ss))
            for ss in np.random.SeedSequence(seed).spawn(count)]


@dataclass(frozen=True)
class Codebook:
    """An ordered list of input words plus its generator metadata."""

    words: np.ndarray  # (size, N)
    p_x: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        w = np.asarray(self.words, dtype=np.int64)
        if w.ndim != 2 or w.shape[0] < 1:
            raise ValidationError("codebook must be a nonempty (size, N) array")
        object.__setattr__(self, "words", np.ascontiguousarray(w))
        object.__setattr__(self, "p_x", np.asarray(self.p_x, dtype=np.float64))

    @property
    def size(self) -> int:
        return self.words.shape[0]

    @property
    def n(self) -> int:
        return self.words.shape[1]


def generate_codebook(p_x, n: int, size: int, seed: int) -> Codebook:
    """size independent words of length n with iid letters from p_x."""
    pv = p_x.probs if isinstance(p_x, Distribution) else np.asarray(p_x, dtype=np.float64)
    if size < 1:
        raise ValidationError("codebook size must be at least 1")
    rng = make_rng(seed)
    words = rng.choice(pv.size, size=(size, n), p=pv)
    return Codebook(words, pv, seed)


@dataclass
class GoodCodebookReport:
    ok: bool
    min_fraction: float
    argmin_state_seq: tuple
    threshold: float
    mode: str
    num_checked: int


def is_good_codebook(codebook: Codebook, params: TypicalityParams, nu1: float,
                     num_states: int, mode: str = "auto",
                     s_cap: int = DEFAULT_S_CAP, samples: int = 2000,
                     seed: int = 0) -> GoodCodebookReport:
    """Check that for every state sequence almost all codewords stay typical.

    The required fraction is 1 - 2*2^(-N*nu1).  Exhaustive over state
    sequences when |S|^N fits the cap, sampled otherwise.
    """
    n = codebook.n
    total = num_states**n
    if mode == "auto":
        mode = "exhaustive" if total <= min(s_cap, 4096) else "sampled"
    if mode == "exhaustive":
        seqs = enumerate_words(num_states, n, cap=s_cap)
    else:
        rng = make_rng(seed)
        seqs = rng.integers(0, num_states, size=(samples, n))
    threshold = 1.0 - 2.0 * 2.0 ** (-n * nu1)
    worst = (2.0, None)
    for s_row in seqs:
        s = StateSequence(s_row, num_states)
        frac = float(typical_input_mask(codebook.words, s, codebook.p_x, params).mean())
        if frac < worst[0]:
            worst = (frac, tuple(int(v) for v in s_row))
    return GoodCodebookReport(worst[0] > threshold, worst[0], worst[1], threshold,
                              mode, len(seqs))


# ---------------------------------------------------------------------------
# Decoders.

@dataclass
class DecoderTable:
    """Materialized decoding data for one state sequence."""

    admit: np.ndarray          # (L,) bool, decoding set nonempty
    mass: np.ndarray           # (L,) W(D_m | x_m, s), zero when not admitted
    claim: np.ndarray | None   # (num_y,) message index per output word, ERASURE outside

    def message_errors(self) -> np.ndarray:
        return 1.0 - self.mass


class CsrDecoder:
    """Iterative state-aware typicality decoder.

    For each state sequence the decoding sets are carved out in ascending
    message order: message m claims the conditional typical set of its
    codeword (doubled deviation) minus everything already claimed, and is
    admitted only if its codeword is state-typical and the remaining set
    keeps conditional mass above 1 - 2*2^(-N*nu2).  Unclaimed outputs decode
    to an erasure, which all error metrics count as an error.
    """

    def __init__(self, codebook: Codebook, family: ChannelFamily, params: TypicalityParams,
                 nu2: float, y_cap: int = DEFAULT_Y_CAP, mass_samples: int = 4096,
                 seed: int = 0):
        if codebook.p_x.size != family.num_inputs:
            raise ValidationError("codebook input law does not match the family")
        self.codebook = codebook
        self.family = family
        self.params = params
        self.nu2 = nu2
        self.mass_samples = mass_samples
        self.seed = seed
        self._tables: dict[bytes, DecoderTable] = {}
        num_y = family.num_outputs**codebook.n
        self.materialized = num_y <= y_cap
        self._y_words = enumerate_words(family.num_outputs, codebook.n) if self.materialized else None

    @property
    def threshold(self) -> float:
        return 1.0 - 2.0 * 2.0 ** (-self.codebook.n * self.nu2)

    def table(self, s: StateSequence) -> DecoderTable:
        key = s.symbols.tobytes()
        if key not in self._tables:
            self._tables[key] = (self._build_exact(s) if self.materialized
                                 else self._build_estimated(s))
        return self._tables[key]

    def _build_exact(self, s: StateSequence) -> DecoderTable:
        book = self.codebook
        cond_params = self.params.doubled()
        num_y = self._y_words.shape[0]
        claim = np.full(num_y, ERASURE, dtype=np.int64)
        unclaimed = np.ones(num_y, dtype=bool)
        admit = np.zeros(book.size, dtype=bool)
        mass = np.zeros(book.size)
        for m in range(book.size):
            x = book.words[m]
            if not state_typical_input(x, s, book.p_x, self.params):
                continue
            cond = conditional_typical_mask(x, self._y_words, s, book.p_x,
                                            self.family, cond_params)
            avail = cond & unclaimed
            if not avail.any():
                continue
            probs = np.exp(transition_log_prob_table(self.family, x,
                                                     self._y_words[avail],
                                                     s.symbols[None, :])[:, 0])
            m_mass = float(probs.sum())
            if m_mass > self.threshold:
                admit[m] = True
                mass[m] = m_mass
                claim[avail] = m
                unclaimed &= ~avail
        return DecoderTable(admit, mass, claim)

    def _build_estimated(self, s: StateSequence) -> DecoderTable:
        """Replay of the same iteration with Monte Carlo admission masses.

        Membership stays exact (first admitted message whose conditional
        typical set contains the query word); only the admission of each
        message uses an estimated mass, from a substream keyed to the state
        sequence so repeated queries agree.
        """
        book = self.codebook
        cond_params = self.params.doubled()
        digest = int.from_bytes(s.symbols.tobytes()[:8].ljust(8, b"\0"), "little")
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
            entropy=(self.seed, digest))))
        admit = np.zeros(book.size, dtype=bool)
        mass = np.zeros(book.size)
        admitted_rows = []
        for m in range(book.size):
            x = book.words[m]
            if not state_typical_input(x, s, book.p_x, self.params):
                continue
            samples = _sample_outputs(self.family, x, s, rng, self.mass_samples)
            cond = conditional_typical_mask(x, samples, s, book.p_x, self.family,
                                            cond_params)
            if admitted_rows:
                for prev in admitted_rows:
                    prev_cond = conditional_typical_mask(book.words[prev], samples, s,
                                                         book.p_x, self.family, cond_params)
                    cond &= ~prev_cond
            est = float(cond.mean())
            if est > self.threshold:
                admit[m] = True
                mass[m] = est
                admitted_rows.append(m)
        return DecoderTable(admit, mass, claim=None)

    def message_error_table(self, s_words: np.ndarray) -> np.ndarray:
        """Exact e_m(s) for every supplied state word; shape (L, num_s)."""
        ns = self.family.num_states
        out = np.empty((self.codebook.size, s_words.shape[0]))
        for j, s_row in enumerate(s_words):
            out[:, j] = self.table(StateSequence(s_row, ns)).message_errors()
        return out

    def decode(self, y, s: StateSequence) -> int:
        """Message index for a received word, or ERASURE."""
        tab = self.table(s)
        if tab.claim is not None:
            idx = _word_index(np.asarray(y, dtype=np.int64), self.family.num_outputs)
            return int(tab.claim[idx])
        cond_params = self.params.doubled()
        yv = np.asarray(y, dtype=np.int64)[None, :]
        for m in range(self.codebook.size):
            if not tab.admit[m]:
                continue
            if conditional_typical_mask(self.codebook.words[m], yv, s,
                                        self.codebook.p_x, self.family, cond_params)[0]:
                return m
        return ERASURE


def _word_index(word: np.ndarray, base: int) -> int:
    idx = 0
    for v in word:
        idx = idx * base + int(v)
    return idx


def _sample_outputs(family: ChannelFamily, x: np.ndarray, s: StateSequence,
                    rng: np.random.Generator, count: int) -> np.ndarray:
    out = np.empty((count, x.size), dtype=np.int64)
    for i in range(x.size):
        probs = family.matrices[int(s.symbols[i]), int(x[i])]
        out[:, i] = rng.choice(probs.size, size=count, p=probs)
    return out


def transition_log_prob_table(family: ChannelFamily, x: np.ndarray,
                              y_words: np.ndarray, s_words: np.ndarray) -> np.ndarray:
    """log prod_i W_{s_i}(y_i | x_i) for every (output word, state word) pair.

    Shape (num_y, num_s); exact zeros map to -inf.
    """
    x = np.asarray(x, dtype=np.int64)
    with np.errstate(divide="ignore"):
        logm = np.log(family.matrices)
    acc = np.zeros((s_words.shape[0], y_words.shape[0]))
    for i in range(x.size):
        step = logm[:, int(x[i]), :]          # (S, Y)
        acc += step[s_words[:, i]][:, y_words[:, i]]
    return acc.T


def average_error_exact(codebook: Codebook, decoder: CsrDecoder, s: StateSequence) -> float:
    """Exact average decoding error (1/L) sum_m [1 - W(D_m | x_m, s)]."""
    return float(decoder.table(s).message_errors().mean())


def max_error_exact(codebook: Codebook, decoder: CsrDecoder, s: StateSequence) -> float:
    return float(decoder.table(s).message_errors().max())


@dataclass
class WorstStateResult:
    value: float
    state_seq: tuple
    mode: str
    metric: str


def worst_state_error(codebook: Codebook, decoder: CsrDecoder, mode: str = "auto",
                      metric: str = "average", s_cap: int = DEFAULT_S_CAP,
                      restarts: int = 16, budget: int = 4000,
                      seed: int = 0) -> WorstStateResult:
    """Adversarial state sequence search, exhaustive or greedy coordinate ascent.

    The greedy value is a certified lower bound on the true maximum; the mode
    actually used is reported.
    """
    n = codebook.n
    ns = decoder.family.num_states
    reducer = np.mean if metric == "average" else np.max

    def value(s_row) -> float:
        tab = decoder.table(StateSequence(s_row, ns))
        return float(reducer(tab.message_errors()))

    total = ns**n
    if mode == "auto":
        mode = "exhaustive" if total <= min(s_cap, 4096) else "greedy"
    if mode == "exhaustive":
        if total > s_cap:
            raise EnumerationLimitError(f"{total} state sequences exceed cap {s_cap}")
        best = (-1.0, None)
        for s_row in enumerate_words(ns, n, cap=s_cap):
            v = value(s_row)
            if v > best[0]:
                best = (v, tuple(int(t) for t in s_row))
        return WorstStateResult(best[0], best[1], "exhaustive", metric)

    rngs = spawn_rngs(seed, restarts)
    best = (-1.0, None)
    evals = 0
    for rng in rngs:
        s_row = rng.integers(0, ns, size=n)
        current = value(s_row)
        improved = True
        while improved and evals < budget:
            improved = False
            for i in range(n):
                original = s_row[i]
                for cand in range(ns):
                    if cand == original:
                        continue
                    s_row[i] = cand
                    v = value(s_row)
                    evals += 1
                    if v > current + 1e-15:
                        current = v
                        original = cand
                        improved = True
                    else:
                        s_row[i] = original
                if evals >= budget:
                    break
        if current > best[0]:
            best = (current, tuple(int(t) for t in s_row))
    return WorstStateResult(best[0], best[1], "greedy", metric)


# ---------------------------------------------------------------------------
# State-oblivious decoding (for plain jamming demonstrations).

class MixtureDecoder:
    """Joint-typicality decoder against a fixed mixture channel.

    Decoding sets do not depend on the state sequence; used to exercise codes
    on channels whose receiver has no state knowledge.  Stands in for the
    classical random-code decoder, which is not reconstructed here.
    """

    def __init__(self, codebook: Codebook, family: ChannelFamily, q_mix,
                 params: TypicalityParams, nu2: float, y_cap: int = DEFAULT_Y_CAP):
        from .channels import mix

        self.codebook = codebook
        self.family = family
        q = q_mix.probs if isinstance(q_mix, Distribution) else np.asarray(q_mix, dtype=np.float64)
        self.w_mix = np.tensordot(q, family.matrices, axes=(0, 0))
        self.params = params
        self.nu2 = nu2
        num_y = family.num_outputs**codebook.n
        if num_y > y_cap:
            raise EnumerationLimitError("mixture decoder requires materializable outputs")
        self._y_words = enumerate_words(family.num_outputs, codebook.n)
        self._mix_family = ChannelFamily(self.w_mix[None, :, :])
        self._flat_state = StateSequence(np.zeros(codebook.n, dtype=np.int64), 1)
        self.claim, self.admit, self.mass = self._build()

    @property
    def threshold(self) -> float:
        return 1.0 - 2.0 * 2.0 ** (-self.codebook.n * self.nu2)

    def _build(self):
        book = self.codebook
        cond_params = self.params.doubled()
        num_y = self._y_words.shape[0]
        claim = np.full(num_y, ERASURE, dtype=np.int64)
        unclaimed = np.ones(num_y, dtype=bool)
        admit = np.zeros(book.size, dtype=bool)
        mass = np.zeros(book.size)
        for m in range(book.size):
            x = book.words[m]
            if not state_typical_input(x, self._flat_state, book.p_x, self.params):
                continue
            cond = conditional_typical_mask(x, self._y_words, self._flat_state,
                                            book.p_x, self._mix_family, cond_params)
            avail = cond & unclaimed
            if not avail.any():
                continue
            probs = np.exp(transition_log_prob_table(self._mix_family, x,
                                                     self._y_words[avail],
                                                     np.zeros((1, book.n), dtype=np.int64))[:, 0])
            m_mass = float(probs.sum())
            if m_mass > self.threshold:
                admit[m] = True
                mass[m] = m_mass
                claim[avail] = m
                unclaimed &= ~avail
        return claim, admit, mass

    def message_error_table(self, s_words: np.ndarray) -> np.ndarray:
        """Exact e_m(s) = 1 - W(D_m | x_m, s) for every state word; shape (L, num_s)."""
        book = self.codebook
        out = np.ones((book.size, s_words.shape[0]))
        for m in range(book.size):
            if not self.admit[m]:
                continue
            mask = self.claim == m
            if not mask.any():
                continue
            table = np.exp(transition_log_prob_table(self.family, book.words[m],
                                                     self._y_words[mask], s_words))
            out[m] = 1.0 - table.sum(axis=0)
        return out


# ---------------------------------------------------------------------------
# Code averaging (common-randomness elimination at desk scale).

@dataclass
class EliminationReport:
    averaged_errors: np.ndarray   # (L, num_s) mean over drawn codes of e_m(s)
    max_error: float
    argmax_message: int
    argmax_state_seq: tuple
    count: int
    cr_rate: float                # (1/N) log2 of the number of drawn codes
    seed: int


def elimination_sample(draw_code, count: int, s_words: np.ndarray, n: int,
                       seed: int = 0) -> EliminationReport:
    """Average per-message errors across ``count`` independently drawn codes.

    ``draw_code(rng) -> object with message_error_table(s_words)``.  The
    returned maximum is over messages and the supplied state words, so with
    an exhaustive ``s_words`` it is the exact worst case of the uniformly
    mixed code.
    """
    if count < 1:
        raise ValidationError("need at least one drawn code")
    rngs = spawn_rngs(seed, count)
    acc = None
    for rng in rngs:
        table = draw_code(rng).message_error_table(s_words)
        acc = table if acc is None else acc + table
    acc /= count
    flat = int(np.argmax(acc))
    m, si = np.unravel_index(flat, acc.shape)
    return EliminationReport(acc, float(acc[m, si]), int(m),
                             tuple(int(v) for v in s_words[si]), count,
                             math.log2(count) / n, seed)


# ---------------------------------------------------------------------------
# Permutation randomization: average error becomes maximal error.

class PermutationCode:
    """Uniformly permuted message assignment over a fixed base code."""

    def __init__(self, codebook: Codebook, decoder: CsrDecoder):
        self.codebook = codebook
        self.decoder = decoder

    def base_message_errors(self, s: StateSequence) -> np.ndarray:
        return self.decoder.table(s).message_errors()

    def expected_message_errors(self, s: StateSequence, mode: str = "auto",
                                trials: int = 2000, seed: int = 0,
                                enum_cap: int = 7) -> np.ndarray:
        """E over the uniform permutation of the per-message error, per message.

        By symmetry this equals the base code's average error for every
        message; the exhaustive mode verifies that identity by enumerating
        all L! permutations.
        """
        base = self.base_message_errors(s)
        size = self.codebook.size
        if mode == "auto":
            mode = "exhaustive" if size <= enum_cap else "sampled"
        if mode == "exhaustive":
            acc = np.zeros(size)
            total = 0
            for perm in itertools.permutations(range(size)):
                acc += base[list(perm)]
                total += 1
            return acc / total
        rng = make_rng(seed)
        acc = np.zeros(size)
        for _ in range(trials):
            perm = rng.permutation(size)
            acc += base[perm]
        return acc / trials

    def max_expected_error(self, s: StateSequence, **kwargs) -> float:
        return float(self.expected_message_errors(s, **kwargs).max())


def permutation_randomize(codebook: Codebook, decoder: CsrDecoder) -> PermutationCode:
    return PermutationCode(codebook, decoder)


# ---------------------------------------------------------------------------
# Two-codeword positivity scheme.

@dataclass
class PositivityReport:
    witness: tuple[int, int]
    k: int
    block_length: int
    per_state_errors: np.ndarray  # (S, 2): decoding error of each message given
                                  # the observer settles on that state
    max_error: float


def positivity_two_codeword_scheme(family: ChannelFamily, k: int, delta: float,
                                   relative: bool = False) -> PositivityReport:
    """Repetition scheme sending x0 or x1 for k*|S| positions.

    The receiver, knowing the states, finds a state occurring at least k
    times and letter-typicality-tests that sub-block against the law of x0.
    Because the tested sub-block is homogeneous in the state, the error
    depends on the state sequence only through the settled state, so the
    worst case over all state sequences is the worst settled state.
    """
    positive, witness = csr_max_error_positive(family)
    if not positive:
        raise ValidationError("family has no everywhere-distinguishable input pair")
    x0, x1 = witness
    kp = k * family.num_states
    params = TypicalityParams(delta, 0.5, relative)
    errors = np.zeros((family.num_states, 2))
    for s0 in range(family.num_states):
        p0 = family.matrices[s0, x0]
        p1 = family.matrices[s0, x1]
        lo, hi = _count_bounds(k, p0, params)
        in_box_given_x0 = _multinomial_box_prob(k, p0, lo, hi)
        in_box_given_x1 = _multinomial_box_prob(k, p1, lo, hi)
        errors[s0, 0] = 1.0 - in_box_given_x0
        errors[s0, 1] = in_box_given_x1
    return PositivityReport((x0, x1), k, kp, errors, float(errors.max()))
