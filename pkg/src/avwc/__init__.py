"""Toolkit for arbitrarily varying channels and wiretap secrecy analysis."""

from .channels import (ChannelFamily, CostModel, Distribution, StateSequence,
                       WiretapPair, bsc, cost, cost_of_type, enumerate_words, mix,
                       product_alignment, sequence_transition_prob, sequence_type)
from .capacity import (BoundResult, ConstraintSet, avc_capacity_random,
                       avc_csr_capacity, avwc_csr_lower_bound, avwc_lower_bound,
                       avwc_upper_bound, less_noisy_secrecy_capacity)
from .coding import (Codebook, CsrDecoder, MixtureDecoder, PermutationCode,
                     average_error_exact, elimination_sample, generate_codebook,
                     is_good_codebook, permutation_randomize,
                     positivity_two_codeword_scheme, worst_state_error)
from .errors import ChannelFileError, EnumerationLimitError, ValidationError
from .info import (avg_state_measures, binary_entropy, conditional_entropy, entropy,
                   mutual_information, prefix_mutual_information)
from .ordering import (OrderVerdict, classify_degradation, classify_less_noisy,
                       csr_max_error_positive, is_degraded, is_less_noisy)
from .partition import (BSets, ColoringInstance, Partition, build_b_sets,
                        build_coloring_instance, calibrate_nu3, coloring_search,
                        codeword_leakage_exact, equipartition, leakage_exact,
                        secure_pipeline)
from .presets import PRESETS, load_preset, preset_parameters, preset_text
from .typicality import (MinProbConstants, TypicalityParams, calibrate_nu1,
                         calibrate_nu2, conditional_typical_prob_exact,
                         frequent_states, jointly_typical, letter_typical,
                         min_prob_constants, state_typical_input,
                         state_typical_output, typical_prob_exact)

__version__ = "0.1.0"
