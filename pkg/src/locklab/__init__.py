"""Numerical laboratory for information locking at small Hilbert dimension."""

from .decode import (DecodeScenario, DecoderChannel, build_decoder,
                     decode_error_bound, decode_threshold, decoupling_bound,
                     evaluate_decoder, guessing_error_bound, message_error,
                     purified_guessing_bound, threshold_gap)
from .entropy import alicki_fannes_bound, delta, entropy, mutual_information
from .haar import (RngSpec, TwirlResult, haar_batch, levy_bound, mc_twirl,
                   sample_haar, schur_twirl, swap_operator, sym_projectors)
from .locking import (LockingScheme, OptimizerReport, SideConditionError,
                      ThresholdInput, build_rho, build_sigma,
                      concentration_bound, distinguishability,
                      estimate_accessible_info, expectation_bound,
                      key_threshold, lipschitz_constant, modmod_warning,
                      optimize_distinguishability)
from .measure import (BudgetExceededError, MeasurementSuperoperator,
                      QuasiMeasurement, apply_measurement, build_net,
                      chernoff_bound, chernoff_sample, net_size_bound,
                      outcome_weights, povm_gap_bound, quasi_metric,
                      random_povm, validate_quasi)
from .qcore import (DensityOperator, PureState, SubsystemLayout,
                    UnitaryOperator, one_norm_entropy_bound, partial_trace,
                    pure_one_two_bound, purify, schatten_norm, trace_distance,
                    vec_to_op)
from .qkd import ProtocolRun, qkd_security_bounds, run_protocol_demo

__version__ = "0.1.0"
