"""Zeno-effect optical CZ/CNOT gate simulator and fault-tolerance bounds."""

__version__ = "0.1.0"

from .fock import (BASIS, ChainConfig, PrecisionLossError, TwoModeState,
                   TauClosedFormIntermediates, absorber_step,
                   beamsplitter_step, continuum_segments, run_zeno_chain,
                   tau_closed_form, tau_closed_form_parts, tau_continuum)
from .gates import (DistillationConfig, DomainError, GateTable,
                    MismatchConfig, distilled_cz_table, heralded_fidelity,
                    heralded_success_probability, ideal_cz_table,
                    raw_cz_table, tau_gate_table, unheralded_fidelity)
from .teleport import (ChiState, ClosedFormIntermediates, DetectorModel,
                       GateMetrics, TwoQubitState, chi_state,
                       closed_form_intermediates, closed_form_metrics,
                       simulate_gc_circuit, worst_case_search)
from .analysis import (DEFAULT_DETECTOR, AdvantageReport, BoundResult,
                       ErrorRates, InfeasibleError, ThresholdCurve,
                       build_gate_table, distillation_advantage_report,
                       error_rates, gamma_min_for_kappa, gc_point_metrics,
                       is_tolerable, kappa_min_at_perfect_matching,
                       load_curve, load_named_curve, optimize_lambda)

__all__ = [name for name in dir() if not name.startswith("_")]
