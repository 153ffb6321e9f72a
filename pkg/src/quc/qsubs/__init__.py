"""Quantum subroutine builders for the unit-commitment cost layer."""

from .arith import AdderError, AdderWeights, penalty_layer, penalty_weights, weighted_adder
from .cosphase import CosPhaseTable, cos_phase_circuit, cos_phase_table
from .getdiff import get_diff
from .hhl import HHLConfig, HHLError, effective_solution, hhl_circuit, pad_system, qpe_distribution
from .prep import prep_power_state
from .qadc import QADCConfig, g_circuit, g_eigencheck, psi_circuit, qadc_circuit, readout_distribution
from .trans import cost_layer_budget, provenance, u_trans

__all__ = [
    "AdderError", "AdderWeights", "CosPhaseTable", "HHLConfig", "HHLError", "QADCConfig",
    "cos_phase_circuit", "cos_phase_table", "cost_layer_budget", "effective_solution",
    "g_circuit", "g_eigencheck", "get_diff", "hhl_circuit", "pad_system", "penalty_layer",
    "penalty_weights", "prep_power_state", "provenance", "psi_circuit", "qadc_circuit",
    "qpe_distribution", "readout_distribution", "u_trans", "weighted_adder",
]
