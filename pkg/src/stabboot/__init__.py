"""Agnostic tomography of stabilizer, high stabilizer dimension and product states."""

from __future__ import annotations

from .clifford import CliffordCircuit, random_clifford
from .dense import DensityMatrix
from .highdim import HighDimConfig, HighDimOutput, agnostic_highdim
from .instances import InstanceSpec, generate_instance
from .oracle import BudgetExceeded, CopyOracle
from .pauli import SignedPauli
from .product import PackingSet, ProductState, agnostic_product, agnostic_stab_product, stabilizer_packing
from .stab_learner import BootstrapConfig, NoCandidate, agnostic_stabilizer, estimate_stabilizer_fidelity, list_decode
from .stabilizer import StabilizerState

__version__ = "0.1.0"

__all__ = [
    "BootstrapConfig", "BudgetExceeded", "CliffordCircuit", "CopyOracle", "DensityMatrix", "HighDimConfig",
    "HighDimOutput", "InstanceSpec", "NoCandidate", "PackingSet", "ProductState", "SignedPauli",
    "StabilizerState", "agnostic_highdim", "agnostic_product", "agnostic_stab_product", "agnostic_stabilizer",
    "estimate_stabilizer_fidelity", "generate_instance", "list_decode", "random_clifford", "stabilizer_packing",
]
