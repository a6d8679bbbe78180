"""Holonomic quantum gates inside decoherence-free subspaces and noiseless subsystems.

Modules: ``qops`` (operator algebra), ``dfs`` (code and dephasing model),
``hams`` (Hamiltonian families), ``adiabatic`` (loop propagation and holonomy
readout), ``gates`` (targets and fidelities), ``ns`` (Clebsch-Gordan blocks and
the noiseless-subsystem encoding), ``cli`` (command-line harness).
"""
from .adiabatic import ParameterLoop, holonomy, standard_loop
from .dfs import CodeBasis, DephasingEnsemble, build_code, dephase
from .hams import ControlParams, make_family

__version__ = "0.1.0"

__all__ = [
    "CodeBasis", "ControlParams", "DephasingEnsemble", "ParameterLoop",
    "build_code", "dephase", "holonomy", "make_family", "standard_loop",
]
