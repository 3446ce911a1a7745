"""Lattice Clifford geometry, Dirac operators of simple type and dynamical torsion."""
from .clifford import Multivector, Signature, SignatureError
from .geometry import MetricChart, build_chart
from .spinor import DiracOperator, GammaRep, TwistedSpinorField, build_gamma
from .torsion import TorsionFieldStrength, TorsionPotential, TorsionTensor

__version__ = "0.1.0"

__all__ = [
    "DiracOperator",
    "GammaRep",
    "MetricChart",
    "Multivector",
    "Signature",
    "SignatureError",
    "TorsionFieldStrength",
    "TorsionPotential",
    "TorsionTensor",
    "TwistedSpinorField",
    "build_chart",
    "build_gamma",
]
