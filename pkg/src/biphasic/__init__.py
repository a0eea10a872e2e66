"""Closed-form linear biphasic model of a cylindrical sample in unconfined compression.

Relaxation and creep kernels, apparent storage/loss moduli, incomplete
moduli for half-sine tests, and time-domain responses to sinusoidal
loading, each with an independent numerical oracle.
"""

__version__ = "0.1.0"

from biphasic.charroots import CharacteristicRoots, Family, find_roots
from biphasic.errors import (
    BiphasicError,
    BracketingError,
    DomainError,
    OracleFailure,
    RangeError,
    SearchFailure,
    SingularityError,
    ValidationError,
)
from biphasic.kernels import creep_M, invert_laplace, laplace_K, laplace_M, relaxation_K
from biphasic.material import (
    BiphasicSpectrum,
    MaterialParams,
    build_spectrum,
    derive_constants,
    load_material,
    spectrum_from_nu,
)
from biphasic.moduli import ModuliEval, evaluate
from biphasic.response import LoadingProtocol, ProtocolKind, ResponseTrace, contact_duration, respond, simulate

__all__ = [
    "BiphasicError",
    "BiphasicSpectrum",
    "BracketingError",
    "CharacteristicRoots",
    "DomainError",
    "Family",
    "LoadingProtocol",
    "MaterialParams",
    "ModuliEval",
    "OracleFailure",
    "ProtocolKind",
    "RangeError",
    "ResponseTrace",
    "SearchFailure",
    "SingularityError",
    "ValidationError",
    "build_spectrum",
    "contact_duration",
    "creep_M",
    "derive_constants",
    "evaluate",
    "find_roots",
    "invert_laplace",
    "laplace_K",
    "laplace_M",
    "load_material",
    "relaxation_K",
    "respond",
    "simulate",
    "spectrum_from_nu",
]
