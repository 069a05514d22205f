"""Non-autonomous conformal iterated function systems: symbolic functionals,
harmonic measure estimation and thermodynamic dimension estimates."""
__version__ = "0.1.0"

from . import conformal, symbolic
from .conformal import ConformalMap, DomainSpec, SystemSpec, Word, load_system
from .errors import NacifsError

__all__ = ["__version__", "conformal", "symbolic", "ConformalMap", "DomainSpec", "SystemSpec", "Word",
           "load_system", "NacifsError"]
