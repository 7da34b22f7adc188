"""symred: Hamiltonian symmetry reduction as a numerical library.

Subpackages cover generic Poisson-system machinery (:mod:`symred.poisson`),
the free rigid body (:mod:`symred.rigid`), the reduced central-force system
with reconstruction (:mod:`symred.central`), the k-body reduction to
sp(2k)* with dual-pair verifiers (:mod:`symred.sp2k`), phase-portrait
generation (:mod:`symred.portrait`), and structural verification suites
(:mod:`symred.verify`) behind the ``symred`` command line tool.
"""

from . import central, poisson, portrait, rigid, sp2k, verify

__all__ = ["poisson", "rigid", "central", "sp2k", "portrait", "verify"]
__version__ = "0.1.0"
