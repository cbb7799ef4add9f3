"""Einstein connections of nonsymmetric metrics ``G = g + F`` built from
(weak) almost contact metric and almost Hermitian structures, with
point-wise verification of the metricity condition and a least-squares
oracle.

Typical use::

    from econn import structures, torsion, verify
    b = structures.conformal_hermitian_line(n=2, lam=2.0)
    geo = b.at(b.sample(1)[0])
    T = torsion.torsion_weak_acm(geo)
    verify.metricity_point(geo, T)
"""

from . import (checks, dual, errors, fields, specfile, structures, tensor,
               tolerances, torsion, verify)
from .fields import FieldBundle, PointGeometry
from .torsion import TorsionField

__all__ = ["checks", "dual", "errors", "fields", "specfile", "structures", "tensor",
           "tolerances", "torsion", "verify", "FieldBundle", "PointGeometry",
           "TorsionField"]
__version__ = "0.1.0"
