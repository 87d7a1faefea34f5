"""Combinatorial core of rational surgery exact triangles in Heegaard Floer homology.

Modules:

* ``useries``   truncated power series over F_2 and Smith normal form
* ``diagram``   index combinatorics of the genus-one triangle diagram
* ``localsys``  local systems and the model module E_{p,q,k}
* ``cycles``    the triangle-count matrix, kernel coefficients and local checks
* ``homalg``    homology over the truncated ring, mapping cones
* ``knotfloer`` knot complexes and their specialization along E_{p,q,k}
"""

from .diagram import NotCoprime, SlopeParams, s_sequence, z_count
from .useries import Series, SeriesMatrix, kernel_generator, smith_normal_form

__all__ = [
    "NotCoprime",
    "Series",
    "SeriesMatrix",
    "SlopeParams",
    "kernel_generator",
    "s_sequence",
    "smith_normal_form",
    "z_count",
]

__version__ = "0.1.0"
