"""Exact jet-space enumeration and motivic measures over complete DVRs.

The library computes, at desk scale and in exact arithmetic: truncated jet
spaces of affine models in equal and mixed characteristic, classes in the
computable subring of the localized Grothendieck ring of varieties, motivic
measures of cylinders and integrals of order functions, weak Neron integral
formulas and their invariants, Witt-vector arithmetic, and the p-adic volumes
that cross-check every motivic value by point counting.
"""

from .grothendieck import (
    CompletedClass,
    L,
    VarietyAtom,
    VirtualClass,
    atom_class,
    in_filtration,
    mod_L_minus_1,
    norm,
    one_class,
    parse_class,
    specialize_count,
    sum_to_tolerance,
    virtual_dim,
    zero_class,
)
from .jets import (
    Budget,
    JetPoint,
    MixedMode,
    SeriesMode,
    count_jets,
    enumerate_jets,
    fibration_check,
    image_count,
    lift_jet,
    make_jet,
    ord_function,
    ord_jacobian,
    truncate_jet,
)
from .models import AffineModel, CoverPresentation, ModelMorphism, load_model_file
from .poly import MultiPoly, jacobian_minors, parse_poly, substitute_series
from .rings import ZZ, ExtensionField, PrimeField, ResidueRing, SeriesRing

__version__ = "0.1.0"
