"""racgaff -- affine deformations of right-angled Coxeter groups.

Exact one-parameter Gram families M_t = Id + t*N for a right-angled
Coxeter group, their reflection representations and translation-part
cocycles, contraction diagnostics for the induced affine actions, and
deformed colorings of right-angled polytopes (k-gons and the
hyperbolic 120-cell).
"""

__version__ = "0.1.0"

from .errors import (
    CertificationError,
    ConfigError,
    RacgaffError,
    ReductionBudgetError,
)
