# Models package

from models.kernel import FractionalOrder, Nonlinearity, PotentialMin
from models.grid import BoundarySpec, BottomCondition, CellWeights, Field, TensorGrid
from models.reports import (
    ComparisonReport,
    EnergyBreakdown,
    EnergyRegion,
    ExtensionCheck,
    GradientBounds,
    GrowthFit,
    LowerBoundCheck,
    PohozaevReport,
    PsiReport,
    SolveReport,
)
