"""Extreme-value recurrence analysis of smooth observables along chaotic orbits.

The toolkit simulates deterministic and randomly perturbed maps, evaluates
observables along their orbits, and extracts recurrence statistics from the
induced extreme-value process: block-maxima Gumbel fits (whose scale parameter
estimates the local dimension of the image measure), cluster coefficients and
extremal indices, compound Poisson visit counts, and generalized-dimension
spectra.
"""

from dynevt.systems import (
    Baker,
    CantorIFS1D,
    CantorProduct2D,
    Hemmer,
    LinearCircle,
    LorenzEuler,
    TwoBranchAffineCircle,
    AdditiveUniformMod1,
    DiscreteMapSwitch,
    Trajectory,
    orbit,
    cantor_sample,
    step,
)
from dynevt.observables import (
    Identity,
    Coordinate,
    Mean2D,
    Affine,
    Gaussian2D,
    Power,
    QuadraticRoots,
    PiecewiseAffine,
    Branch,
    DistanceToLine,
    DistanceToCircle,
    VectorList,
    Delay,
    SpatialMean,
    AdditiveUniform,
    DiscreteShift,
    TargetSpec,
    evaluate,
    series_values,
    phi,
    phi_series,
    preimage_data,
)
from dynevt.gev import (
    BlockMaximaSeries,
    GevFit,
    DimensionEstimate,
    block_maxima,
    fit_gev,
    quantile,
    estimate_dimension,
)
from dynevt.extremal import (
    ExceedanceSeries,
    ClusterCoefficients,
    Preimage,
    PreimageOrbitData,
    exceedances,
    q_hat,
    theta_hat,
    theta_analytic,
    theta_analytic_open,
    preimage_orbit_data,
)
from dynevt.visits import (
    CompoundPoissonParams,
    PeriodicPreimage,
    VisitDistribution,
    compound_poisson_pmf,
    polya_aeppli_pmf,
    poisson_pmf,
    two_preimage_params,
    visit_counts,
)
from dynevt.dimensions import (
    DimensionSpectrum,
    RateFunction,
    estimate_Dq,
    baker_Dq_solve,
    baker_stable_info_dimension,
    info_dimension,
    hunt_kaloshin_cap,
    rate_function,
)

__version__ = "0.1.0"
