"""Numerical verification of octonionic Gauss map identities on minimal submanifolds of S^7.

The pipeline: Cayley-Dickson algebra, analytic charts of explicit minimal
isoparametric submanifolds, shape-operator Gram spectra, finite-difference
Laplace-Beltrami operators of the Gauss map ``gamma(x) = x^{-1} eta(x)``,
and a sampled hemisphere scan of its image.
"""

from .algebra import (
    CDElement,
    cd_conjugate,
    cd_inverse,
    cd_multiply,
    gamma_map,
    killing_field,
    sedenion_zero_divisor,
    translation_matrix,
)
from .catalog import (
    SHIPPED,
    CustomSpec,
    GreatSphereSpec,
    ProductSphereSpec,
    build_chart,
    catalog_list,
    format_spec,
    minimal_radii,
    parse_spec,
)
from .charts import Chart, ScalarField, frames_at, integrate, laplace_beltrami, metric_data
from .errors import (
    ChartDegeneracyError,
    ConvergenceError,
    DomainError,
    LevelMismatchError,
    OctoverifyError,
    RefusedError,
    SpecError,
    SpectrumNotConstantError,
    StencilError,
)
from .gauss import (
    EigenmapVerdict,
    GaussMapField,
    eigenmap_verify,
    gauss_laplacian,
    gauss_map,
    harmonicity_defect,
    lemma_residual,
)
from .hemisphere import HemisphereReport, hemisphere_scan, mean_zero_check
from .runner import CHECKS, RunConfig, run, run_suite, validate_report
from .spectra import (
    GramSpectrum,
    ShapeOperatorMatrix,
    bstarb_eigencheck,
    constancy_scan,
    gram_spectrum,
    jacobi_eigh,
    shape_operator,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"
