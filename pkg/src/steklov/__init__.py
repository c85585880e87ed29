"""Steklov spectra of annuli and meshed surfaces.

Closed-form spectra for flat and rotationally symmetric annuli, a
finite-element Dirichlet-to-Neumann solver for general triangulated
surfaces, conformal automorphisms of the unit ball, free-boundary residual
checks, and a campaign runner that verifies the sharp eigenvalue bounds on
generated geometry.
"""

from .annulus import (
    CriticalityClass,
    FlatAnnulus,
    SpectrumBand,
    band_eigenvalues,
    classify,
    critical_modulus,
    ratio_first_bands,
    sigma1,
    sigma1_length,
    spectrum,
    zero_band,
)
from .bounds import (
    BoundReport,
    CampaignConfig,
    CampaignResult,
    run_campaign,
    verify_conformal_volume_bound,
    verify_supercritical,
    verify_topological_bound,
)
from .catenoid import (
    CatenoidFamilyMember,
    CriticalCatenoid,
    catenoid_mesh,
    critical_catenoid,
    max_sigma1L_over_a,
    solve_family,
)
from .fem import (
    DtNMatrix,
    SteklovSpectrum,
    assemble_boundary_mass,
    assemble_stiffness,
    dtn_matrix,
    harmonic_extension,
    rayleigh_quotient,
    steklov_spectrum,
)
from .freeboundary import (
    FreeBoundaryReport,
    FreeBoundaryThresholds,
    check_free_boundary,
    orbit_length_maximality,
    verify_area_length,
)
from .mesh import (
    Embedding,
    MeshError,
    MeshFormatError,
    MeshMeasures,
    ParamFlat,
    SurfaceMesh,
    build_annulus_grid,
    build_disk_mesh,
    load,
    measures,
    save,
    topology,
)
from .moebius import (
    ConformalVolumeEstimate,
    MoebiusMap,
    OptimizerConfig,
    balance,
    boundary_volume_sup,
    limit_concentration,
    push_mesh,
    relative_volume_sup,
)
from .moebius import apply as apply_moebius

__version__ = "0.1.0"
