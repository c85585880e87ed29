"""Instance generators, inequality verifiers, and the campaign runner.

Every verified inequality instance becomes a ``BoundReport`` whose pass
flag means exactly ``margin >= -tolerance``.  Chains with an intermediate
quantity are emitted as one report per link so that rule stays intact.

Conformal moduli are never estimated: supercriticality is only tested on
parameter meshes, where the modulus is known by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import annulus as annulus_mod
from . import catenoid as catenoid_mod
from . import fem
from . import freeboundary as fb
from . import mesh as mesh_mod
from . import moebius
from .annulus import CRITICAL, SUPERCRITICAL, FlatAnnulus
from .mesh import Embedding, MeshError, ParamFlat, SurfaceMesh

__all__ = [
    "BoundReport",
    "CampaignConfig",
    "CampaignResult",
    "THEOREM_TAGS",
    "gen_random_annulus",
    "gen_star_annulus",
    "build_pair_of_pants",
    "verify_topological_bound",
    "verify_supercritical",
    "verify_conformal_volume_bound",
    "run_campaign",
]

THEOREM_TAGS = (
    "TH2.3",
    "TH2.5",
    "TH4.1",
    "TH5.3",
    "TH5.4",
    "COR5.5",
    "TH6.2/COR6.3",
    "LB-Vbc",
    "LB-Vrc",
)


@dataclass(frozen=True)
class BoundReport:
    """One verified inequality instance: lhs <= rhs up to tolerance."""

    instance: str
    theorem: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "theorem": self.theorem,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "metadata": self.metadata,
        }


def _report(instance, theorem, lhs, rhs, tolerance, metadata=None) -> BoundReport:
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        raise ArithmeticError(f"non-finite bound values for {instance}: {lhs}, {rhs}")
    margin = rhs - lhs
    return BoundReport(
        instance=instance,
        theorem=theorem,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        tolerance=tolerance,
        passed=margin >= -tolerance,
        metadata=metadata or {},
    )


@dataclass(frozen=True)
class CampaignConfig:
    """Instance counts, resolutions, and tolerances of one campaign run."""

    seed: int = 0
    annuli: int = 200
    pants: int = 5
    star_annuli: int = 3
    n_theta: int = 48
    disk_levels: tuple = (8, 16, 32)
    catenoid_n_t: int = 24
    catenoid_n_theta: int = 96
    tol_closed_form: float = 1e-9
    tol_fem: float = 2e-2
    balance_tol: float = 1e-10
    opt_starts: int = 32

    def __post_init__(self) -> None:
        if min(self.annuli, self.pants, self.star_annuli) < 0:
            raise ValueError("instance counts must be nonnegative")
        if self.n_theta < 8 or min(self.disk_levels, default=8) < 2:
            raise ValueError("mesh resolutions are too coarse")
        if self.catenoid_n_t < 2 or self.catenoid_n_theta < 8:
            raise ValueError("catenoid resolution is too coarse")
        if min(self.tol_closed_form, self.tol_fem, self.balance_tol) <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.opt_starts < 1:
            raise ValueError("optimizer needs at least one start")


@dataclass(frozen=True)
class CampaignResult:
    reports: tuple
    summary: dict
    passed: bool


def gen_random_annulus(seed: int, resolution: int = 48) -> SurfaceMesh:
    """Random conformal annulus, deterministic in the seed.

    The modulus is log-uniform on [0.05, 10]; the conformal factor is the
    exponential of a random low-order trigonometric polynomial in t and
    theta, so it is positive and generally nonconstant along each boundary
    loop.
    """
    rng = np.random.default_rng([seed, 9151])
    T = float(np.exp(rng.uniform(math.log(0.05), math.log(10.0))))
    a0 = rng.uniform(-0.5, 0.5)
    a1 = rng.uniform(-0.5, 0.5)
    modes = []
    for m in (1, 2):
        modes.append(
            (m, rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.0, 2.0 * math.pi))
        )

    def factor(t: float, theta: float) -> float:
        p = a0 + a1 * (t / T)
        for m, am, bm, phase in modes:
            p += (am + bm * math.cos(math.pi * t / T)) * math.cos(m * theta + phase)
        return math.exp(p)

    n_theta = resolution
    n_t = max(4, int(math.ceil(n_theta * T / (2.0 * math.pi))))
    return mesh_mod.build_annulus_grid(T, n_t, n_theta, factor)


def gen_star_annulus(seed: int, n_t: int = 12, n_theta: int = 48) -> SurfaceMesh:
    """Random annulus embedded in the unit ball with both boundary circles
    on the sphere; the waist is modulated in theta but pinched inward, so
    all vertices stay inside the ball."""
    rng = np.random.default_rng([seed, 40927])
    z0 = -math.cos(rng.uniform(0.5, 1.2))
    z1 = math.cos(rng.uniform(0.5, 1.2))
    r0 = math.sqrt(1.0 - z0 * z0)
    r1 = math.sqrt(1.0 - z1 * z1)
    m = int(rng.integers(1, 4))
    phase = rng.uniform(0.0, 2.0 * math.pi)
    beta = rng.uniform(0.1, 0.3)
    gamma = rng.uniform(0.0, beta / 2.0)
    nv = (n_t + 1) * n_theta
    coords = np.empty((nv, 3))
    for i in range(n_t + 1):
        t = i / n_t
        z = z0 + (z1 - z0) * t
        base = r0 + (r1 - r0) * t
        pinch = math.sin(math.pi * t)
        for j in range(n_theta):
            theta = 2.0 * math.pi * j / n_theta
            rho = base * (1.0 - beta * pinch + gamma * pinch * math.cos(m * theta + phase))
            v = i * n_theta + j
            coords[v] = (rho * math.cos(theta), rho * math.sin(theta), z)
    tris = mesh_mod._grid_triangles(n_t, n_theta)
    loops = (
        np.arange(n_theta, dtype=np.int64),
        np.arange(n_t * n_theta, nv, dtype=np.int64),
    )
    return SurfaceMesh(tris, loops, Embedding(coords))


def _largest_component(tris: np.ndarray) -> np.ndarray:
    """Triangle indices of the largest edge-connected patch."""
    nf = tris.shape[0]
    edge_faces: dict = {}
    for fidx in range(nf):
        a, b, c = tris[fidx]
        for u, v in ((a, b), (b, c), (c, a)):
            edge_faces.setdefault((min(u, v), max(u, v)), []).append(fidx)
    seen = np.full(nf, -1, dtype=np.int64)
    comp = 0
    for root in range(nf):
        if seen[root] >= 0:
            continue
        stack = [root]
        seen[root] = comp
        while stack:
            f = stack.pop()
            a, b, c = tris[f]
            for u, v in ((a, b), (b, c), (c, a)):
                for g in edge_faces[(min(u, v), max(u, v))]:
                    if seen[g] < 0:
                        seen[g] = comp
                        stack.append(g)
        comp += 1
    sizes = np.bincount(seen)
    return np.where(seen == int(np.argmax(sizes)))[0]


def _pinched_vertices(tris: np.ndarray, nv: int) -> np.ndarray:
    """Vertices incident to more than two boundary edges."""
    directed = mesh_mod._directed_edges(tris)
    lo = np.minimum(directed[:, 0], directed[:, 1])
    hi = np.maximum(directed[:, 0], directed[:, 1])
    keys, counts = np.unique(lo * np.int64(nv) + hi, return_counts=True)
    boundary = keys[counts == 1]
    incident = np.zeros(nv, dtype=np.int64)
    np.add.at(incident, boundary // nv, 1)
    np.add.at(incident, boundary % nv, 1)
    return np.where(incident > 2)[0]


def build_pair_of_pants(
    grid: int = 24, hole_radius: float = 0.22, hole_offset: float = 0.45
) -> SurfaceMesh:
    """Planar genus-0 domain with three boundary loops (disk minus two holes).

    Built by filtering a structured grid against the outer disk and the two
    holes, then cleaning pinches and keeping the largest patch, so any
    reasonable parameter choice yields a valid mesh.
    """
    N = grid
    xs = np.linspace(-1.0, 1.0, N + 1)
    coords = np.array([(x, y) for y in xs for x in xs])
    tris = []
    for row in range(N):
        for col in range(N):
            v00 = row * (N + 1) + col
            v10 = v00 + 1
            v01 = v00 + (N + 1)
            v11 = v01 + 1
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    tris = np.array(tris, dtype=np.int64)
    centroids = coords[tris].mean(axis=1)
    holes = np.array([(hole_offset, 0.0), (-hole_offset, 0.0)])
    keep = np.linalg.norm(centroids, axis=1) <= 0.98
    for h in holes:
        keep &= np.linalg.norm(centroids - h, axis=1) >= hole_radius
    tris = tris[keep]
    while True:
        tris = tris[_largest_component(tris)]
        pinched = _pinched_vertices(tris, coords.shape[0])
        if pinched.size == 0:
            break
        drop = int(np.max(np.where(np.isin(tris, pinched).any(axis=1))[0]))
        tris = np.delete(tris, drop, axis=0)
    used = np.unique(tris)
    remap = np.full(coords.shape[0], -1, dtype=np.int64)
    remap[used] = np.arange(used.size)
    tris = remap[tris]
    coords = coords[used]
    loops = mesh_mod.extract_boundary_loops(tris, used.size)
    return SurfaceMesh(tris, loops, Embedding(coords))


def _sigma1_of(mesh: SurfaceMesh, sigma1: float | None) -> float:
    if sigma1 is None:
        sigma1 = float(fem.steklov_spectrum(mesh, 2).eigenvalues[1])
    return sigma1


def verify_topological_bound(
    mesh: SurfaceMesh, sigma1: float | None = None, fem_tol: float = 2e-2
) -> BoundReport:
    """First eigenvalue times boundary length against the topological bound.

    For genus zero with at least two boundary loops the sharper strict form
    applies and the report is tagged accordingly.
    """
    genus, k = mesh_mod.topology(mesh)
    L = mesh_mod.measures(mesh).total_boundary_length
    s1 = _sigma1_of(mesh, sigma1)
    lhs = s1 * L
    rhs_general = 2.0 * (genus + k) * math.pi
    if genus == 0 and k >= 2:
        theorem = "TH2.5"
        rhs = 2.0 * k * math.pi
    else:
        theorem = "TH2.3"
        rhs = rhs_general
    return _report(
        instance=f"topological(genus={genus},k={k})",
        theorem=theorem,
        lhs=lhs,
        rhs=rhs,
        tolerance=fem_tol * rhs,
        metadata={
            "genus": genus,
            "boundary_count": k,
            "sigma1": s1,
            "boundary_length": L,
            "rhs_general": rhs_general,
        },
    )


def verify_supercritical(
    mesh: SurfaceMesh, sigma1: float | None = None, fem_tol: float = 2e-2
) -> BoundReport:
    """Supercritical annuli stay below the symmetric catenoid value.

    The mesh must be a parameter mesh so its modulus is exact; the boundary
    ratio comes from the measured loop lengths.  Subcritical instances are
    reported as not applicable, without any assertion.
    """
    geom = mesh.geometry
    if not isinstance(geom, ParamFlat):
        raise MeshError("supercritical verification needs a parameter mesh")
    if len(mesh.boundary_loops) != 2:
        raise MeshError("supercritical verification needs an annulus")
    T = float(geom.coords[:, 0].max())
    mm = mesh_mod.measures(mesh)
    mean_t = [float(geom.coords[np.asarray(lp), 0].mean()) for lp in mesh.boundary_loops]
    lengths = list(mm.boundary_lengths)
    if mean_t[0] > mean_t[1]:
        lengths.reverse()
    L0, L1 = lengths
    flat = FlatAnnulus(f0=L0 / (2.0 * math.pi), fT=L1 / (2.0 * math.pi), T=T)
    cls = annulus_mod.classify(flat)
    star = catenoid_mod.critical_catenoid().sigma1L_star
    metadata = {
        "classification": cls.tag,
        "threshold": cls.threshold,
        "modulus": T,
        "alpha": L0 / L1,
    }
    if cls.tag not in (SUPERCRITICAL, CRITICAL):
        metadata["applicable"] = False
        return _report(
            instance=f"supercritical(T={T:.4g})",
            theorem="TH4.1",
            lhs=0.0,
            rhs=0.0,
            tolerance=fem_tol * star,
            metadata=metadata,
        )
    s1 = _sigma1_of(mesh, sigma1)
    lhs = s1 * mm.total_boundary_length
    alpha = L0 / L1
    intermediate = 2.0 * math.pi / T * (alpha + 2.0 + 1.0 / alpha)
    metadata.update(applicable=True, sigma1=s1, intermediate_bound=intermediate)
    return _report(
        instance=f"supercritical(T={T:.4g})",
        theorem="TH4.1",
        lhs=lhs,
        rhs=star,
        tolerance=fem_tol * star,
        metadata=metadata,
    )


def verify_conformal_volume_bound(
    mesh: SurfaceMesh,
    estimate: moebius.ConformalVolumeEstimate | None = None,
    fem_tol: float = 2e-2,
    balance_tol: float = 1e-10,
) -> list[BoundReport]:
    """Test-function chain behind the conformal-volume eigenvalue bound.

    After balancing, the pushed coordinates are admissible test functions:
    the first eigenvalue times boundary length is at most the summed
    Dirichlet energy of their harmonic extensions, which is at most twice
    the pushed area.  Both links are emitted as reports; a searched area
    supremum, when supplied, enters the metadata only, since that estimate
    bounds the true supremum from below.
    """
    bmap = moebius.balance(mesh, tol=balance_tol)
    pushed = moebius.push_mesh(bmap, mesh)
    pushed_coords = pushed.geometry.coords
    bv = fem.boundary_vertices(mesh)
    trace = pushed_coords[bv]

    spec = fem.steklov_spectrum(mesh, 2)
    s1 = float(spec.eigenvalues[1])
    L = mesh_mod.measures(mesh).total_boundary_length
    K = fem.assemble_stiffness(mesh)
    ext = fem.harmonic_extension(mesh, trace)
    sum_energy = float(np.einsum("vi,vi->", ext, (K @ ext)))
    area_pushed = mesh_mod.measures(pushed).area

    B = fem.assemble_boundary_mass(mesh)
    sum_mass = float(np.einsum("vi,vi->", trace, B @ trace))
    balance_residual = float(
        np.abs(moebius._boundary_lumped_weights(mesh)[1] @ trace).max() / L
    )
    metadata = {
        "sigma1": s1,
        "boundary_length": L,
        "sum_energy": sum_energy,
        "pushed_area": area_pushed,
        "sum_boundary_mass": sum_mass,
        "balance_residual": balance_residual,
        "balance_center": bmap.center.tolist(),
    }
    if estimate is not None:
        metadata["relative_volume_estimate"] = estimate.best_value
    scale = 2.0 * area_pushed
    return [
        _report(
            instance="conformal-chain:energy",
            theorem="TH6.2/COR6.3",
            lhs=s1 * L,
            rhs=sum_energy,
            tolerance=fem_tol * scale,
            metadata=metadata,
        ),
        _report(
            instance="conformal-chain:area",
            theorem="TH6.2/COR6.3",
            lhs=sum_energy,
            rhs=scale,
            tolerance=fem_tol * scale,
            metadata=metadata,
        ),
    ]


def _campaign_free_boundary(config: CampaignConfig, reports: list) -> None:
    cat = catenoid_mod.catenoid_mesh(0.0, config.catenoid_n_t, config.catenoid_n_theta)
    disk = mesh_mod.embed_in_dimension(
        mesh_mod.build_disk_mesh(config.disk_levels[-1], 4 * config.disk_levels[-1]), 3
    )
    opt = moebius.OptimizerConfig(starts=config.opt_starts)
    for name, m in (("catenoid", cat), ("disk", disk)):
        fbrep = fb.check_free_boundary(m)
        orbit = fb.orbit_length_maximality(m, opt, geometric_tol=config.tol_fem)
        reports.append(
            _report(
                instance=f"{name}:orbit",
                theorem="TH5.3",
                lhs=orbit.sup_length,
                rhs=orbit.identity_length,
                tolerance=config.tol_fem * orbit.identity_length,
                metadata={"margin_relative": orbit.margin},
            )
        )
        A, L = fbrep.area, fbrep.boundary_length
        reports.append(
            _report(
                instance=f"{name}:length",
                theorem="TH5.4",
                lhs=2.0 * math.pi,
                rhs=L,
                tolerance=config.tol_fem * 2.0 * math.pi,
                metadata={"area": A},
            )
        )
        reports.append(
            _report(
                instance=f"{name}:identity",
                theorem="TH5.4",
                lhs=abs(2.0 * A - L),
                rhs=0.0,
                tolerance=config.tol_fem * L,
                metadata={"area": A, "boundary_length": L},
            )
        )
        reports.append(
            _report(
                instance=f"{name}:isoperimetric",
                theorem="COR5.5",
                lhs=A,
                rhs=L * L / (4.0 * math.pi),
                tolerance=config.tol_fem * A,
                metadata={},
            )
        )
        bc = moebius.boundary_volume_sup(m, opt)
        reports.append(
            _report(
                instance=f"{name}:boundary-volume",
                theorem="LB-Vbc",
                lhs=2.0 * math.pi,
                rhs=bc.best_value,
                tolerance=config.tol_fem * 2.0 * math.pi,
                metadata={"converged": bc.converged, "samples": bc.samples},
            )
        )
        rc = moebius.relative_volume_sup(m, opt)
        reports.append(
            _report(
                instance=f"{name}:relative-volume",
                theorem="LB-Vrc",
                lhs=math.pi,
                rhs=rc.best_value,
                tolerance=config.tol_fem * math.pi,
                metadata={"converged": rc.converged, "samples": rc.samples},
            )
        )
        for rep in verify_conformal_volume_bound(
            m, rc, fem_tol=config.tol_fem, balance_tol=config.balance_tol
        ):
            reports.append(replace(rep, instance=f"{name}:{rep.instance}"))


def run_campaign(config: CampaignConfig = CampaignConfig()) -> CampaignResult:
    """Run every verification family and aggregate per-theorem outcomes."""
    reports: list[BoundReport] = []

    for n_r in config.disk_levels:
        disk = mesh_mod.build_disk_mesh(n_r, 4 * n_r)
        rep = verify_topological_bound(disk, fem_tol=config.tol_fem)
        reports.append(replace(rep, instance=f"disk-{n_r}"))

    for i in range(config.annuli):
        m = gen_random_annulus(config.seed + i, config.n_theta)
        s1 = float(fem.steklov_spectrum(m, 2).eigenvalues[1])
        for rep in (
            verify_topological_bound(m, s1, config.tol_fem),
            verify_supercritical(m, s1, config.tol_fem),
        ):
            reports.append(replace(rep, instance=f"annulus-{i:04d}"))

    for i in range(config.pants):
        m = build_pair_of_pants(grid=20 + 4 * i)
        rep = verify_topological_bound(m, fem_tol=config.tol_fem)
        reports.append(replace(rep, instance=f"pants-{i}"))

    _campaign_free_boundary(config, reports)

    for i in range(config.star_annuli):
        m = gen_star_annulus(config.seed + i)
        for rep in verify_conformal_volume_bound(
            m, fem_tol=config.tol_fem, balance_tol=config.balance_tol
        ):
            reports.append(replace(rep, instance=f"star-{i}:{rep.instance}"))

    summary: dict = {}
    for rep in reports:
        entry = summary.setdefault(
            rep.theorem, {"count": 0, "failures": 0, "min_margin": math.inf}
        )
        entry["count"] += 1
        entry["failures"] += 0 if rep.passed else 1
        entry["min_margin"] = min(entry["min_margin"], rep.margin)
    passed = all(rep.passed for rep in reports)
    return CampaignResult(reports=tuple(reports), summary=summary, passed=passed)
