"""Numerical Liouville CFT: conformal-bootstrap correlators (DOZZ structure
constants x squared conformal blocks integrated over the spectrum) with an
independent Gaussian-multiplicative-chaos Monte Carlo cross-check on the torus.
"""

from .params import CftParams
from .special import UpsilonEvaluator, dedekind_eta, l_ratio, theta1, upsilon, upsilon_prime_zero
from .virasoro import (
    GramMatrix,
    VermaVector,
    YoungDiagram,
    apply_virasoro,
    conformal_weight,
    kac_weight,
    partition_count,
    partitions,
    shapovalov,
    shapovalov_inverse,
)
from .dozz import dozz_constant, rho_density
from .blocks import (
    BlockCoeffTensor,
    BlockSeries,
    block_coeff_tensor,
    chain_block,
    graph_block,
    three_point_descendant,
    torus_one_point_block,
)
from .free_field import (
    BoundaryField,
    annulus_partition,
    free_annulus_amplitude,
    heat_kernel_K0,
    poisson_dn_disk,
)
from .graphs import AdmissibleGraph, EdgeSpec, MarkedPoint, validate_graph
from .bootstrap import (
    ANNULUS_VERTEX_CONSTANT,
    CorrelatorResult,
    Quadrature,
    Z_DISK,
    disk_vertex_constant,
    graph_correlator,
    sphere_k_point,
    torus_k_point,
    torus_one_point,
)
from .gmc import (
    McConfig,
    McEstimate,
    TorusGeometry,
    gmc_mass,
    mc_torus_one_point,
    mc_torus_one_point_many,
    sample_gff,
    torus_det_prefactor,
    torus_green,
)

__version__ = "0.1.0"
