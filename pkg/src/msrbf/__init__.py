"""Randomized radial basis function networks for multiscale elliptic PDEs.

The solver partitions the domain into uniform subdomains, equips each with
a frozen random Gaussian kernel basis, assembles Petrov-Galerkin weak-form
rows against Legendre-difference test functions together with boundary and
interface collocation rows, and trains only the linear output weights by a
global minimal-norm least-squares solve.
"""

from .assembly import (
    BlockSystem,
    assemble_boundary_rows,
    assemble_continuity_rows,
    assemble_pde_rows,
    assemble_system,
    dump_system,
    rows_per_interface_point,
    stack,
)
from .basis import (
    QuadratureRule,
    TestFunctionSet,
    gauss_lobatto,
    legendre,
    legendre_table,
    test_function,
    test_table,
)
from .errors import (
    AssemblyError,
    OutOfDomainError,
    SolverError,
    UndefinedMetricError,
)
from .fdm import (
    FdmSolution,
    cache_path,
    fdm_solve_1d,
    fdm_solve_2d,
    interpolate,
    load_solution,
    save_solution,
)
from .lstsq import LstsqResult, solve_min_norm
from .partition import (
    CollocationSet,
    Domain,
    Interface,
    Partition,
    Subdomain,
    decompose,
    locate,
    sample_collocation,
)
from .problems import PROBLEMS, ProblemSpec, make_problem
from .rbf import (
    LocalRbfNet,
    PiecewiseRbfSolution,
    RbfConfig,
    elm_fit,
    eval_basis,
    eval_basis_grad,
    random_init,
)
from .runner import (
    CSV_COLUMNS,
    SWEEP_AXES,
    TABLES,
    RunConfig,
    SolveReport,
    format_csv,
    metrics,
    run,
    solution_samples,
    sweep,
    table,
    table_configs,
    write_csv,
)

__version__ = "0.1.0"
