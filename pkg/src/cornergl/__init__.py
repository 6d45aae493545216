"""Corner localization of strong-field superconductivity on polygons.

Numerical artifact for the regime where the applied field sits between
the surface and bulk critical values: wedge ground-state thresholds and
nonlinear wedge energies, the half-plane edge constant, full
Ginzburg-Landau minimization on convex polygons at fixed gauge, and the
per-corner bookkeeping that compares both.
"""

__version__ = "0.1.0"

from .errors import (CornerGLError, ConvergenceError, DiscretizationError,
                     GeometryError, ParameterError, SolverError)
from .geometry import (PolygonDomain, RigidMotionGauge, SectorGeometry,
                       corner_frame, corner_neighborhood, make_polygon,
                       make_sector, polygon_from_json, polygon_to_json,
                       regular_polygon, symmetric_potential)
from .grid import (MaskedGrid, build_grid, field_from_json, field_to_json,
                   polygon_grid, rectangle_grid, sector_grid,
                   sector_truncation_ghosts)
from .gauge import GaugeLinks, build_links, gauge_transform, trivial_links
from .operators import (EnergyBreakdown, assemble_kinetic_form, energy,
                        gradient, integrate, richardson, supnorm)
from .eigen import rayleigh_quotient, smallest_eigenpair
from .descent import DescentResult, minimize_quartic_energy
from .spectral import (AssumptionCheck, CriticalFieldTable, SpectralResult,
                       VertexCheck, check_corner_assumption, critical_fields,
                       mu1, theta0, theta0_gate, theta0_value)
from .sector import (DecayFit, MuSweep, SectorSolution, decay_rate,
                     feynman_hellmann, kink_scan, minimize_sector, mu_sweep,
                     one_sided_derivatives)
from .glsolver import (ConcentrationReport, CornerLocals, CutoffField,
                       GLSolution, RunParams, corner_superposition,
                       cutoff_function, cutoff_identity_check,
                       decay_certificate, global_energy_check, gl_energy,
                       ims_check, local_quantities, minimize_gl, run_params,
                       sector_library, supercurrent, verify_concentration)
from .results import (CheckEntry, canonical_json, read_document,
                      write_document)
