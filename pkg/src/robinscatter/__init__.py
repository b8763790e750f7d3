"""Scattering by a potential above an impedance (Robin) boundary.

Half-space Green's functions, a Nystrom Lippmann-Schwinger solver, discrete
boundary maps and complex geometrical optics probes.
"""
from .exceptions import ConvergenceError, PoleProximityError, PreconditionError, SingularityError
from .green import (MediumSpec, SpectralKernelParams, FarFieldFrame, green_free, green_images,
                    green_robin, green_robin_gradient, farfield_expansion, surface_wave_term,
                    radiation_residual_scan, robin_boundary_residual, boundary_delta_limit)
from .forward import (PotentialGrid, BoundarySamples, VolumeField, LippmannSchwingerSolver,
                      solve_scattering, evaluate_field, boundary_trace_and_flux, gaussian_data)
from .maps import (BoundaryOperator, RobinToRobinMap, build_dtn, build_ntd, build_rtr,
                   check_identities, dtn_kernel, reduce_rtr_to_dtn)
from .cgo import (CGOConfig, CGOSeries, CGOSolution, ComplexPlaneGrid, build_cgo_pair,
                  cauchy_transform_z, cauchy_transform_zbar, conjugated_smoother,
                  orthogonality_probe, stationary_phase_scan)

__version__ = "0.1.0"
