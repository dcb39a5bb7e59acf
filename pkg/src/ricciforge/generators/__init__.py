"""Closed-form solution pipelines."""
from .solitons import (SolitonChoice, sine_gordon_q, sine_gordon_dq, sine_gordon_ddq, sine_gordon_field,
                       kdv_travelling_wave, kdv_parameters, kdv_soliton_residual, soliton_field)
from .ppwave import PpWaveChoice, plane_wave, wave_packet, kappa_field, check_harmonic, laplacian_xy
from .poisson import solve_psi_poisson, particular_psi, liouville_psi
from .string import (solitonic_string_metric, string_polarizations, w_from_phi, n_from_quadrature,
                     string_grid, STRING_DOMAIN)
from .vacuum import vacuum_solitonic_metric, vacuum_grid, curl_residual, VACUUM_DOMAIN
from .schwarzschild import (stationary_deformation, rotoid_horizon, rotoid_K, small_eps_polarizations,
                            xi_domain, RotoidHorizon)
from .extradim import (ExtraDimSpec, extradim_metric, time_anisotropic_metric, default_spec,
                       sech2_profile, extradim_grid, EXTRADIM_DOMAIN)
