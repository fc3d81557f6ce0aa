from .core import (MajoranaQuadratic, QuasiFreeGenerator, build_xys, check_covariance,
                   chi_quasifree_freq, chi_quasifree_time, covariance_flow,
                   dissipative_part, expect_quadratic, hamiltonian_perturbation,
                   liouvillian_gap, ness_covariance, single_particle_mhr, source_term)
from .xychain import (build_xy_chain, correlation_length, critical_field,
                      ness_zz_correlations, product_covariance, rates_from_temperatures,
                      sz_expectations, sz_matrix, total_sz_matrix, xy_hamiltonian)
