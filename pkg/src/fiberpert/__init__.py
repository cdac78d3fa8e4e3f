"""End-to-end channel models for coherent fiber-optic transmission.

The library provides first-order-perturbation channel models in discrete
time and in 1/T-periodic discrete frequency (regular and regular-logarithmic
variants), the kernel machinery behind them, a Manakov split-step Fourier
reference simulator, and a transmit/receive harness for model-vs-simulation
validation sweeps.
"""

from .jones import (PAULI, SIGMA_1, SIGMA_2, SIGMA_3, jones_to_stokes,
                    outer_decompose, pauli_expand, rotate, unitary_rotation)
from .link import (ChannelPlan, ChannelSpec, CharacteristicQuantities,
                   LinkSpec, SpanSpec, accumulated_dispersion,
                   alpha_from_db_km, characteristic_quantities, dbm_to_watt,
                   effective_length, homogeneous_link, linear_transfer,
                   log_gain_profile, power_profile)
from .pulses import rc_shape, rrc_shape, tx_pulse_spectrum
from .kernels import (FreqKernelGrid, KernelEnergies, TimeKernelSparse,
                      alias_kernel, classify_sets_fd, classify_sets_td,
                      default_n_fft, e2e_kernel_unaliased, kernel_energies,
                      kernel_hash, kernel_time_domain, nonlinear_transfer,
                      nonlinear_transfer_closed_form,
                      nonlinear_transfer_quadrature, read_kernel_grid,
                      read_kernel_sparse, write_kernel_grid,
                      write_kernel_sparse)
from .models import (BlockFrame, ModelInput, overlap_save_append,
                     overlap_save_split, reg_fd, reg_td, reglog_fd, reglog_td)
from .ssfm import (FieldGrid, StepPolicy, linear_step, nonlinear_step,
                   propagate, read_field, wdm_mux, write_field)
from .txrx import (generate_symbols, modulate, mse, qam_levels,
                   receiver_frontend)
from .config import RunConfig, config_from_dict, config_hash, load_config
from .sweep import (PointResult, SweepResult, emit_csv, evaluate_point,
                    run_sweep)

__version__ = "0.1.0"
