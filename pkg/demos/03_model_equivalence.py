"""Time-domain versus frequency-domain model equivalence.

The regular perturbation model exists in two numerically equivalent forms:
a triple sum over time-domain kernel entries, and a block-wise double sum
over the discrete 1/T-periodic frequency grid.  This script shows their
agreement tightening as the block overlap grows, at fixed block length.
"""

import numpy as np

import fiberpert as fp
from fiberpert.models import BlockFrame, ModelInput, reg_fd, reg_td
from fiberpert.txrx import generate_symbols

link = fp.homogeneous_link(1, 21.71e3, 0.0, -21e-27, 1.1e-3,
                           amplification="lossless")
plan = fp.ChannelPlan((fp.ChannelSpec(64e9, 0.2, fp.dbm_to_watt(0.0)),),
                      probe=0)
phi = fp.characteristic_quantities(link, plan).phi_nl[0]

grid = fp.alias_kernel(link, plan, 0, 64)
td = fp.kernel_time_domain(grid, 0.0)      # keep everything: exact channel
a = generate_symbols(64, 2**10, 1)
inp = ModelInput(probe=a, probe_nu=0, phi_nl={0: phi},
                 td_kernels={0: td}, fd_kernels={0: grid})

y_td = reg_td(inp)
print(f"block length 64, {2**10} PDM 64-QAM symbols, "
      f"nonlinear phase {phi * 1e3:.1f} mrad\n")
print("overlap   kept/block   interior mean-squared gap")
for overlap in (16, 32, 48, 56, 60):
    y_fd = reg_fd(inp, BlockFrame(64, overlap))
    d = (y_td - y_fd)[64:-64]
    gap = 10 * np.log10((np.abs(d) ** 2).sum(axis=1).mean())
    print(f"  {overlap:4d}      {64 - overlap:4d}        {gap:8.1f} dB")

print("\nThe residual gap comes from kernel tails beyond the per-block "
      "margin\nwrapping cyclically; it scales with the square of the "
      "nonlinear phase.")
