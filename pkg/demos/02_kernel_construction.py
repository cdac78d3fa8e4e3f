"""Kernel machinery walkthrough: transfer function, folding, energies.

Shows the three routes to the phase-matching transfer function agreeing,
builds the folded 1/T-periodic kernel grid of the probe channel, extracts
the sparse time-domain kernel, classifies the degenerate sets, and prints
the energy decomposition in both views.  Finishes with a round trip through
the binary cache format.
"""

import os
import tempfile

import numpy as np

import fiberpert as fp

link = fp.homogeneous_link(1, 100e3, fp.alpha_from_db_km(0.2), -21e-27,
                           1.1e-3)
plan = fp.ChannelPlan((fp.ChannelSpec(64e9, 0.2, fp.dbm_to_watt(0.0)),),
                      probe=0)

print("=== phase-matching transfer function, three routes ===")
for om in (0.0, 1e21, 2.2e22):
    exact = fp.nonlinear_transfer(link, om)
    closed = fp.nonlinear_transfer_closed_form(link, om)
    quad = fp.nonlinear_transfer_quadrature(link, om / 5e10 if om else 0.0,
                                            5e10 if om else 0.0)
    print(f"  product {om:9.2e}: per-span {exact:.10f}")
    print(f"  {'':20s}  geometric {closed:.10f}")
    print(f"  {'':20s}  quadrature {quad:.10f}")

print("\n=== folded kernel grid of the probe ===")
n_fft = fp.default_n_fft(link, plan)
grid = fp.alias_kernel(link, plan, 0, n_fft)
print(f"  grid size {n_fft}^3, dc value {grid.values[0, 0, 0]:.6f} "
      "(normalized to one)")

print("\n=== sparse time-domain kernel ===")
for clip_db in (0, -40, -60):
    clip = 10 ** (clip_db / 10) if clip_db else 0.0
    td = fp.kernel_time_domain(grid, clip)
    print(f"  clip {clip_db:4d} dB -> {len(td.values):6d} of {n_fft**3} "
          f"entries, memory {td.memory():2d} symbols")

td = fp.kernel_time_domain(grid, 1e-6)
add, mult = fp.classify_sets_td(td, is_probe=True)
print(f"  at -60 dB: {int(add.sum())} additive, {int(mult.sum())} "
      "multiplicative entries")

print("\n=== kernel energies, time- and frequency-domain views ===")
full = fp.kernel_time_domain(grid, 0.0)
en = fp.kernel_energies(full, grid, is_probe=True)
print(f"  E_h: total {en.td.total:.4f} = additive {en.td.additive:.4f} "
      f"+ multiplicative {en.td.multiplicative:.4f}")
print(f"  E_H: total {en.fd.total:.4f} = additive {en.fd.additive:.4f} "
      f"+ multiplicative {en.fd.multiplicative:.4f}")
print(f"  (frequency-domain multiplicative share is close to 2/{n_fft} "
      f"= {2 / n_fft:.4f})")

print("\n=== binary cache round trip ===")
digest = fp.kernel_hash(link, plan, 0, n_fft)
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "probe.fkrn")
    fp.write_kernel_grid(path, grid, digest)
    loaded, stored = fp.read_kernel_grid(path)
    print(f"  wrote {os.path.getsize(path)} bytes, values identical: "
          f"{np.array_equal(loaded.values, grid.values)}, hash match: "
          f"{stored == digest}")
