"""Link description walkthrough: spans, profiles, characteristic scales.

Builds the two reference links used throughout (a lossless 21.71 km span
and a 100 km standard single-mode fiber span with end-of-span gain) and
prints the quantities every model run starts from: accumulated dispersion,
normalized power profile, effective length, and the per-channel strength
and memory scales of the nonlinear interaction.
"""

import numpy as np

import fiberpert as fp

lossless = fp.homogeneous_link(1, 21.71e3, 0.0, -21e-27, 1.1e-3,
                               amplification="lossless")
ssmf = fp.homogeneous_link(1, 100e3, fp.alpha_from_db_km(0.2), -21e-27,
                           1.1e-3)

print("=== accumulated dispersion (ps^2) along the standard fiber ===")
for z_km in (0, 25, 50, 75, 100):
    b = fp.accumulated_dispersion(ssmf, z_km * 1e3) / 1e-24
    print(f"  z = {z_km:3d} km   B = {b:8.1f} ps^2")

print("\n=== normalized power profile (lumped gain resets at span end) ===")
for z_km in (0, 25, 50, 75, 99.999, 100):
    p = fp.power_profile(ssmf, z_km * 1e3)
    print(f"  z = {z_km:7.3f} km   P = {p:.4f}")

print("\n=== effective lengths ===")
print(f"  lossless span : {fp.effective_length(lossless) / 1e3:.3f} km "
      "(equals the physical length)")
print(f"  standard fiber: {fp.effective_length(ssmf) / 1e3:.3f} km "
      "(20 dB span loss)")

print("\n=== characteristic quantities at 64 GBd, 0 dBm ===")
plan = fp.ChannelPlan((fp.ChannelSpec(64e9, 0.2, fp.dbm_to_watt(0.0)),),
                      probe=0)
for name, link in (("lossless", lossless), ("standard", ssmf)):
    cq = fp.characteristic_quantities(link, plan)
    print(f"  {name:9s}: dispersion length {cq.dispersion_length / 1e3:6.3f} km,"
          f" map strength {cq.map_strength:6.2f},"
          f" nonlinear phase {cq.phi_nl[0] * 1e3:6.2f} mrad")

print("\n=== linear channel transfer function is all-pass end to end ===")
omega = 2 * np.pi * np.linspace(-38e9, 38e9, 5)
h = fp.linear_transfer(ssmf, 100e3, omega)
for w, v in zip(omega, h):
    print(f"  f = {w / 2 / np.pi / 1e9:6.1f} GHz   |H| = {abs(v):.6f}   "
          f"arg H = {np.angle(v):+7.3f} rad")
