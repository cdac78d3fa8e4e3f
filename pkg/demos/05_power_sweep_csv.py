"""Sweep orchestration and CSV emission.

Evaluates a small launch-power grid for two model variants, with the kernel
cache demonstrating that power sweeps rebuild nothing, and writes the rows
to CSV in the fixed, versioned column layout.
"""

import csv
import os
import tempfile

from fiberpert.sweep import emit_csv, run_sweep

BASE = {
    "link": {"n_spans": 1, "span_km": 21.71, "alpha_db_km": 0.0,
             "beta2_ps2_km": -21.0, "gamma_w_km": 1.1,
             "amplification": "lossless"},
    "channels": {"0": {"symbol_rate_gbd": 64.0, "rolloff": 0.2,
                       "power_dbm": 0.0}},
    "model": {"type": "reglog-td", "n_sym": 2048, "seed": 7,
              "clip_db": -60.0},
    "ssfm": {"phi_max_rad": 3.5e-4},
}

with tempfile.TemporaryDirectory() as tmp:
    BASE["model"]["cache_dir"] = os.path.join(tmp, "cache")
    grid = {"power_dbm": [0.0, 3.0, 6.0], "model": ["reg-td", "reglog-td"]}
    result = run_sweep(BASE, grid)
    out = os.path.join(tmp, "sweep.csv")
    emit_csv(result, out)

    print(f"{len(result.rows)} grid points evaluated, all ok: {result.ok}")
    print(f"kernel cache holds {len(os.listdir(BASE['model']['cache_dir']))} "
          "file (reused across powers and models)\n")
    with open(out, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    keep = [0, 1, 3, 8, 17]
    header = [rows[0][i] for i in keep]
    print("   ".join(f"{h:18s}" for h in header))
    for row in rows[1:]:
        print("   ".join(f"{row[i]:18s}" for i in keep))

print("\nThe error column stays empty on success; failed points keep the "
      "run alive\nand record the reason there instead.")
