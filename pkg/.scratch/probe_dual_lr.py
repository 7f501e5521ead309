import sys, json
from pathlib import Path
ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
import numpy as np
from semadv.data import ingest_dataset
from semadv.dual import DualConfig, train_dual

lr_disc = float(sys.argv[1])
steps = int(sys.argv[2])
s = ingest_dataset(ROOT / "artifacts/domains/mnist32")
t = ingest_dataset(ROOT / "artifacts/domains/mnist32-thick")
cfg = DualConfig(steps=steps, log_every=10, seed=0, lr_disc=lr_disc)
rows = []
train_dual(s, t, cfg, curve_sink=lambda step, rep: rows.append({"step": step, **rep.as_row()}))
cols = ["l_vae_s", "l_cc_s", "l_gan_s", "l_vae_t", "l_cc_t", "l_gan_t"]
out = {}
for c in cols:
    v = np.array([r[c] for r in rows])
    out[c] = {"first": round(float(v[:10].mean()), 4), "last": round(float(v[-10:].mean()), 4),
              "dec": bool(v[-10:].mean() < v[:10].mean())}
print(json.dumps({"lr_disc": lr_disc, "steps": steps, "cols": out}, indent=1))
