"""CLI + HTTP service smoke on a tiny disk dataset."""
import base64
import json
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import cv2
import numpy as np

sys.path.insert(0, "/root/pkg/src")
from semadv.rng import numpy_stream

root = Path("/tmp/smoke-cli")
data = root / "data"
runs = root / "runs"
root.mkdir(exist_ok=True)

# synthetic image-directory dataset (3 classes, 16x16)
rng = numpy_stream(7, "synth")
for y in range(3):
    d = data / str(y)
    d.mkdir(parents=True, exist_ok=True)
    for i in range(60):
        img = rng.uniform(0, 0.2, size=(16, 16)).astype(np.float32)
        if y == 0:
            img[2:5, :] += 0.7
        elif y == 1:
            img[:, 2:5] += 0.7
        else:
            img[4:9, 4:9] += 0.7
        cv2.imwrite(str(d / f"{i:03d}.png"),
                    (np.clip(img, 0, 1) * 255).astype(np.uint8))

def run(*args, check=True):
    cmd = [sys.executable, "-m", "semadv.cli", *args]
    out = subprocess.run(cmd, capture_output=True, text=True, cwd="/root/pkg")
    print(">>", " ".join(args[:4]), "| exit", out.returncode)
    if out.returncode != 0:
        print(out.stdout[-1500:]); print(out.stderr[-3000:])
        if check:
            sys.exit(1)
    return out

common = ["--data", str(data), "--dataset-format", "image-directory", "--runs", str(runs)]
out = run("train-oracle", *common, "--epochs", "8", "--batch-size", "32", "--seed", "1")
oracle_run = out.stdout.strip().splitlines()[-1].split()[1]
oracle_ckpt = runs / oracle_run / "checkpoints" / "oracle.ckpt"
print("oracle:", out.stdout.strip().splitlines()[0])

out = run("train-cfvae", *common, "--steps", "150", "--batch-size", "24", "--m", "6",
          "--seed", "2", "--set", "log_every=50", "--set", "mlp_layers=2",
          "--set", "mlp_hidden=64", "--set", "dense=64")
cfvae_run = out.stdout.strip().splitlines()[-1].split()[1]
cfvae_ckpt = runs / cfvae_run / "checkpoints" / "cfvae.ckpt"
print("cfvae:", out.stdout.strip().splitlines()[0])

# attack campaign over 3 dataset instances
out = run("attack", *common, "--checkpoint", str(cfvae_ckpt), "--oracle", str(oracle_ckpt),
          "--factor", "2", "--count", "3", "--theta-ssim", "-100", "--theta-er", "0.0",
          "--eps", "0.5", "--r-max", "3.0", "--candidates", "16", "--seed", "9")
attack_run = out.stdout.strip().splitlines()[-1].split()[1]
print((runs / attack_run / "results" / "metrics.csv").read_text())

# single-image attack via PNG file (server parity path)
png = root / "probe.png"
img = cv2.imread(str(data / "0" / "000.png"), cv2.IMREAD_UNCHANGED)
cv2.imwrite(str(png), img)
out = run("attack", "--runs", str(runs), "--checkpoint", str(cfvae_ckpt),
          "--oracle", str(oracle_ckpt), "--factor", "2", "--image", str(png),
          "--theta-ssim", "-100", "--theta-er", "0.0", "--eps", "0.5",
          "--r-max", "3.0", "--candidates", "16", "--seed", "9")
img_run = out.stdout.strip().splitlines()[-1].split()[1]
cli_result = (runs / img_run / "results" / "result.json").read_bytes()
print("cli result bytes", len(cli_result))

# sweep
out = run("sweep", *common, "--checkpoint", str(cfvae_ckpt), "--oracle", str(oracle_ckpt),
          "--factor", "1", "--class", "0")
# universal
out = run("universal", *common, "--checkpoint", str(cfvae_ckpt), "--oracle", str(oracle_ckpt),
          "--factor", "2", "--class", "0", "--theta-ssim", "-100", "--theta-er", "0",
          "--theta-fr", "0", "--eps", "0.5", "--r-max", "3", "--candidates", "16",
          "--m-validation", "8", "--seed", "4")
# baseline
out = run("baseline", *common, "--kind", "fgsm", "--oracle", str(oracle_ckpt),
          "--count", "3", "--eps", "0.3")
bl_run = out.stdout.strip().splitlines()[-1].split()[1]
# eval single run
out = run("eval", "--runs", str(runs), "--run", attack_run)
# eval aggregate
out = run("eval", "--runs", str(runs), "--aggregate", f"{attack_run},{bl_run}")
# eval checkpoint mse
out = run("eval", *common, "--checkpoint", str(cfvae_ckpt))

# handbook (tiny)
out = run("handbook", *common, "--checkpoint", str(cfvae_ckpt), "--oracle", str(oracle_ckpt),
          "--factors", "1,2", "--classes", "0,1", "--per-class-n", "4",
          "--theta-ssim", "-100", "--theta-er", "0", "--eps", "0.5", "--r-max", "1.5")

# serve + HTTP parity
proc = subprocess.Popen(
    [sys.executable, "-m", "semadv.cli", "serve", "--runs", str(runs),
     "--checkpoint", str(cfvae_ckpt), "--oracle", str(oracle_ckpt), "--port", "0"],
    stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True, cwd="/root/pkg")
line = proc.stdout.readline().strip()
print("serve:", line)
port = int(line.split("port")[1].split()[0])
base = f"http://127.0.0.1:{port}"

def post(path, payload):
    req = urllib.request.Request(base + path, data=json.dumps(payload).encode(),
                                 headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req) as r:
        return r.read()

b64 = base64.b64encode(png.read_bytes()).decode()
factors = json.loads(urllib.request.urlopen(base + "/factors").read())
print("factors m =", factors["m"])
z = json.loads(post("/encode", {"image": b64}))["z"]
dec = json.loads(post("/decode", {"z": z}))
pred = json.loads(post("/predict", {"image": b64}))
print("predict label", pred["label"])
sw = json.loads(post("/sweep", {"image": b64, "factor": 1}))
print("sweep records", len(sw["records"]))
th = {"theta_er": 0.0, "theta_sim": -100.0, "theta_fr": 0.2, "eps": 0.5,
      "r_max": 3.0, "n_candidates": 16, "m_validation": 100}
http_result = post("/attack", {"image": b64, "mode": "factor", "factor": 2,
                               "seed": 9, "thresholds": th})
print("HTTP/CLI byte-identical:", http_result == cli_result)

# annotation persistence
req = urllib.request.Request(base + "/factors/3", data=json.dumps({"label": "bar width"}).encode(),
                             method="PUT", headers={"Content-Type": "application/json"})
urllib.request.urlopen(req).read()
factors = json.loads(urllib.request.urlopen(base + "/factors").read())
print("annotation:", factors["annotations"])
run_rec = json.loads(urllib.request.urlopen(base + f"/runs/{attack_run}").read())
print("run record status:", run_rec["status"])

proc.terminate()
print("CLI+SERVER SMOKE DONE")
