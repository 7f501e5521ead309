"""End-to-end smoke of every engine path on tiny synthetic data."""
import sys
import numpy as np
import torch

sys.path.insert(0, "/root/pkg/src")

from semadv.data import DatasetSplit, ImageBatch, LabelBatch
from semadv.cfvae import TrainConfig, train_cfvae, reconstruction_mse
from semadv.attack import (Thresholds, search_single, random_latent_search,
                           sweep_factor, search_universal, build_handbook,
                           average_universal, effective_ratio)
from semadv.nets import TorchOracle, LeNet, save_checkpoint, load_checkpoint, seed_init
from semadv.ganboost import GanConfig, train_gan, train_cfvae_boosted
from semadv.dual import DualConfig, train_dual, translate, attack_feature_map, perturb_feature_map
from semadv.baselines import PixelAttackConfig, fgsm, ifgsm, carlini_l2
from semadv.errors import NoAdversaryError, NoUniversalError
from semadv.rng import numpy_stream


def synth_split(n_train=240, n_test=60, hw=16, num_classes=3, seed=7):
    rng = numpy_stream(seed, "synth")
    def make(n):
        xs = np.zeros((n, hw, hw, 1), dtype=np.float32)
        ys = rng.integers(0, num_classes, size=n)
        for i, y in enumerate(ys):
            img = rng.uniform(0, 0.2, size=(hw, hw)).astype(np.float32)
            if y == 0:
                img[2:5, :] += 0.7          # horizontal bar
            elif y == 1:
                img[:, 2:5] += 0.7          # vertical bar
            else:
                img[4:9, 4:9] += 0.7        # block
            xs[i, :, :, 0] = np.clip(img, 0, 1)
        return ImageBatch(xs), LabelBatch(ys.astype(np.int64), num_classes)
    tx, ty = make(n_train)
    sx, sy = make(n_test)
    return DatasetSplit(train_x=tx, train_y=ty, test_x=sx, test_y=sy)


split = synth_split()
print("split ok", split.image_shape, split.num_classes)

# oracle
net = seed_init(LeNet(split.image_shape, split.num_classes), 0, "oracle")
opt = torch.optim.Adam(net.parameters(), lr=2e-3)
from semadv.data import minibatches
import torch.nn.functional as F
for i, (bx, by) in enumerate(minibatches(split, 32, 0, epochs=14)):
    opt.zero_grad()
    loss = F.cross_entropy(net(bx.torch()), torch.from_numpy(by.labels))
    loss.backward(); opt.step()
oracle = TorchOracle(net)
from semadv.nets import oracle_accuracy
acc = oracle_accuracy(oracle, split.test_x, split.test_y)
print("oracle acc", acc)

# cfvae
cfg = TrainConfig(m=6, steps=120, batch_size=24, log_every=20, snapshot_every=50,
                  mlp_layers=2, mlp_hidden=64, dense=64, seed=3)
models, curves = train_cfvae(cfg, split)
print("cfvae trained; last report", curves[-1][1].as_row())
print("recon mse", reconstruction_mse(models, split))

# checkpoint round trip
p = save_checkpoint(models, "/tmp/smoke-cfvae.ckpt", meta={"m": 6})
m2, meta = load_checkpoint(p)
print("checkpoint ok", sorted(m2), meta)

# attack
th = Thresholds(theta_sim=-100.0, theta_er=0.0, n_candidates=16, r_max=3.0, eps=0.5)
x0 = split.test_x.pixels[0]
try:
    res = search_single(models, oracle, x0, 2, th, seed=5)
    print("factor attack:", res.succeeded, res.delta, res.flags)
    if res.terminal_candidates:
        er = effective_ratio(oracle, models["decoder"], models["encoder"], x0, 2,
                             res.terminal_candidates)
        print("er bookkeeping:", er, res.er_terminal)
except NoAdversaryError as e:
    print("factor attack: no adversary ->", e.result.flags)

try:
    res = random_latent_search(models, oracle, x0, th, seed=5)
    print("random attack:", res.succeeded, res.magnitude)
except NoAdversaryError as e:
    print("random attack: no adversary")

recs = sweep_factor(models, oracle, x0, 1)
print("sweep records", len(recs), recs[20])

try:
    res = search_universal(models, oracle, split, 0, 2,
                           Thresholds(theta_sim=-100.0, theta_er=0.0, theta_fr=0.0,
                                      n_candidates=16, r_max=3.0, eps=0.5,
                                      m_validation=10), seed=1)
    print("universal:", res.succeeded, res.fr)
except (NoAdversaryError, NoUniversalError) as e:
    print("universal failed:", type(e).__name__)

book = build_handbook(models, oracle, split, [0, 1], th, per_class_n=4, seed=0,
                      classes=[0, 1])
print("handbook entries", len(book.entries))

from semadv.data import class_subset
cons, _ = class_subset(split, 0, 4, 3, part="train")
val, _ = class_subset(split, 0, 8, 4, part="train")
try:
    res = average_universal(models, oracle, cons, 2, th, val, seed=2)
    print("average universal:", res.succeeded, res.fr)
except (NoAdversaryError, NoUniversalError) as e:
    print("average universal failed:", type(e).__name__)

# gan + boosted
gcfg = GanConfig(noise_dim=8, steps=40, batch_size=16, sample_every=1000, seed=1)
pair = train_gan(split, gcfg)
print("gan trained")
bcfg = TrainConfig(m=6, steps=40, batch_size=16, log_every=10, booster=True,
                   mlp_layers=2, mlp_hidden=64, dense=64, seed=3)
bmodels, bcurves = train_cfvae_boosted(bcfg, split, pair.freeze())
print("boosted trained; last", bcurves[-1][1].as_row())

# dual (32x32 needed: H,W div by 4 -> 16x16 div by 4)
dcfg = DualConfig(cz=4, steps=30, batch_size=8, log_every=10, seed=2,
                  widths=(8, 12, 12, 12))
model, dcurves = train_dual(split, split, dcfg)
print("dual trained; last", dcurves[-1][1].as_row())
out = translate(model, split.test_x.take(slice(0, 3)))
print("translate", out.pixels.shape, out.pixels.min(), out.pixels.max())
z = np.zeros(model.latent_shape, dtype=np.float64)
z2 = perturb_feature_map(z, 1, 0.5)
print("perturb changed", int((z2 != z).sum()), "elements")
try:
    res = attack_feature_map(model, oracle, split.test_x.pixels[0], 0, th, seed=3)
    print("feature attack:", res.succeeded)
except NoAdversaryError as e:
    print("feature attack: no adversary")

# dual checkpoint round trip
p = save_checkpoint({"dual": model}, "/tmp/smoke-dual.ckpt", meta={})
d2, _ = load_checkpoint(p)
print("dual checkpoint ok; shared:", d2["dual"].enc_back_s is d2["dual"].enc_back_t)

# baselines
y0 = int(oracle.predict(x0[None])[0])
xa = fgsm(oracle, x0, y0, 0.3)
print("fgsm flip:", int(oracle.predict(xa[None])[0]) != y0)
xa = ifgsm(oracle, x0, y0, 0.3, 0.05, 20)
print("ifgsm flip:", int(oracle.predict(xa[None])[0]) != y0)
pc = PixelAttackConfig(eps=0.3, alpha=0.02, iterations=60, kappa=0.0, c=2.0, lr=0.05)
out = carlini_l2(oracle, x0, y0, pc)
print("carlini:", out.success, float(np.linalg.norm((out.x_adv - x0).ravel())))
print("ALL SMOKE PATHS DONE")
