"""
Multi-task training at desk scale
=================================

Trains the reduced backbone on three synthetic classification tasks that
share one encoder. Each task loss enters the total through a learned
uncertainty weight; at convergence each weight should sit near the log of
its task's loss, so noisier tasks get discounted automatically.

Takes about half a minute on one cpu core.
"""

import numpy as np

from painformer.training import TrainConfig, default_toy_specs, make_synthetic_task, train_toy_multitask

cfg = TrainConfig(seed=7)
tasks = [make_synthetic_task(s, cfg.seed) for s in default_toy_specs()]
for t in tasks:
    print(f"task {t.spec.name:9s} classes={t.spec.classes} "
          f"train={t.train_idx.size} eval={t.eval_idx.size}")

result = train_toy_multitask(tasks, cfg)

print("\nstep   lr        total_loss")
for rec in result.records[::60] + [result.records[-1]]:
    print(f"{rec['step']:4d}   {rec['lr']:.2e}  {rec['total_loss']:.4f}")

print("\nfinal eval accuracy:")
for name, acc in result.accuracies.items():
    print(f"  {name:9s} {acc:.3f}")

# the learned weights order themselves like the task losses
last = result.records[-1]
print("\nlearned loss weights (w) vs per-task loss at the last step:")
for t in tasks:
    print(f"  {t.spec.name:9s} w={last['w_' + t.spec.name]: .3f}  "
          f"loss={last['loss_' + t.spec.name]:.3f}  "
          f"ln(loss)={np.log(last['loss_' + t.spec.name]): .3f}")
