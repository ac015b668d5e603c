"""
Where the last layer looks
==========================

Renders the final attention layer's average attention as a heat map over
the input image. With random weights the map is diffuse but not flat; a
trained backbone would concentrate it on the informative region.
"""

from pathlib import Path

import numpy as np

from painformer.backbone import PainFormer, attention_map
from painformer.imaging import get_colormap, write_image

out_dir = Path(__file__).resolve().parent / "out"
out_dir.mkdir(exist_ok=True)

# a synthetic input with an obvious hot corner
image = np.zeros((224, 224, 3), dtype=np.float32)
image[20:90, 20:90] = 1.0
yy, xx = np.mgrid[0:224, 0:224]
image[..., 2] += (0.2 * np.sin(xx / 9.0) * np.cos(yy / 13.0)).astype(np.float32)

model = PainFormer(seed=0)
heads = model.cfg.stages[-1].heads

lut = get_colormap("ember")
for head in range(min(heads, 4)):
    heat = attention_map(model, image, head=head)
    idx = np.clip(np.floor(heat * 255.0 + 0.5), 0, 255).astype(np.int64)
    path = out_dir / f"attention-head{head}.png"
    write_image(path, lut[idx])
    print(f"head {head}: spread={heat.std():.3f} -> {path}")
