"""Walk through the measurement model: scattered samples -> (h, c) pair.

Scattered points land between pixels; each grid point gathers the samples in
its open unit square with tanh(r)/r weights.  The weight image c doubles as
the confidence of each pixel in the data-fit term, and h is the weighted
average of the sample values (zero where nothing was observed).
"""

import numpy as np

from scatrec import GridSpec, SampleSet, bin_samples, tanh_weight

rng = np.random.default_rng(0)
grid = GridSpec(8, 8)

print("kernel values: w(0) =", tanh_weight(0.0), " w(0.5) =", round(tanh_weight(0.5), 6))

# a handful of scattered measurements of a bright diagonal streak
n = 40
xs = rng.uniform(0, grid.width - 1e-9, n)
ys = rng.uniform(0, grid.height - 1e-9, n)
values = np.exp(-((xs - ys) ** 2) / 4.0)
samples = SampleSet(xs, ys, values, grid)

binned = bin_samples(samples)
print("\nweight image c (sample density proxy):")
print(np.array_str(binned.c.data, precision=2, suppress_small=True))
print("\nnormalized measurement h:")
print(np.array_str(binned.h.data, precision=2, suppress_small=True))

covered = binned.c.data > 0
print(f"\ncovered pixels: {covered.sum()} of {grid.pixels}")
print("h stays inside the sample value range on covered pixels:",
      float(binned.h.data[covered].min()) >= float(values.min()) - 1e-12,
      float(binned.h.data[covered].max()) <= float(values.max()) + 1e-12)
