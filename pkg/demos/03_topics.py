"""Group activities into topics and read them back.

Run with ``python demos/03_topics.py``.
"""

import numpy as np

from tracesumm import fit_topic_model, generate_synthetic_log, label_topics

log = generate_synthetic_log(400, 30, seed=4)
model = fit_topic_model(log, 4, base_attribute="activity", method="nmf", lam=0.5)
model = label_topics(model, dimension_names=log.schema.values[0])

sector = {int(a): int(s) for t in log for a, s, _ in t.events}
for code, name in enumerate(model.mapping.labels):
    members = np.flatnonzero(model.mapping.table == code)
    sectors = sorted({sector[m] for m in members if m in sector})
    print(f"topic labelled {name}: {len(members)} activities from sectors {sectors}")
