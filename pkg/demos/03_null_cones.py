"""The conformal structure on W: signature, the time-like fibre direction, and
null directions built from double points of the residual divisor."""

import numpy as np

from minitwistor.weyl import (_pole_vectors, classify_direction, conformal_form, fiber_direction_type,
                              null_direction, parametrize_minitwistor, random_wpoint, w_chart)
from minitwistor.segre import default_surface

S = default_surface()
rng = np.random.default_rng(0)
points = [random_wpoint(S, rng) for _ in range(4)] + [w_chart(S, _pole_vectors(S)[0], 0.3)]

for w in points:
    form = conformal_form(S, w)
    nq = parametrize_minitwistor(S, w)
    nulls = [classify_direction(S, w, null_direction(S, w, t, nq), nq) for t in (-1.0, 0.5, 3.0)]
    print(f"s={w.s:.3f} {'pole' if w.pole is not None else 'regular'}: "
          f"eigenvalues {np.round(np.linalg.eigvalsh(form.G), 4)}  residual {form.residual:.1e}  "
          f"fibre {fiber_direction_type(S, w)}  doubled points {nulls}")
