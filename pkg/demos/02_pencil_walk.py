"""Walk once around the tangent pencil at a generic point and at a point of
the merged stratum, printing the section type on each arc, then draw the
sequence as SVG files in demo_out/pencil."""

from pathlib import Path

import numpy as np

from minitwistor.cli import default_generic_point
from minitwistor.pencil import pencil_profile
from minitwistor.segre import default_surface
from minitwistor.svg import circle_diagram, section_svg

S = default_surface()
out = Path("demo_out/pencil")
out.mkdir(parents=True, exist_ok=True)

for label, p in [("generic", default_generic_point(S)), ("merged", np.array([3.0, 0.0, 1.0, 0.0, 1.0]))]:
    prof = pencil_profile(S, p)
    print(f"\n{label} point {np.round(p, 4)}  merged={prof.merged}  order={' '.join(prof.order)}")
    rows = sorted(prof.members + prof.intervals,
                  key=lambda e: (prof.direction * (e.get("angle", e.get("sample")) - prof.specials["H0"].angle)) % np.pi)
    for k, e in enumerate(rows):
        psi = e.get("angle", e.get("sample"))
        print(f"  {e['name']:3s} psi={psi:.5f}  {e['tag']:22s} expected {e['expected']}")
        svg = section_svg(S, e["result"].components, marks=[("p", prof.frame.P)], title=f"{e['name']}: {e['tag']}")
        (out / f"{label}_{k:02d}_{e['name']}.svg").write_text(svg)
    (out / f"{label}_circle.svg").write_text(circle_diagram(prof))
    print("  table conforms" if prof.table_ok else f"  differences: {prof.diagnostics}")
