"""The default surface, its special loci, and the exact identity suite."""

from minitwistor.identities import verify_identities
from minitwistor.segre import build_surface, discriminant_angles

S = build_surface(16, 0, 25, "exact")
print("a, b, c =", S.params.a, S.params.b, S.params.c, " square roots:", *S.sqrt_abc)
print("nodes:", *S.nodes)
print("discriminant points:", *S.lambdas)
print("poles:", *S.poles)
print("base-conic angles of the discriminant points:", [round(a, 4) for a in discriminant_angles(S)])

res, elapsed, ok = verify_identities(S)
for r in res:
    print(f"  {'ok ' if r.ok else 'BAD'} {r.name}")
print(f"{sum(r.ok for r in res)}/{len(res)} exact identities in {elapsed:.2f} s")
