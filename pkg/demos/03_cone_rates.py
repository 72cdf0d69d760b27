"""Walk-through: exact spectral data on the cone over SO(3) and the
weighted-exponent calculator for the two-scale gluing tables."""

from fractions import Fraction as Fr

from g2glue import cone

so3 = cone.so3_link()

print("Critical rates of the Laplacian on the cone over SO(3):")
print("  1-forms in [-2, 0):", cone.critical_rates(so3, 1, -2, 0) or "none")
print("  2-forms in [-4+d, 0):",
      [(str(r.rate), r.dimension, r.case)
       for r in cone.critical_rates(so3, 2, Fr(-39, 10), 0)])
print("  log terms excluded at -2:", cone.log_kernel_check(-2, 2))
print("  index jump across -2 on 2-forms:", cone.index_change(2, -3, -1))

print("\nIndependent Cartesian oracle on R^4 minus the origin:")
for i, w in enumerate(cone.order_minus2_basis()):
    out = cone.harmonic_oracle_r4(w)
    print(f"  |x|^-2 form {i}: residual {out['residual']}, "
          f"order {out['order']}")
for w in cone.decaying_pair_forms():
    out = cone.harmonic_oracle_r4(w)
    print(f"  decaying pair: residual {out['residual']}, order "
          f"{out['order']}, closed {out['closed']}, coclosed "
          f"{out['coclosed']}")

print("\nSphere function spectrum by polynomial algebra:")
for m in range(5):
    out = cone.s3_function_spectrum_check(m)
    print(f"  m={m}: eigenvalue {out['eigenvalue']}, parity "
          f"{out['parity']:+d}, descends {out['descends_to_so3']}")

print("\nExact exponent bookkeeping for the two-scale torsion tables:")
B = Fr(-1, 5)
for beta in (Fr(-1, 20), Fr(-1)):
    expo = cone.jk_rate_bound(cone.naive_gradient_table(B), beta - 2)
    print(f"  naive table, beta={beta}: dominant exponent {expo} "
          f"(= 4/5 (2 - beta): {expo == Fr(4,5)*(2-beta)})")
print("  optimal B over the rational grid:",
      cone.best_B(cone.naive_gradient_table, Fr(-1, 20) - 2))
refined = cone.jk_rate_bound(cone.refined_gradient_table(), Fr(-1, 20) - 2)
print(f"  refined table: dominant exponent {refined} >= 13/5:",
      refined >= Fr(13, 5))
eps = Fr(1, 20)
print(f"  uniform-norm exponents: kappa=8/5 -> {cone.linf_exponent(Fr(8,5), -eps)}"
      f" (= 3/5 - eps), kappa=13/5 -> {cone.linf_exponent(Fr(13,5), -eps)}"
      f" (= 8/5 - eps)")
