"""Spectral and nuclear norms of the three-qubit W state over both fields.

The complex values meet the extremal pair for three qubits (2/3 and 3/2),
so the product of the two bounds is 1 and both are tight.  Over the reals
the nuclear bound is sqrt(3) and the product exceeds one.
"""

import numpy as np

from tensnorm import (AltOptions, Field, emit_report, eta, known_state, nuclear_upper, omega,
                      spectral_lower)


def main():
    w = known_state("W", n=3)
    row = {"name": "W"}
    for fld in (Field.REAL, Field.COMPLEX):
        spec = spectral_lower(w, fld, restarts=30, seed=0)
        nuc = nuclear_upper(w, fld, AltOptions(restarts=10, rng_seed=0))
        row[f"nuc_{fld.value}"] = nuc.value
        row[f"spec_{fld.value}"] = spec.value
        row[f"P_{fld.value}"] = nuc.value * spec.value
        if fld is Field.COMPLEX:
            print(f"eta   = {eta(w, spec):.4f}  (log2(9/4) = {np.log2(9 / 4):.4f})")
            print(f"omega = {omega(w, nuc):.4f}")
            print(f"{nuc.active_terms} terms, residual {nuc.residual:.1e}\n")
    print(emit_report([row]))


if __name__ == "__main__":
    main()
