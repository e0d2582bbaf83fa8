"""Nuclear and spectral norms of small symmetric qubit states.

The symmetric alternating method only ever uses symmetric terms, so its
bound is also an upper bound for the dense tensor.  Spectral bounds use the
damped symmetric power iteration.  Row 10 is the slowest (six qubits).
"""

import sys

from tensnorm import (AltOptions, Field, emit_report, known_state, sym_from_dense,
                      sym_nuclear_upper, sym_spectral_lower)


def main(rows=(1, 2, 5, 6, 8)):
    out = []
    for r in rows:
        s = sym_from_dense(known_state("sym-qubits", row=r))
        rec = {"name": f"row {r}"}
        for fld in (Field.REAL, Field.COMPLEX):
            nuc = sym_nuclear_upper(s, fld, AltOptions(restarts=6, rng_seed=r))
            spec = sym_spectral_lower(s, fld, restarts=30, seed=r)
            rec[f"nuc_{fld.value}"] = nuc.value
            rec[f"spec_{fld.value}"] = spec.value
            rec[f"P_{fld.value}"] = nuc.value * spec.value
        out.append(rec)
    print(emit_report(out))


if __name__ == "__main__":
    main(tuple(int(a) for a in sys.argv[1:]) or (1, 2, 5, 6, 8))
