import dataclasses
import sys

import numpy as np

from snhmm.inference import RunConfig
from snhmm.scenarios import run_study, two_state_scenario

sc0 = two_state_scenario()
truth_xi = None

lo, hi = int(sys.argv[1]), int(sys.argv[2])
for seed in range(lo, hi):
    sc = dataclasses.replace(sc0, seed=seed)
    rep = run_study(sc, run=RunConfig(seed=seed))
    rows = {r["parameter"]: r for r in rep.param_rows}
    xi_errs = [rows[f"xi[{z},{k}]"]["mean"] - rows[f"xi[{z},{k}]"]["truth"]
               for z in (1, 2) for k in (1, 2)]
    a11_err = rows["A[1,1]"]["mean"] - rows["A[1,1]"]["truth"]
    ok = all(abs(e) < 0.5 for e in xi_errs) and abs(a11_err) < 0.10 and rep.accuracy >= 0.90
    print(f"seed {seed:>2}: acc {rep.accuracy:.3f} xi errs "
          + " ".join(f"{e:+.3f}" for e in xi_errs)
          + f" a11err {a11_err:+.3f} cov {rep.coverage:.2f} {'PASS' if ok else ''}",
          flush=True)
