"""How the uncertain-state weights and deliberation time shape the narrow-face fit.

Sweeps the C-D uncertain weight (0.25 is the squared-amplitude reading, 0.5 the
probability-level one) and the process time, refitting h_G and h_B each time.

    python scripts/weight_sensitivity.py
"""

import math
import warnings

import numpy as np

from qdb import data
from qdb.fit import FitWarning, fit_experiment, mean_relative_error


def sweep(w_cd, w_d=0.5, t=math.pi / 2):
    recs = data.narrow_experiments()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FitWarning)
        fits = [fit_experiment(r.p_g, r.p_b, r.p_attack_given_good, r.p_attack_given_bad, w_cd=w_cd, w_d=w_d, t=t)
                for r in recs]
    dev = max(
        max(abs(f.prediction.p_total_cd - data.reference(r.source_id, "QDB").p_t),
            abs(f.prediction.p_attack_d_alone - data.reference(r.source_id, "QDB").p_attack))
        for r, f in zip(recs, fits)
    )
    pairs = [(r.p_t_observed, f.prediction.p_total_cd) for r, f in zip(recs, fits)]
    pairs += [(r.p_attack_observed, f.prediction.p_attack_d_alone) for r, f in zip(recs, fits)]
    resid = max(max(f.residual_good, f.residual_bad) for f in fits)
    interference = np.mean([f.prediction.interference for f in fits])
    return dev, mean_relative_error(pairs), resid, interference


def main():
    print(f"{'w_cd':>5} {'w_d':>5} {'t':>6}  {'max|d Table4|':>13} {'MRE':>7} {'max resid':>9} {'P(A)-P_T':>9}")
    rows = [(w, 0.5, math.pi / 2) for w in (0.0, 0.125, 0.25, 0.375, 0.5)]
    rows += [(0.25, 0.5, t) for t in (math.pi / 4, 3 * math.pi / 8, 5 * math.pi / 8, math.pi)]
    for w_cd, w_d, t in rows:
        dev, mre, resid, interf = sweep(w_cd, w_d, t)
        print(f"{w_cd:5.3f} {w_d:5.3f} {t:6.3f}  {dev:13.4f} {100 * mre:6.2f}% {resid:9.1e} {interf:9.4f}")


if __name__ == "__main__":
    main()
