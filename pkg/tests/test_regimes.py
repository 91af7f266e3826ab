"""Two-regime separation of stationary laws for coupled samples.

For a degree-profile-separated pair the TV distance between the two walks'
stationary distributions converges to delta/2; for a profile-matched (family)
pair it is pure sampling noise of order n^{-1/2}. The max-coordinate gap is
noise-dominated for both regimes at these sizes, so the regime split is
asserted in TV, where it is already clean at n in the hundreds.
"""

from math import log

import numpy as np

from graphonlab import FamilySpec, family_generate, sample_coupled, stationary
from graphonlab.seeding import derive_seed
from graphonlab.testing import fit_decay_exponent

from helpers import SBM_BASE, SBM_SEPARATED

DELTA = 1.0 / 14.0
SIZES = (250, 500, 1000)
PAIRS = 8


def mean_stationary_tv(w0, w1, n, tag):
    tvs = []
    for i in range(PAIRS):
        pair = sample_coupled(
            w0, w1, n, derive_seed(tag, n * 100 + i), share_edge_randomness=True
        )
        pi0 = stationary(pair.g0)
        pi1 = stationary(pair.g1)
        tvs.append(0.5 * np.abs(pi0 - pi1).sum())
    return float(np.mean(tvs))


def test_two_regime_separation_of_stationary_laws():
    w_sep0 = SBM_BASE.to_step_graphon()
    w_sep1 = SBM_SEPARATED.to_step_graphon()
    w_fam1 = family_generate(FamilySpec(SBM_BASE, 0.05)).to_step_graphon()

    sep_tv = {n: mean_stationary_tv(w_sep0, w_sep1, n, 0x5E9) for n in SIZES}
    fam_tv = {n: mean_stationary_tv(w_sep0, w_fam1, n, 0xFA9) for n in SIZES}

    # separated pair: TV flat at delta/2
    for n in SIZES:
        assert 0.45 * DELTA <= sep_tv[n] <= 0.60 * DELTA, (n, sep_tv[n])

    # family pair: TV is sampling noise, decaying like n^(-1/2)
    exponent = fit_decay_exponent(SIZES, [fam_tv[n] for n in SIZES])
    assert -0.65 <= exponent <= -0.35, exponent

    # the separation ratio grows with n (the sqrt(n) trend at desk scale)
    ratios = [sep_tv[n] / fam_tv[n] for n in SIZES]
    assert all(r > 1.0 for r in ratios), ratios
    assert ratios[-1] > 1.5 * ratios[0], ratios
