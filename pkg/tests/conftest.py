import numpy as np
import pytest

from mosg import GameInstance
from mosg.bench.instances import generate_instance


def make_instance(u_unc_att, u_cov_att=None, u_cov_def=None, u_unc_def=None, r=0.5):
    """Instance from the uncovered attacker payoffs, filling the other matrices with simple defaults."""
    uu = np.atleast_2d(np.asarray(u_unc_att, dtype=float))
    uc = uu - 10.0 if u_cov_att is None else np.atleast_2d(u_cov_att)
    cd = np.full_like(uu, 5.0) if u_cov_def is None else np.atleast_2d(u_cov_def)
    ud = np.full_like(uu, -5.0) if u_unc_def is None else np.atleast_2d(u_unc_def)
    return GameInstance(r, uc, uu, cd, ud)


@pytest.fixture
def small_instance():
    return generate_instance(attackers=3, targets=6, resource_ratio=0.3, seed=11)


@pytest.fixture
def fig_instance():
    """Two attackers, four targets: attacker 0 prefers t4 alone, attacker 1 ranks t1 then t4."""
    return make_instance(
        u_unc_att=[[3, 2, 1, 9], [9, 1, 2, 8]],
        u_cov_att=[[-5, -5, -5, -5], [-5, -5, -5, -5]],
        u_cov_def=[[4, 4, 4, 6], [7, 3, 3, 5]],
        u_unc_def=[[-3, -3, -3, -6], [-8, -2, -2, -4]],
        r=0.5,
    )
