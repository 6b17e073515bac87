"""Gradient certification of every training loss on a small toy model.

Each case pairs a parameter list with a loss builder suitable for
``autodiff.grad_check``: the builder receives a fresh tape and leaves in
a fixed order and returns the scalar loss.  All cases use a 2+2
dimensional problem with a handful of samples so the full sweep over
every parameter coordinate stays fast.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import grad_check
from .estimators.critic import CriticModel
from .estimators.doe import DoeModel
from .estimators.losses import build_flow_joint_nll, build_flow_x_nll
from .flows import BlockAutoregressiveFlow, RealNvpFlow
from .rng import Rng

__all__ = ["certification_cases", "run_certification", "DEFAULT_TOLERANCE"]

DEFAULT_TOLERANCE = 1e-5


def _model_case(model, build):
    names = sorted(model.params)
    arrays = [np.asarray(model.params[n], dtype=np.float64) for n in names]

    def f(tape, leaves):
        return build(tape, dict(zip(names, leaves)))

    return arrays, f


def certification_cases(seed: int = 0, batch: int = 6) -> dict:
    """Named (params, loss builder) pairs covering every estimator loss."""
    rng = Rng(seed)
    n_y = n_x = 2
    Y = rng.normal((batch, n_y))
    X = 0.6 * Y + 0.8 * rng.normal((batch, n_x))
    yx = np.concatenate([Y, X], axis=1)
    Y_neg = Y[rng.derangement(batch)]

    bnaf = BlockAutoregressiveFlow(n_y, n_x, hidden_mult=3, hidden_layers=2,
                                   gated=True, rng=rng.spawn(1))
    nvp = RealNvpFlow(n_y, n_x, couplings=2, hidden=6, rng=rng.spawn(2))
    doe_g = DoeModel(n_y, n_x, family="gaussian", hidden=6, rng=rng.spawn(3))
    doe_l = DoeModel(n_y, n_x, family="logistic", hidden=6, rng=rng.spawn(4))
    critic = CriticModel(n_x, n_y, hidden=6, rng=rng.spawn(5))

    def flow_loss(flow, masked):
        def build(tape, pv):
            return build_flow_x_nll(tape, flow, pv, yx, masked=masked)
        return build

    def joint_loss(flow):
        def build(tape, pv):
            return build_flow_joint_nll(tape, flow, pv, yx)
        return build

    def doe_loss(model):
        def build(tape, pv):
            marg, cond = model.losses(tape, pv, Y, X)
            return ad.add(marg, cond)
        return build

    def critic_loss(kind, clip):
        def build(tape, pv):
            return critic.pair_bound(tape, pv, X, Y, Y_neg, kind, clip)
        return build

    def infonce_loss(tape, pv):
        return critic.infonce_bound(tape, pv, X, Y)

    def js_loss(tape, pv):
        return critic.js_objective(tape, pv, X, Y, Y_neg)

    cases = {
        "l1_bnaf": _model_case(bnaf, flow_loss(bnaf, masked=False)),
        "l2_bnaf": _model_case(bnaf, flow_loss(bnaf, masked=True)),
        "joint_bnaf": _model_case(bnaf, joint_loss(bnaf)),
        "l1_realnvp": _model_case(nvp, flow_loss(nvp, masked=False)),
        "l2_realnvp": _model_case(nvp, flow_loss(nvp, masked=True)),
        "doe_gaussian": _model_case(doe_g, doe_loss(doe_g)),
        "doe_logistic": _model_case(doe_l, doe_loss(doe_l)),
        "nwj": _model_case(critic, critic_loss("nwj", 0.0)),
        "mine": _model_case(critic, critic_loss("mine", 0.0)),
        "smile_tau5": _model_case(critic, critic_loss("smile", 5.0)),
        "infonce": _model_case(critic, infonce_loss),
        "smile_js_surrogate": _model_case(critic, js_loss),
    }
    return cases


def run_certification(seed: int = 0, h: float = 1e-5) -> dict[str, float]:
    """Worst-case relative gradient error per named loss."""
    report = {}
    for name, (arrays, f) in certification_cases(seed).items():
        report[name] = grad_check(f, arrays, h=h)
    return report
