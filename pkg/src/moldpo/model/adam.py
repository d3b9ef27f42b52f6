"""Functional Adam with bias correction.

Updates never mutate their inputs: both the parameter dict and the optimizer
state come back as fresh tensors, which keeps checkpointing and the
frozen-reference discipline of preference training trivial to reason about.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Tuple

import torch

from ..errors import NonFiniteGradient, ShapeMismatch
from .transformer import Parameters


@dataclass(frozen=True)
class OptimizerState:
    step: int
    lr: float
    beta1: float
    beta2: float
    eps: float
    m: Dict[str, torch.Tensor]
    v: Dict[str, torch.Tensor]


def init_optimizer(
    params: Parameters,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> OptimizerState:
    return OptimizerState(
        step=0,
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
        m={name: torch.zeros_like(t) for name, t in params.items()},
        v={name: torch.zeros_like(t) for name, t in params.items()},
    )


def adam_step(
    params: Parameters, opt: OptimizerState, grads: Parameters
) -> Tuple[Parameters, OptimizerState]:
    if set(grads) != set(params):
        raise ShapeMismatch("gradient names do not match parameter names")
    for name, grad in grads.items():
        if grad.shape != params[name].shape:
            raise ShapeMismatch(
                f"{name}: gradient shape {tuple(grad.shape)} vs "
                f"parameter shape {tuple(params[name].shape)}"
            )
        if not torch.isfinite(grad).all():
            raise NonFiniteGradient(f"non-finite gradient in {name}")

    step = opt.step + 1
    bc1 = 1.0 - opt.beta1**step
    bc2 = 1.0 - opt.beta2**step
    new_params: Parameters = {}
    new_m: Dict[str, torch.Tensor] = {}
    new_v: Dict[str, torch.Tensor] = {}
    with torch.no_grad():
        for name, theta in params.items():
            grad = grads[name]
            m = opt.beta1 * opt.m[name] + (1.0 - opt.beta1) * grad
            v = opt.beta2 * opt.v[name] + (1.0 - opt.beta2) * grad * grad
            m_hat = m / bc1
            v_hat = v / bc2
            new_params[name] = theta - opt.lr * m_hat / (torch.sqrt(v_hat) + opt.eps)
            new_m[name] = m
            new_v[name] = v
    return new_params, replace(opt, step=step, m=new_m, v=new_v)
