"""Gradient-descent optimizers: sgd, adam, rmsprop, adadelta.

All updates are the textbook forms. Auxiliary buffers are keyed by
parameter name, so names must be unique within one optimizer. Gradients
are zeroed after every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import UsageError
from .engine import Parameter

DEFAULT_LEARNING_RATES = {
    "sgd": 0.01,
    "adam": 0.001,
    "rmsprop": 0.001,
    "adadelta": 1.0,
}

ALGORITHMS = tuple(DEFAULT_LEARNING_RATES)


@dataclass
class OptimizerState:
    algorithm: str
    learning_rate: float
    step_count: int = 0
    # adam
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    # rmsprop
    rms_rho: float = 0.9
    rms_eps: float = 1e-7
    # adadelta
    ada_rho: float = 0.95
    ada_eps: float = 1e-6
    slots: dict = field(default_factory=dict)

    def slot(self, param: Parameter, name: str) -> np.ndarray:
        key = (param.name, name)
        buf = self.slots.get(key)
        if buf is None:
            buf = np.zeros_like(param.value)
            self.slots[key] = buf
        return buf


def make_optimizer(algorithm: str, learning_rate: float | None = None) -> OptimizerState:
    if algorithm not in ALGORITHMS:
        raise UsageError(f"unknown optimizer {algorithm!r}; choose from {ALGORITHMS}")
    if learning_rate is None:
        learning_rate = DEFAULT_LEARNING_RATES[algorithm]
    return OptimizerState(algorithm=algorithm, learning_rate=float(learning_rate))


def step(opt: OptimizerState, params: list[Parameter]) -> None:
    """Apply one update to every parameter from its accumulated gradient,
    then zero the gradients."""
    names = [p.name for p in params]
    if len(set(names)) != len(names):
        raise UsageError("parameter names must be unique within an optimizer step")
    opt.step_count += 1
    lr = opt.learning_rate
    for p in params:
        g = p.grad
        if opt.algorithm == "sgd":
            p.value -= lr * g
        elif opt.algorithm == "adam":
            m = opt.slot(p, "m")
            v = opt.slot(p, "v")
            m *= opt.beta1
            m += (1.0 - opt.beta1) * g
            v *= opt.beta2
            v += (1.0 - opt.beta2) * g * g
            m_hat = m / (1.0 - opt.beta1 ** opt.step_count)
            v_hat = v / (1.0 - opt.beta2 ** opt.step_count)
            p.value -= lr * m_hat / (np.sqrt(v_hat) + opt.adam_eps)
        elif opt.algorithm == "rmsprop":
            acc = opt.slot(p, "acc")
            acc *= opt.rms_rho
            acc += (1.0 - opt.rms_rho) * g * g
            p.value -= lr * g / (np.sqrt(acc) + opt.rms_eps)
        elif opt.algorithm == "adadelta":
            acc = opt.slot(p, "acc")
            acc_delta = opt.slot(p, "acc_delta")
            acc *= opt.ada_rho
            acc += (1.0 - opt.ada_rho) * g * g
            delta = -np.sqrt(acc_delta + opt.ada_eps) / np.sqrt(acc + opt.ada_eps) * g
            acc_delta *= opt.ada_rho
            acc_delta += (1.0 - opt.ada_rho) * delta * delta
            p.value += lr * delta
        else:  # unreachable; make_optimizer validates
            raise UsageError(f"unknown optimizer {opt.algorithm!r}")
    for p in params:
        p.zero_grad()
