"""Adam with the inverse-sqrt warmup ("noam") learning-rate schedule."""

from dataclasses import dataclass, field

import numpy as np

from nmtforge import kernels


@dataclass
class OptimizerConfig:
    beta1: float = 0.9
    beta2: float = 0.998
    epsilon: float = 1e-9
    base_lr: float = 2.0
    warmup_steps: int = 8000
    schedule: str = "noam"
    d_model: int = 512

    def __post_init__(self):
        if not (0.0 < self.beta1 < self.beta2 < 1.0):
            raise ValueError("require 0 < beta1 < beta2 < 1")
        if self.warmup_steps < 1:
            raise ValueError("warmup_steps must be >= 1")
        if self.schedule != "noam":
            raise ValueError(f"unknown schedule: {self.schedule}")


@dataclass
class AdamState:
    """First/second moment buffers per parameter, flat float32 views."""

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def buffers(self, name, param):
        if name not in self.m:
            self.m[name] = np.zeros(param.size, dtype=param.dtype)
            self.v[name] = np.zeros(param.size, dtype=param.dtype)
        return self.m[name], self.v[name]


def learning_rate(config: OptimizerConfig, step: int) -> float:
    """base_lr * d_model^-0.5 * min(step^-0.5, step * warmup^-1.5).

    Rises linearly to the peak at step == warmup_steps, then decays as
    the inverse square root of the step.
    """
    if step < 1:
        raise ValueError("step must be >= 1")
    s = float(step)
    w = float(config.warmup_steps)
    return config.base_lr * config.d_model ** -0.5 * min(s ** -0.5, s * w ** -1.5)


def adam_step(params, grads, state: AdamState, config: OptimizerConfig, step: int):
    """Apply one Adam update in place. Returns (params, state).

    Dense update over every parameter; bias correction uses the given
    1-based step.
    """
    if step < 1:
        raise ValueError("step must be >= 1")
    lr = learning_rate(config, step)
    bc1 = 1.0 - config.beta1 ** step
    bc2 = 1.0 - config.beta2 ** step
    for name in sorted(params):
        p = params[name]
        g = grads[name]
        m, v = state.buffers(name, p)
        kernels.adam_update(
            p.reshape(-1),
            np.ascontiguousarray(g.reshape(-1)),
            m,
            v,
            lr,
            config.beta1,
            config.beta2,
            config.epsilon,
            bc1,
            bc2,
        )
    return params, state
