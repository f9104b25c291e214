"""Denoising diffusion math: schedules, forward noising, ancestral reverse
sampling with optional classifier-free guidance, and the v-prediction
parameterization.

The noise predictor is a plain callable ``(z, t, cond) -> eps_hat``; a
trained network would plug in at that seam, while tests use analytic
predictors whose correct output is known in closed form. All randomness
flows through an explicit numpy Generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step retention factors alpha_t and their running products."""

    alphas: np.ndarray
    alpha_bars: np.ndarray

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=np.float64)
        alpha_bars = np.asarray(self.alpha_bars, dtype=np.float64)
        if alphas.ndim != 1 or len(alphas) == 0:
            raise ValueError("schedule needs at least one step")
        if ((alphas <= 0) | (alphas > 1)).any():
            raise ValueError("every alpha must lie in (0, 1]")
        if not np.allclose(alpha_bars, np.cumprod(alphas), rtol=0, atol=1e-9):
            raise ValueError("alpha_bars must be the running product of alphas")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_bars", alpha_bars)

    @property
    def num_steps(self) -> int:
        return len(self.alphas)

    def alpha(self, t: int) -> float:
        self._check_t(t)
        return float(self.alphas[t - 1])

    def alpha_bar(self, t: int) -> float:
        """Running product at step t; alpha_bar(0) is 1 by convention."""
        if t == 0:
            return 1.0
        self._check_t(t)
        return float(self.alpha_bars[t - 1])

    def _check_t(self, t: int):
        if not 1 <= t <= self.num_steps:
            raise ValueError(f"step {t} outside [1, {self.num_steps}]")


def make_schedule(kind: str, num_steps: int, **params) -> NoiseSchedule:
    """Build a noise schedule.

    kind "linear-beta": beta ramps linearly from ``beta_start`` (1e-4) to
    ``beta_end`` (0.02); alpha_t = 1 - beta_t.
    kind "cosine": squared-cosine alpha_bar curve with offset ``s`` (0.008),
    per-step betas clipped to 0.999.
    """
    if num_steps < 1:
        raise ValueError(f"num_steps must be >= 1, got {num_steps}")
    if kind == "linear-beta":
        beta_start = params.pop("beta_start", 1e-4)
        beta_end = params.pop("beta_end", 0.02)
        if params:
            raise ValueError(f"unknown params: {sorted(params)}")
        if not (0 < beta_start < 1 and 0 < beta_end < 1):
            raise ValueError("betas must lie in (0, 1)")
        betas = np.linspace(beta_start, beta_end, num_steps)
        alphas = 1.0 - betas
    elif kind == "cosine":
        s = params.pop("s", 0.008)
        if params:
            raise ValueError(f"unknown params: {sorted(params)}")
        steps = np.arange(num_steps + 1, dtype=np.float64)
        curve = np.cos((steps / num_steps + s) / (1 + s) * np.pi / 2) ** 2
        curve /= curve[0]
        alphas = np.clip(curve[1:] / curve[:-1], 1e-3, 1.0)
    else:
        raise ValueError(f"unknown schedule kind {kind!r}")
    return NoiseSchedule(alphas=alphas, alpha_bars=np.cumprod(alphas))


def constant_schedule(alphas) -> NoiseSchedule:
    """Schedule from explicit alpha values (mostly for tests and demos)."""
    alphas = np.asarray(alphas, dtype=np.float64)
    return NoiseSchedule(alphas=alphas, alpha_bars=np.cumprod(alphas))


@dataclass(frozen=True)
class LatentState:
    z: np.ndarray
    t: int

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64)
        if not np.isfinite(z).all():
            raise ValueError("latent contains non-finite entries")
        object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class ConditioningBundle:
    """Named conditioning vectors plus a per-channel temporal control signal.

    The sampler never interprets these; they pass through to the predictor
    untouched.
    """

    embeddings: dict = field(default_factory=dict)
    envelope: np.ndarray | None = None

    def __post_init__(self):
        for name, vec in self.embeddings.items():
            if not np.isfinite(np.asarray(vec, dtype=np.float64)).all():
                raise ValueError(f"embedding {name!r} contains non-finite entries")
        if self.envelope is not None and not np.isfinite(
            np.asarray(self.envelope, dtype=np.float64)
        ).all():
            raise ValueError("envelope contains non-finite entries")


def forward_step(z_prev: LatentState, schedule: NoiseSchedule, rng: np.random.Generator) -> LatentState:
    """One forward noising step: z_t = sqrt(a_t) z_{t-1} + sqrt(1-a_t) eps."""
    t = z_prev.t + 1
    a = schedule.alpha(t)
    eps = rng.standard_normal(z_prev.z.shape)
    z_t = np.sqrt(a) * z_prev.z + np.sqrt(1.0 - a) * eps
    return LatentState(z=z_t, t=t)


def forward_sample(z0, t: int, schedule: NoiseSchedule, rng: np.random.Generator):
    """Jump directly to step t: z_t = sqrt(ab_t) z0 + sqrt(1-ab_t) eps.

    Returns (z_t, eps); the noise draw is needed by the v-prediction target
    and by oracle tests.
    """
    z0 = np.asarray(z0, dtype=np.float64)
    ab = schedule.alpha_bar(t)
    eps = rng.standard_normal(z0.shape)
    z_t = np.sqrt(ab) * z0 + np.sqrt(1.0 - ab) * eps
    return z_t, eps


def posterior_mean(z_t, t: int, eps_hat, schedule: NoiseSchedule) -> np.ndarray:
    """Reverse-step mean: (z_t - (1-a_t)/sqrt(1-ab_t) eps_hat) / sqrt(a_t)."""
    z_t = np.asarray(z_t, dtype=np.float64)
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    if z_t.shape != eps_hat.shape:
        raise ValueError(f"shape mismatch: {z_t.shape} vs {eps_hat.shape}")
    a = schedule.alpha(t)
    ab = schedule.alpha_bar(t)
    if a == 1.0:  # noiseless step: the eps term carries a zero coefficient
        return z_t / np.sqrt(a)
    return (z_t - (1.0 - a) / np.sqrt(1.0 - ab) * eps_hat) / np.sqrt(a)


def posterior_variance(t: int, schedule: NoiseSchedule) -> float:
    """sigma_t^2 = (1 - ab_{t-1}) / (1 - ab_t) * (1 - a_t); zero at t = 1."""
    a = schedule.alpha(t)
    ab = schedule.alpha_bar(t)
    ab_prev = schedule.alpha_bar(t - 1)
    if ab == 1.0:
        return 0.0
    return (1.0 - ab_prev) / (1.0 - ab) * (1.0 - a)


def v_target(z0, eps, t: int, schedule: NoiseSchedule) -> np.ndarray:
    """v-prediction training target: v = sqrt(ab_t) eps - sqrt(1-ab_t) z0."""
    z0 = np.asarray(z0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if z0.shape != eps.shape:
        raise ValueError(f"shape mismatch: {z0.shape} vs {eps.shape}")
    ab = schedule.alpha_bar(t)
    return np.sqrt(ab) * eps - np.sqrt(1.0 - ab) * z0


def v_to_eps(v, z_t, t: int, schedule: NoiseSchedule) -> np.ndarray:
    """Convert a v-prediction to its equivalent noise estimate:
    eps = sqrt(ab_t) v + sqrt(1-ab_t) z_t."""
    v = np.asarray(v, dtype=np.float64)
    z_t = np.asarray(z_t, dtype=np.float64)
    if v.shape != z_t.shape:
        raise ValueError(f"shape mismatch: {v.shape} vs {z_t.shape}")
    ab = schedule.alpha_bar(t)
    return np.sqrt(ab) * v + np.sqrt(1.0 - ab) * z_t


def reverse_sample(
    predictor,
    cond: ConditioningBundle,
    schedule: NoiseSchedule,
    rng: np.random.Generator,
    dim: int,
    guidance_scale: float = 1.0,
    deterministic: bool = False,
    z_init=None,
) -> np.ndarray:
    """Full ancestral reverse chain from z_T ~ N(0, I) down to z_0.

    ``predictor(z, t, cond)`` returns the noise estimate; with
    ``guidance_scale != 1`` it is also called with ``cond=None`` and the two
    estimates are extrapolated. ``deterministic`` forces sigma_t = 0 at
    every step (used by reconstruction oracles). ``z_init`` overrides the
    initial noise draw.
    """
    if z_init is None:
        z = rng.standard_normal(dim)
    else:
        z = np.asarray(z_init, dtype=np.float64).copy()
        if z.shape != (dim,):
            raise ValueError(f"z_init shape {z.shape} does not match dim {dim}")

    for t in range(schedule.num_steps, 0, -1):
        eps_hat = np.asarray(predictor(z, t, cond), dtype=np.float64)
        if eps_hat.shape != z.shape:
            raise ValueError(
                f"predictor returned shape {eps_hat.shape}, expected {z.shape}"
            )
        if guidance_scale != 1.0:
            eps_uncond = np.asarray(predictor(z, t, None), dtype=np.float64)
            if eps_uncond.shape != z.shape:
                raise ValueError(
                    f"predictor returned shape {eps_uncond.shape}, expected {z.shape}"
                )
            eps_hat = eps_uncond + guidance_scale * (eps_hat - eps_uncond)
        mean = posterior_mean(z, t, eps_hat, schedule)
        if deterministic or t == 1:
            z = mean
        else:
            sigma = np.sqrt(posterior_variance(t, schedule))
            z = mean + sigma * rng.standard_normal(z.shape)
    return z
