"""Ready-made systems: the eigen-solution test case and the two driven
competing-species / interaction experiments on the unit interval."""

import numpy as np

from .model import (IDENTITY, PRODUCT, U2V, Dirichlet, Neumann, Source, SystemSpec,
                    Univariate, linear)

HALF_PI = np.pi / 2


def zeldovich(u):
    return 2 * u * (1 - u) * (u - 0.9)


def zeldovich_prime(u):
    return -6 * u**2 + 7.6 * u - 1.8


def bump(v):
    return np.maximum(2 * np.exp(-5 * (v - 1) ** 2) - 0.1 * v**2, -2.0)


def bump_prime(v):
    inner = 2 * np.exp(-5 * (v - 1) ** 2) - 0.1 * v**2
    d = -20 * (v - 1) * np.exp(-5 * (v - 1) ** 2) - 0.2 * v
    return np.where(inner > -2.0, d, 0.0)


def phi_atan(w):
    return np.arctan(w) + 2 * w * np.exp(-((w - 1) ** 2))


def phi_atan_prime(w):
    return 1 / (1 + w**2) + (2 - 4 * w * (w - 1)) * np.exp(-((w - 1) ** 2))


def phi_cubic(w):
    m = np.minimum(w, 3.0)
    return 0.1 * (27 - (3 - m) ** 2 * (3 + 2 * m))


def phi_cubic_prime(w):
    return np.where(w < 3.0, 0.6 * w * (3 - w), 0.0)


F1 = Univariate(zeldovich, zeldovich_prime, "2u(1-u)(u-0.9)")
F2 = Univariate(bump, bump_prime, "max(2exp(-5(v-1)^2)-0.1v^2,-2)")
PHI1 = Univariate(phi_atan, phi_atan_prime, "atan(w)+2w exp(-(w-1)^2)")
PHI2 = Univariate(phi_cubic, phi_cubic_prime, "0.1(27-(3-w)^2(3+2w)), 2.7 for w>=3")
LOGISTIC_U = Univariate(lambda u: u * (1 - u), lambda u: 1 - 2 * u, "u(1-u)")
LOGISTIC_V = Univariate(lambda v: v * (2 - v), lambda v: 2 - 2 * v, "v(2-v)")

R_U = Source(lambda x, t, u, v: 10 * np.sin(HALF_PI * x) * t, name="10 sin(pi x/2) t")
R_V = Source(lambda x, t, u, v: 12 * (2 * x - x**2) * t, name="12(2x-x^2) t")

DIR_NEU = (Dirichlet(), Neumann())


def u0_poly(x):
    return x * (1 - 2 * x + x**2)


def v0_sine(x):
    return np.sin(HALF_PI * x)


def competing_species(beta: float = -1.0) -> SystemSpec:
    """Unknown (f1, f2) with interaction ``beta * u * v`` in both equations."""
    return SystemSpec(
        f1=F1, f2=F2, phi1=IDENTITY, phi2=IDENTITY, w=PRODUCT, beta_u=beta, beta_v=beta,
        r_u=R_U, r_v=R_V, u0=u0_poly, v0=v0_sine, bc=(DIR_NEU, DIR_NEU), unknown="f",
        name=f"competing-species(beta={beta:g})",
    )


def interaction(beta_u: float = 1.0, beta_v: float | None = None, coupling=PRODUCT) -> SystemSpec:
    """Unknown (phi1, phi2) with known logistic reactions."""
    beta_v = beta_u if beta_v is None else beta_v
    return SystemSpec(
        f1=LOGISTIC_U, f2=LOGISTIC_V, phi1=PHI1, phi2=PHI2, w=coupling,
        beta_u=beta_u, beta_v=beta_v, r_u=R_U, r_v=R_V, u0=u0_poly, v0=v0_sine,
        bc=(DIR_NEU, DIR_NEU), unknown="phi",
        name=f"interaction(beta_u={beta_u:g}, beta_v={beta_v:g}, w={coupling.name})",
    )


def brusselator() -> SystemSpec:
    """Interaction experiment with ``w = u^2 v`` and opposite multipliers."""
    return interaction(1.0, -1.0, U2V)


def eigen_mode(c: float = 0.5, length: float = 1.0) -> SystemSpec:
    """``f(u) = c u`` started from the first Dirichlet/Neumann eigenfunction.

    The exact solution is ``exp(-(lambda_1 - c) t) phi_1(x)`` for both species.
    """
    k = HALF_PI / length
    amp = np.sqrt(2.0 / length)
    phi1 = lambda x: amp * np.sin(k * x)
    return SystemSpec(
        f1=linear(c), f2=linear(c), beta_u=0.0, beta_v=0.0, u0=phi1, v0=phi1,
        bc=(DIR_NEU, DIR_NEU), length=length, name=f"example1-eigen(c={c:g})",
    )


def eigen_exact(x, t, c: float = 0.5, length: float = 1.0):
    k = HALF_PI / length
    lam = k**2
    return np.exp(-(lam - c) * np.asarray(t))[..., None] * np.sqrt(2.0 / length) * np.sin(k * np.asarray(x))


PRESETS = {
    "example1-eigen": eigen_mode,
    "competing-species": competing_species,
    "interaction": interaction,
    "brusselator": brusselator,
}
