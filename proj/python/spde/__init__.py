"""Spectral Galerkin / implicit Euler solver for a stochastic reaction-diffusion
equation with cubic drift and additive Q-Wiener noise.

The heavy lifting lives in the compiled extension ``spde._core``; this package
re-exports its public names.  Typical use::

    import spde

    dom = spde.Domain(1.0)
    m = spde.CubicNonlinearity(a3=1.0, a1=5.0)
    cfg = spde.SchemeConfig.create(64, 2**-6, 64, m, dom)
    noise = spde.NoiseSpec.power_law(0.5, 64)
    block = spde.sample_increments(noise, seed=1, trajectory=0, steps=64, dt=2**-6)
    x0 = spde.sine_initial(dom, 64, 1.0)
    times, states, stats = spde.simulate_path(dom, cfg, m, x0, block)
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401
from ._core import oracle  # noqa: F401

__version__ = "0.1.0"
