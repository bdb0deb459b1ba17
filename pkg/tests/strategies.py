import numpy as np
from hypothesis import strategies as st

from sepcutoff.lattice import ParticleConfiguration


@st.composite
def balanced(draw, n_min=1, n_max=12):
    n = draw(st.integers(n_min, n_max))
    perm = draw(st.permutations(range(2 * n)))
    v = -np.ones(2 * n, dtype=np.int8)
    v[list(perm[:n])] = 1
    return ParticleConfiguration(v)


@st.composite
def any_config(draw, n_min=1, n_max=10):
    n = draw(st.integers(n_min, n_max))
    bits = draw(st.lists(st.sampled_from([-1, 1]), min_size=2 * n, max_size=2 * n))
    return ParticleConfiguration(np.array(bits, dtype=np.int8))


thetas = st.floats(0.0, 6.283185307179586, exclude_max=True, allow_nan=False)
