import numpy as np
import pytest

import gwboot


@pytest.fixture(scope="session")
def warm_kernels():
    """Trigger jit compilation of every hot kernel so timed tests measure
    compute, not compiler."""
    d = gwboot.make_constant(3)
    gwboot.critical_probability(d, 2, 1e-10)
    gwboot.threshold_by_bisection(d, 2, 1e-3)
    tree = gwboot.sample_tree(d, 3, gwboot.SeedSpec(0))
    mask = np.zeros(tree.n_nodes, bool)
    mask[1:5] = True
    gwboot.bootstrap_closure(tree, mask, 2)
    gwboot.subtree_infected_bottom_up(tree, mask, 2)
    gwboot.estimate_uninfected_root(
        d, gwboot.SimConfig(r=2, p=0.1, depth=3, replications=10,
                            seed=gwboot.SeedSpec(0)))
    return True


@pytest.fixture(scope="session")
def corpus_r2():
    return gwboot.make_corpus(2)


@pytest.fixture(scope="session")
def corpus_r3():
    return gwboot.make_corpus(3)
