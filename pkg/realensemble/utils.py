from __future__ import absolute_import
import os
import numpy as np


def _make_sure_path_exists(path):
    return os.makedirs(path, exist_ok=True)


def make_rng(seed=None):
    '''Return a numpy Generator for ``seed``

    Parameters
    ----------
    seed : int, SeedSequence, Generator or None
        A Generator is passed through untouched so that callers can
        inject their own random source.

    Returns
    -------
    rng : numpy.random.Generator
    '''
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_rngs(seed, count):
    '''Split ``seed`` into ``count`` independent, reproducible streams

    The i-th stream depends only on (seed, i), so adding populations to
    a study does not change the draws of the existing ones.

    Parameters
    ----------
    seed : int or None
        Root seed

    count : int
        Number of streams

    Returns
    -------
    rngs : list of numpy.random.Generator
    '''
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]
