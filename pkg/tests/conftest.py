import random
from itertools import count

import pytest

from dispnet.formula import Signature
from dispnet.nd import net_of_nd, random_nd_proof
from dispnet.terms import FreshVars

CORPUS_SIG = Signature({"np": 0, "n": 0, "s": 0, "j": 1})
CORPUS_SIZE = 1000
CORPUS_DEPTH = 6
CORPUS_SEED = 20240817


@pytest.fixture(scope="session")
def proof_corpus():
    """1000 random checked proofs of depth <= 6, with their nets: the
    shared fuzz corpus for the confluence, step-bound, and round-trip
    criteria."""
    rng = random.Random(CORPUS_SEED)
    fresh = FreshVars()
    labels = count()
    corpus = []
    for _ in range(CORPUS_SIZE):
        p = random_nd_proof(rng, CORPUS_SIG, max_depth=CORPUS_DEPTH,
                            fresh=fresh, labels=labels)
        ps, terms, aps, trace = net_of_nd(p, CORPUS_SIG)
        corpus.append((p, ps, terms, aps, trace))
    return corpus
