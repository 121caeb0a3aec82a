import hashlib

import numpy as np


def derive_seed(root_seed: int, *labels) -> int:
    """
    Derive a component seed from the root seed by stable hashing, so
    adding a component never shifts the seeds of the others
    """
    text = "/".join([str(int(root_seed))] + [str(label) for label in labels])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") & 0x7FFFFFFF


def make_rng(root_seed: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root_seed, *labels))
