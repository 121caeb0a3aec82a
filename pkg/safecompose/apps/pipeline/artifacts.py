"""
On-disk cache of the pipeline artifacts

Layout under the cache root::

    abstraction/<abstraction digest>/  mdp.npz, mdp.json, residuals.csv, partition.json
    store/<store digest>/              manifest.json, policies/*.json

A directory name is the first 16 hex digits of the digest; the full
digest is stamped inside every artifact and checked on load.
"""
import logging
from pathlib import Path
from typing import Union

from django.conf import settings

from safecompose.apps.abstraction.mdp import ARRAYS_FILE, META_FILE, AbstractMDP
from safecompose.apps.gp.datasets import ResidualDataset
from safecompose.apps.policies.store import MANIFEST_FILE, PolicyStore
from safecompose.core.exceptions import MissingArtifactError
from safecompose.utils.files import dump_json

logger = logging.getLogger(__name__)

RESIDUALS_FILE = "residuals.csv"
PARTITION_FILE = "partition.json"
DIGEST_PREFIX = 16


class ArtifactCache:
    def __init__(self, root: Union[str, Path], abstraction_digest: str, store_digest: str):
        self.root = Path(root)
        self.abstraction_digest = abstraction_digest
        self.store_digest = store_digest

    @classmethod
    def for_config(cls, config) -> "ArtifactCache":
        """The ``SAFECOMPOSE_CACHE_ROOT`` setting wins over ``paths.cache``"""
        root = getattr(settings, "SAFECOMPOSE_CACHE_ROOT", "") or config.cleaned("paths")["cache"]
        return cls(root, config.abstraction_digest(), config.store_digest())

    @property
    def abstraction_dir(self) -> Path:
        return self.root / "abstraction" / self.abstraction_digest[:DIGEST_PREFIX]

    @property
    def store_dir(self) -> Path:
        return self.root / "store" / self.store_digest[:DIGEST_PREFIX]

    @property
    def residuals_path(self) -> Path:
        return self.abstraction_dir / RESIDUALS_FILE

    @property
    def partition_path(self) -> Path:
        return self.abstraction_dir / PARTITION_FILE

    def has_abstraction(self) -> bool:
        directory = self.abstraction_dir
        return all((directory / name).exists() for name in (ARRAYS_FILE, META_FILE, RESIDUALS_FILE))

    def has_store(self) -> bool:
        return (self.store_dir / MANIFEST_FILE).exists()

    def save_abstraction(self, mdp: AbstractMDP, dataset: ResidualDataset):
        # residuals first: has_abstraction() requires all three files
        dataset.to_csv(self.residuals_path)
        dump_json(
            self.partition_path,
            {"states": mdp.partition.to_dict(), "controllers": mdp.controller_grid.to_dict()},
        )
        mdp.stamp(self.abstraction_digest)
        mdp.save(self.abstraction_dir)
        logger.info("cached abstraction in %s", self.abstraction_dir)

    def load_mdp(self) -> AbstractMDP:
        return AbstractMDP.load(self.abstraction_dir, expected_hash=self.abstraction_digest)

    def load_residuals(self, state_dim: int) -> ResidualDataset:
        if not self.residuals_path.exists():
            raise MissingArtifactError("no residual dataset in %s" % self.abstraction_dir)
        return ResidualDataset.from_csv(self.residuals_path, state_dim)

    def load_store(self) -> PolicyStore:
        return PolicyStore.load(self.store_dir, expected_hash=self.store_digest)

    def store_or_empty(self) -> PolicyStore:
        return self.load_store() if self.has_store() else PolicyStore()

    def save_store(self, store: PolicyStore):
        store.stamp(self.store_digest)
        store.save(self.store_dir)

    def __repr__(self):
        return "ArtifactCache(%s)" % self.root
