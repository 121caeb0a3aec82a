import logging
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Union

from safecompose.apps.policies.networks import ShallowReluNet
from safecompose.apps.policies.projection import ProjectionCertificate
from safecompose.core.base_models import ArtifactWithMetadata, StampedArtifact
from safecompose.core.exceptions import MissingArtifactError, MissingPolicyError
from safecompose.utils.files import dump_json, load_json

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
POLICY_DIR = "policies"
_SLUG = re.compile(r"^q(\d+)-p(\d+)-t(\d+)$")


@dataclass(frozen=True, order=True)
class LocalPolicyKey:
    """Transition ``(q, P, q')`` a local network is trained for"""

    q: int
    p: int
    target: int

    @property
    def slug(self) -> str:
        return "q%d-p%d-t%d" % (self.q, self.p, self.target)

    @classmethod
    def from_slug(cls, slug: str) -> "LocalPolicyKey":
        match = _SLUG.match(slug)
        if not match:
            raise ValueError("not a policy key: %r" % slug)
        return cls(*(int(g) for g in match.groups()))

    def to_list(self) -> List[int]:
        return [self.q, self.p, self.target]

    def __str__(self):
        return "(q%d, P%d, q%d)" % (self.q, self.p, self.target)


@dataclass
class PolicyRecord:
    key: LocalPolicyKey
    net: ShallowReluNet
    certificate: ProjectionCertificate
    #: "offline" or "online"
    origin: str = "offline"
    training_seconds: float = 0.0
    donor: Optional[LocalPolicyKey] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "key": self.key.to_list(),
            "net": self.net.to_dict(),
            "certificate": self.certificate.to_dict(),
            "origin": self.origin,
            "training_seconds": self.training_seconds,
            "donor": self.donor.to_list() if self.donor else None,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolicyRecord":
        return cls(
            key=LocalPolicyKey(*data["key"]),
            net=ShallowReluNet.from_dict(data["net"]),
            certificate=ProjectionCertificate.from_dict(data["certificate"]),
            origin=data.get("origin", "offline"),
            training_seconds=float(data.get("training_seconds", 0.0)),
            donor=LocalPolicyKey(*data["donor"]) if data.get("donor") else None,
            extra=data.get("extra", {}),
        )


class PolicyStore(StampedArtifact, ArtifactWithMetadata):
    """
    Projected local networks keyed by transition

    Reads are lock-free; insertions take an exclusive lock. ``expected``
    lists the keys a complete store must hold.
    """

    def __init__(self, expected: Optional[Iterable[LocalPolicyKey]] = None):
        self._records: Dict[LocalPolicyKey, PolicyRecord] = {}
        self._lock = threading.Lock()
        self.expected = set(expected or ())
        self.metadata = {}

    def __len__(self):
        return len(self._records)

    def __contains__(self, key):
        return key in self._records

    def __iter__(self) -> Iterator[LocalPolicyKey]:
        return iter(sorted(self._records))

    def __getitem__(self, key) -> ShallowReluNet:
        record = self._records.get(key)
        if record is None:
            raise MissingPolicyError(key)
        return record.net

    def get(self, key, default=None) -> Optional[ShallowReluNet]:
        record = self._records.get(key)
        return default if record is None else record.net

    def record(self, key) -> PolicyRecord:
        if key not in self._records:
            raise MissingPolicyError(key)
        return self._records[key]

    def records(self) -> List[PolicyRecord]:
        return [self._records[key] for key in self]

    def keys(self) -> List[LocalPolicyKey]:
        return list(self)

    def insert(self, record: PolicyRecord):
        with self._lock:
            self._records[record.key] = record
        logger.debug("stored %s (%s, stage %s)", record.key, record.origin, record.certificate.stage)

    def missing(self, keys: Optional[Iterable[LocalPolicyKey]] = None) -> List[LocalPolicyKey]:
        keys = self.expected if keys is None else keys
        return sorted(k for k in set(keys) if k not in self._records)

    def is_complete(self, key: Optional[LocalPolicyKey] = None) -> bool:
        if key is not None:
            return key in self._records
        return not self.missing()

    def online_keys(self) -> List[LocalPolicyKey]:
        return [k for k in self if self._records[k].origin == "online"]

    def save(self, directory: Union[str, Path]):
        directory = Path(directory)
        with self._lock:
            records = list(self._records.values())
        for record in records:
            dump_json(directory / POLICY_DIR / ("%s.json" % record.key.slug), record.to_dict())
        manifest = self.stamp_dict()
        manifest.update(
            {
                "keys": sorted(r.key.slug for r in records),
                "expected": sorted(k.slug for k in self.expected),
                "complete": self.is_complete(),
                "metadata": self.metadata,
            }
        )
        dump_json(directory / MANIFEST_FILE, manifest)
        logger.info("saved %d local networks to %s", len(records), directory)

    @classmethod
    def load(cls, directory: Union[str, Path], expected_hash: Optional[str] = None) -> "PolicyStore":
        directory = Path(directory)
        if not (directory / MANIFEST_FILE).exists():
            raise MissingArtifactError("no policy store in %s" % directory)
        manifest = load_json(directory / MANIFEST_FILE)
        store = cls(LocalPolicyKey.from_slug(s) for s in manifest.get("expected", []))
        store.load_stamp(manifest)
        store.check_hash(expected_hash)
        store.metadata = manifest.get("metadata", {})
        for slug in manifest["keys"]:
            path = directory / POLICY_DIR / ("%s.json" % slug)
            if not path.exists():
                raise MissingArtifactError("manifest lists %s but %s is missing" % (slug, path))
            store.insert(PolicyRecord.from_dict(load_json(path)))
        return store
