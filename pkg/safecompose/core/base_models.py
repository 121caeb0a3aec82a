from datetime import datetime
from typing import Any, Optional

from django.utils import timezone
from django.utils.dateparse import parse_datetime

from safecompose.core.exceptions import ArtifactMismatchError


class StampedArtifact(object):
    """
    A mixin for on-disk artifacts: the digest of the configuration they
    were built from and the datetime they were created
    """

    config_hash: str = ""
    created_at: Optional[datetime] = None

    def stamp(self, config_hash: str):
        self.config_hash = config_hash
        self.created_at = timezone.now()

    def stamp_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "created_at": self.created_at.isoformat() if self.created_at else None,
        }

    def load_stamp(self, data: dict):
        self.config_hash = data.get("config_hash", "")
        created_at = data.get("created_at")
        self.created_at = parse_datetime(created_at) if created_at else None

    def check_hash(self, expected: Optional[str]):
        """Refuse artifacts built from a different configuration"""
        if expected is not None and self.config_hash != expected:
            raise ArtifactMismatchError(
                "%s was built from configuration %s, expected %s"
                % (type(self).__name__, self.config_hash or "<none>", expected)
            )


class ArtifactWithMetadata(object):
    """
    A mixin adding a free-form metadata dictionary to artifacts
    """

    metadata: Optional[dict] = None

    def get_value_from_metadata(self, key, default: Any = None) -> Any:
        return (self.metadata or {}).get(key, default)

    def store_value_in_metadata(self, items: dict):
        if not self.metadata:
            self.metadata = {}
        self.metadata.update(items)

    def append_value_in_metadata(self, key: str, value):
        current = self.get_value_from_metadata(key)
        if current is None:
            self.store_value_in_metadata({key: [value]})
        elif not isinstance(current, list):
            self.store_value_in_metadata({key: [current, value]})
        else:
            current.append(value)

    def clear_metadata(self):
        self.metadata = {}

    def delete_value_from_metadata(self, key: str):
        if self.metadata and key in self.metadata:
            del self.metadata[key]
