from django.utils.translation import gettext_lazy as _

from safecompose.core.application import SafeComposeConfig


class TransferConfig(SafeComposeConfig):
    label = "transfer"
    name = "safecompose.apps.transfer"
    verbose_name = _("Transfer learning")

    default_settings = {
        # weights of the cell, target and partition center distances
        "weights": (1.0, 1.0, 1.0),
    }
