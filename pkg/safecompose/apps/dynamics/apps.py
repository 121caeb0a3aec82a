from django.utils.translation import gettext_lazy as _

from safecompose.core.application import SafeComposeConfig


class DynamicsConfig(SafeComposeConfig):
    label = "dynamics"
    name = "safecompose.apps.dynamics"
    verbose_name = _("Dynamics")

    default_settings = {
        # number of samples used to check g against its declared bound
        "bound_check_samples": 100000,
    }
