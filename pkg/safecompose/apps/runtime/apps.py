from django.utils.translation import gettext_lazy as _

from safecompose.core.application import SafeComposeConfig


class RuntimeConfig(SafeComposeConfig):
    label = "runtime"
    name = "safecompose.apps.runtime"
    verbose_name = _("Runtime execution")

    default_settings = {
        "disturbance_mode": "truth",
    }
