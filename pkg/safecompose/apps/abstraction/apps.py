from django.utils.translation import gettext_lazy as _

from safecompose.core.application import SafeComposeConfig


class AbstractionConfig(SafeComposeConfig):
    label = "abstraction"
    name = "safecompose.apps.abstraction"
    verbose_name = _("Finite abstraction")

    default_settings = {
        # (state, partition) pairs per chunk of work, and per progress message
        "progress_every": 5000,
        # joblib threads abstracting chunks of states; -1 uses every core
        "workers": 1,
    }
