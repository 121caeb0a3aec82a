from django.utils.translation import gettext_lazy as _

from safecompose.core.application import SafeComposeConfig


class GaussianProcessConfig(SafeComposeConfig):
    label = "gp"
    name = "safecompose.apps.gp"
    verbose_name = _("Gaussian process model error")

    default_settings = {
        # smallest noise variance handed to the GPy likelihood
        "noise_floor": 1e-6,
        # posterior variances below this are a numerical error, not round-off
        "variance_tolerance": 1e-12,
    }
