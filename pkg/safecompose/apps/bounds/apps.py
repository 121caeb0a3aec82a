from django.utils.translation import gettext_lazy as _

from safecompose.core.application import SafeComposeConfig


class BoundsConfig(SafeComposeConfig):
    label = "bounds"
    name = "safecompose.apps.bounds"
    verbose_name = _("Optimality gap bounds")

    default_settings = {
        # kernel variance used where the posterior variance vanishes
        "variance_floor": 1e-6,
        # midpoint nodes per axis of every safe cell
        "quadrature_resolution": 4,
        # relative change between resolutions r and 2r that triggers a warning
        "quadrature_tolerance": 0.01,
        # largest fine grid the oracles accept
        "oracle_max_cells": 10000,
        # control levels per partition in the optimal-value oracle
        "oracle_control_levels": 10,
    }
