from django.utils.translation import gettext_lazy as _

from safecompose.core.application import SafeComposeConfig


class SelectionConfig(SafeComposeConfig):
    label = "selection"
    name = "safecompose.apps.selection"
    verbose_name = _("Task selection")
