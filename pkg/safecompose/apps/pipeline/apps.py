from django.utils.translation import gettext_lazy as _

from safecompose.core.application import SafeComposeConfig


class PipelineConfig(SafeComposeConfig):
    label = "pipeline"
    name = "safecompose.apps.pipeline"
    verbose_name = _("Pipeline")
