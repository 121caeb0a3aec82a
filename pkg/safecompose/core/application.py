from django.apps import AppConfig, apps
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured


class AppConfigMixin(object):
    """
    Base app configuration, used to extend
    :py:class `django.apps.AppConfig`
    to also provide per-app numerical settings
    """

    #: Defaults for the tunables of this app. Every key can be
    #: overridden from the Django settings through a dictionary named
    #: ``SAFECOMPOSE_<LABEL>`` (e.g. ``SAFECOMPOSE_POLICIES``)
    default_settings = {}

    def __init__(self, app_name, app_module, **kwargs):
        app_config_attrs = [
            "name",
            "module",
            "apps",
            "label",
            "verbose_name",
            "path",
            "models_module",
            "models",
        ]

        # To ensure sub classes do not add kwargs that are used by
        # :py:class: `django.apps.AppConfig`
        clashing_kwargs = set(kwargs).intersection(app_config_attrs)
        if clashing_kwargs:
            raise ImproperlyConfigured(
                "Passed in kwargs can't be named the same as properties of "
                "AppConfig; clashing: %s" % ", ".join(sorted(clashing_kwargs))
            )

        super().__init__(app_name, app_module)

        # set all kwargs as object attributes
        for key, value in kwargs.items():
            setattr(self, key, value)

    @property
    def settings_name(self):
        return "SAFECOMPOSE_%s" % self.label.upper()

    def get_setting(self, name, default=None):
        """
        Return the tunable ``name`` for this app

        Lookup order: the ``SAFECOMPOSE_<LABEL>`` settings dictionary,
        then :py:attr:`default_settings`, then ``default``
        """
        overrides = getattr(settings, self.settings_name, None) or {}
        if name in overrides:
            return overrides[name]
        if name in self.default_settings:
            return self.default_settings[name]
        if default is not None:
            return default
        raise ImproperlyConfigured(
            "No setting '%s' for app '%s'; define it in %s"
            % (name, self.label, self.settings_name)
        )


class SafeComposeConfig(AppConfigMixin, AppConfig):
    """
    Base app configuration

    This is subclassed by each app to provide a customizable
    container for its configuration
    """

    default_auto_field = "django.db.models.AutoField"


def get_app_setting(app_label, name, default=None):
    """Shortcut for ``apps.get_app_config(app_label).get_setting(name)``"""
    return apps.get_app_config(app_label).get_setting(name, default)
