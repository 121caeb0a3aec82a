from django.apps import apps
from django.conf import settings
from django.utils.module_loading import import_string

from safecompose.core.exceptions import (
    AppNotFoundError,
    ClassNotFoundError,
    ConfigurationError,
)


def get_registered_class(registry_name, name):
    """
    Resolve ``name`` through one of the registries declared in the
    settings, e.g. ``get_registered_class("SAFECOMPOSE_DYNAMICS_MODELS", "dubins")``

    Registry values are ``"<app>.<module>.<ClassName>"`` labels.
    """
    registry = getattr(settings, registry_name, {})
    try:
        label = registry[name]
    except KeyError:
        raise ConfigurationError(
            "Unknown entry '%s' in %s; choose one of: %s"
            % (name, registry_name, ", ".join(sorted(registry)))
        )
    return load_class(label)


def load_class(label):
    """
    Import ``"<app>.<module>.<ClassName>"`` from the installed safecompose
    app with that label
    """
    from safecompose.core.application import SafeComposeConfig

    app_label, _, path = label.partition(".")
    if "." not in path:
        raise ValueError("Importing from top-level modules is not supported")
    try:
        app_config = apps.get_app_config(app_label)
    except LookupError:
        raise AppNotFoundError("Couldn't find an app to import %s from" % label)
    if not isinstance(app_config, SafeComposeConfig):
        raise AppNotFoundError("Couldn't find a safecompose app to import %s from" % label)
    dotted = "%s.%s" % (app_config.name, path)
    try:
        return import_string(dotted)
    except ImportError as error:
        raise ClassNotFoundError("No class found at %s: %s" % (dotted, error)) from error
