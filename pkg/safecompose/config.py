from safecompose.core.application import SafeComposeConfig


class SafeCompose(SafeComposeConfig):
    name = "safecompose"

    default_settings = {
        # format version of the run configuration files
        "config_version": 1,
    }
