from functools import wraps

from django.core.management.base import CommandError

from safecompose.core.exceptions import (
    ArtifactMismatchError,
    ConfigurationError,
    MissingArtifactError,
    SafeComposeError,
)

#: exit codes of the management commands
EXIT_CONFIG_ERROR = 2
EXIT_MISSING_PREREQUISITE = 3
EXIT_RUNTIME_FAILURE = 4


def exit_code_for(error):
    if isinstance(error, ConfigurationError):
        return EXIT_CONFIG_ERROR
    if isinstance(error, (MissingArtifactError, ArtifactMismatchError)):
        return EXIT_MISSING_PREREQUISITE
    return EXIT_RUNTIME_FAILURE


def raises_command_error(handle):
    """
    Decorate a command's ``handle`` so pipeline errors leave the
    process with the documented exit code instead of a traceback
    """

    @wraps(handle)
    def _handle(command, *args, **options):
        try:
            return handle(command, *args, **options)
        except SafeComposeError as error:
            raise CommandError(str(error), returncode=exit_code_for(error)) from error

    return _handle


def check_prerequisites(cache, stages):
    """
    Return the stages in ``stages`` whose artifacts are missing from
    ``cache``. Each stage name maps to a ``has_<stage>`` method on the
    cache (e.g. ``"abstraction"`` → ``cache.has_abstraction()``)
    """
    return [stage for stage in stages if not getattr(cache, "has_%s" % stage)()]


def prerequisites_required(*stages):
    """
    Decorator for command methods taking ``(self, config, cache, ...)``
    that refuses to run until the artifacts of ``stages`` exist

    Example usage:
    - prerequisites_required("abstraction") before training
    - prerequisites_required("abstraction", "store") before a run
    """

    def _decorator(method):
        @wraps(method)
        def _checked(command, config, cache, *args, **kwargs):
            missing = check_prerequisites(cache, stages)
            if missing:
                raise MissingArtifactError(
                    "missing %s under %s; run `manage.py %s` first"
                    % (", ".join(missing), cache.root, _command_for(missing[0]))
                )
            return method(command, config, cache, *args, **kwargs)

        return _checked

    return _decorator


def _command_for(stage):
    return {"abstraction": "abstract", "store": "train"}.get(stage, stage)
