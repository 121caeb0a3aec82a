class AppNotFoundError(Exception):
    pass


class ClassNotFoundError(Exception):
    pass


class SafeComposeError(Exception):
    """
    Base class for the errors raised while building abstractions,
    training local policies and composing them at runtime
    """


class ConfigurationError(SafeComposeError):
    pass


class DimensionMismatchError(SafeComposeError, ValueError):
    pass


class ResolutionError(SafeComposeError, ValueError):
    pass


class OutOfDomainError(SafeComposeError, ValueError):
    pass


class IntervalDomainError(SafeComposeError):
    pass


class ControllerEvaluationError(SafeComposeError):
    def __init__(self, message, step):
        super().__init__("step %d: %s" % (step, message))
        self.step = step


class GPFitError(SafeComposeError):
    def __init__(self, message, suggested_noise_floor):
        super().__init__(
            "%s (try a noise variance of at least %.1e)"
            % (message, suggested_noise_floor)
        )
        self.suggested_noise_floor = suggested_noise_floor


class RegionEnumerationError(SafeComposeError):
    def __init__(self, message, count):
        super().__init__("%s (%d regions)" % (message, count))
        self.count = count


class ProjectionInfeasibleError(SafeComposeError):
    pass


class TrainingDivergedError(SafeComposeError):
    def __init__(self, episode, loss):
        super().__init__(
            "non-finite PPO loss %r at episode %d" % (loss, episode)
        )
        self.episode = episode
        self.loss = loss


class MissingPolicyError(SafeComposeError, KeyError):
    pass


class NoDonorPolicyError(SafeComposeError):
    pass


class MissingArtifactError(SafeComposeError):
    pass


class ArtifactMismatchError(SafeComposeError):
    pass
