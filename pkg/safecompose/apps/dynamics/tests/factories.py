import factory

from safecompose.apps.dynamics.systems import DubinsCar, DriftIntegrator, TrigonometricModelError


class DubinsCarFactory(factory.Factory):
    speed = 3.0
    dt = 0.1

    class Meta:
        model = DubinsCar


class DriftIntegratorFactory(factory.Factory):
    drift = 1.0
    dt = 0.1

    class Meta:
        model = DriftIntegrator


class TrigonometricModelErrorFactory(factory.Factory):
    amplitude = 0.05

    class Meta:
        model = TrigonometricModelError
