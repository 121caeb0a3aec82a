# contains project level defaults

# Nominal models selectable by name in the ``dynamics`` section of a run config
SAFECOMPOSE_DYNAMICS_MODELS = {
    "dubins": "dynamics.systems.DubinsCar",
    "drift_integrator": "dynamics.systems.DriftIntegrator",
}

# Simulation-only model errors selectable in the ``truth`` section
SAFECOMPOSE_MODEL_ERRORS = {
    "zero": "dynamics.systems.ZeroModelError",
    "constant": "dynamics.systems.ConstantModelError",
    "trigonometric": "dynamics.systems.TrigonometricModelError",
}

# Run configuration used for every section a config file leaves out:
# a desk-scale Dubins instance (10 x 10 x 8 cells, 16 controller partitions)
SAFECOMPOSE_DEFAULT_RUN_CONFIG = {
    "version": 1,
    "dynamics": {
        "name": "dubins",
        "dt": 0.1,
        "speed": 3.0,
        "disturbance": [[0.0, 0.1], [0.0, 0.1], [0.0, 0.0]],
    },
    "truth": {"name": "trigonometric", "amplitude": 0.05},
    "gp": {
        "signal_variance": 1e-4,
        "lengthscales": [1.0],
        "noise_variance": 1e-6,
        "samples": 200,
    },
    "grids": {
        "domain": [[0.0, 10.0], [0.0, 10.0], [0.0, 6.283185307179586]],
        "counts": [10, 10, 8],
        "periodic_dims": [2],
        "controller_box": [[0.0, 0.0], [0.0, 0.0], [-1.0, 1.0], [-2.0, 2.0]],
        "controller_counts": [1, 1, 4, 4],
    },
    "training": {"seed": 0, "offline_episodes": 800, "online_episodes": 80},
    "transfer": {"weights": [1.0, 1.0, 1.0]},
    "runtime": {"disturbance_mode": "truth", "samples": 1000},
    "paths": {"cache": ".safecompose/cache", "output": ".safecompose/output"},
}
