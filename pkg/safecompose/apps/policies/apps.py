from django.utils.translation import gettext_lazy as _

from safecompose.core.application import SafeComposeConfig


class PoliciesConfig(SafeComposeConfig):
    label = "policies"
    name = "safecompose.apps.policies"
    verbose_name = _("Local policies")

    default_settings = {
        # stop enumerating activation patterns beyond this many regions
        "max_regions": 4096,
        # componentwise tolerance of the containment certificate
        "containment_tolerance": 1e-6,
        # projection targets sit this fraction of the span inside P
        "projection_margin": 1e-9,
        # PPO
        "hidden_width": 6,
        "episode_length": 10,
        "clip_ratio": 0.2,
        "learning_rate": 3e-3,
        "epochs_per_episode": 4,
        "discount": 0.99,
        "initial_log_std": -1.0,
        "goal_weight": 1.0,
        "gain_weight": 0.1,
        "offline_episodes": 800,
        "online_episodes": 80,
    }
