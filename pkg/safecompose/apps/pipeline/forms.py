"""
Run configuration: one YAML file, validated section by section with
Django forms

A section missing from the file takes the values of
``SAFECOMPOSE_DEFAULT_RUN_CONFIG``; a section given in the file is laid
over its defaults key by key.
"""
import inspect
import logging
from copy import deepcopy
from pathlib import Path
from typing import Dict, Union

import yaml
from django import forms
from django.conf import settings
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from safecompose.apps.abstraction.partitions import build_controller_grid, build_state_grid
from safecompose.apps.abstraction.reachability import input_range
from safecompose.apps.gp.regression import KernelHyperparameters
from safecompose.apps.runtime.execution import DISTURBANCE_MODES
from safecompose.apps.transfer.distance import TransferWeights
from safecompose.core.application import get_app_setting
from safecompose.core.exceptions import ConfigurationError
from safecompose.core.geometry import Box
from safecompose.core.loading import get_registered_class
from safecompose.utils.files import digest

logger = logging.getLogger(__name__)


class NumberListField(forms.Field):
    default_error_messages = {
        "invalid": _("Enter a list of numbers."),
        "length": _("Expected %(expected)d entries, got %(actual)d."),
        "min_value": _("Every entry must be at least %(min_value)s."),
    }

    def __init__(self, *, coerce=float, length=None, min_value=None, **kwargs):
        self.coerce = coerce
        self.length = length
        self.min_value = min_value
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if not isinstance(value, (list, tuple)):
            raise ValidationError(self.error_messages["invalid"], code="invalid")
        try:
            return [self.coerce(item) for item in value]
        except (TypeError, ValueError):
            raise ValidationError(self.error_messages["invalid"], code="invalid")

    def validate(self, value):
        super().validate(value)
        if not value:
            return
        if self.length is not None and len(value) != self.length:
            raise ValidationError(
                self.error_messages["length"],
                code="length",
                params={"expected": self.length, "actual": len(value)},
            )
        if self.min_value is not None and any(item < self.min_value for item in value):
            raise ValidationError(
                self.error_messages["min_value"],
                code="min_value",
                params={"min_value": self.min_value},
            )


class BoxField(forms.Field):
    """A ``[[lo, hi], ...]`` list cleaned into a :class:`Box`"""

    default_error_messages = {
        "invalid": _("Enter a list of [lo, hi] pairs with lo <= hi (%(error)s)."),
    }

    def to_python(self, value):
        if value in self.empty_values:
            return None
        try:
            return Box.from_bounds(value)
        except (TypeError, ValueError) as error:
            raise ValidationError(
                self.error_messages["invalid"], code="invalid", params={"error": error}
            )


def _registry_choices(registry_name):
    return [(name, name) for name in sorted(getattr(settings, registry_name, {}))]


def construct(klass, options: dict):
    """Instantiate ``klass`` with the entries of ``options`` its constructor accepts"""
    accepted = inspect.signature(klass).parameters
    kwargs = {k: v for k, v in options.items() if k in accepted and v is not None}
    try:
        return klass(**kwargs)
    except (TypeError, ValueError) as error:
        raise ConfigurationError("cannot build %s: %s" % (klass.__name__, error)) from error


class DynamicsForm(forms.Form):
    name = forms.ChoiceField(choices=())
    dt = forms.FloatField()
    speed = forms.FloatField(required=False)
    drift = forms.FloatField(required=False)
    disturbance = BoxField()

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.fields["name"].choices = _registry_choices("SAFECOMPOSE_DYNAMICS_MODELS")

    @property
    def model_class(self):
        return get_registered_class("SAFECOMPOSE_DYNAMICS_MODELS", self.cleaned_data["name"])

    def clean_dt(self):
        dt = self.cleaned_data["dt"]
        if dt <= 0:
            raise ValidationError(_("The time step must be positive."), code="invalid")
        return dt

    def clean(self):
        cleaned_data = super().clean()
        disturbance = cleaned_data.get("disturbance")
        if cleaned_data.get("name") and disturbance is not None:
            state_dim = self.model_class.state_dim
            if disturbance.dim != state_dim:
                self.add_error(
                    "disturbance",
                    ValidationError(
                        _("The error bound needs %(expected)d dimensions, got %(actual)d."),
                        code="dimension",
                        params={"expected": state_dim, "actual": disturbance.dim},
                    ),
                )
        return cleaned_data

    def build(self):
        return construct(self.model_class, self.cleaned_data)


class TruthForm(forms.Form):
    name = forms.ChoiceField(choices=())
    amplitude = forms.FloatField(required=False, min_value=0.0)
    offset = NumberListField(required=False)

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.fields["name"].choices = _registry_choices("SAFECOMPOSE_MODEL_ERRORS")

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get("name") == "constant" and not cleaned_data.get("offset"):
            self.add_error("offset", ValidationError(_("A constant error needs an offset."), code="required"))
        return cleaned_data

    def build(self):
        klass = get_registered_class("SAFECOMPOSE_MODEL_ERRORS", self.cleaned_data["name"])
        return construct(klass, self.cleaned_data)


class GaussianProcessForm(forms.Form):
    signal_variance = forms.FloatField()
    lengthscales = NumberListField()
    noise_variance = forms.FloatField(min_value=0.0)
    samples = forms.IntegerField(min_value=1)
    # left out, the range the controller partitions produce over the domain
    input_box = BoxField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        if not self.errors:
            try:
                self.hyperparameters()
            except ValueError as error:
                raise ValidationError(str(error), code="invalid")
        return cleaned_data

    def hyperparameters(self) -> KernelHyperparameters:
        return KernelHyperparameters(
            self.cleaned_data["signal_variance"],
            tuple(self.cleaned_data["lengthscales"]),
            self.cleaned_data["noise_variance"],
        )


class GridForm(forms.Form):
    domain = BoxField()
    counts = NumberListField(coerce=int, min_value=1)
    periodic_dims = NumberListField(coerce=int, required=False, min_value=0)
    controller_box = BoxField()
    controller_counts = NumberListField(coerce=int, min_value=1)

    def clean(self):
        cleaned_data = super().clean()
        pairs = (("domain", "counts"), ("controller_box", "controller_counts"))
        for box_name, counts_name in pairs:
            box, counts = cleaned_data.get(box_name), cleaned_data.get(counts_name)
            if box is not None and counts and len(counts) != box.dim:
                self.add_error(
                    counts_name,
                    ValidationError(
                        _("Expected %(expected)d cell counts, got %(actual)d."),
                        code="length",
                        params={"expected": box.dim, "actual": len(counts)},
                    ),
                )
        return cleaned_data


class TrainingForm(forms.Form):
    seed = forms.IntegerField(min_value=0)
    offline_episodes = forms.IntegerField(min_value=1)
    online_episodes = forms.IntegerField(min_value=1)
    # PPO knobs; left out, the ``policies`` app settings apply
    hidden_width = forms.IntegerField(required=False, min_value=1)
    episode_length = forms.IntegerField(required=False, min_value=1)
    clip_ratio = forms.FloatField(required=False, min_value=0.0)
    learning_rate = forms.FloatField(required=False, min_value=0.0)
    epochs_per_episode = forms.IntegerField(required=False, min_value=1)
    discount = forms.FloatField(required=False, min_value=0.0, max_value=1.0)
    goal_weight = forms.FloatField(required=False, min_value=0.0)
    gain_weight = forms.FloatField(required=False, min_value=0.0)

    PPO_FIELDS = (
        "hidden_width",
        "episode_length",
        "clip_ratio",
        "learning_rate",
        "epochs_per_episode",
        "discount",
        "goal_weight",
        "gain_weight",
    )

    def ppo_overrides(self) -> dict:
        return {name: self.cleaned_data.get(name) for name in self.PPO_FIELDS}


class TransferForm(forms.Form):
    weights = NumberListField(length=3, min_value=0.0)

    def clean_weights(self):
        weights = self.cleaned_data["weights"]
        if weights and not any(w > 0 for w in weights):
            raise ValidationError(_("At least one weight must be positive."), code="invalid")
        return weights


class RuntimeForm(forms.Form):
    disturbance_mode = forms.ChoiceField(choices=[(mode, mode) for mode in DISTURBANCE_MODES])
    samples = forms.IntegerField(min_value=1)


class PathsForm(forms.Form):
    cache = forms.CharField()
    output = forms.CharField()


SECTION_FORMS = {
    "dynamics": DynamicsForm,
    "truth": TruthForm,
    "gp": GaussianProcessForm,
    "grids": GridForm,
    "training": TrainingForm,
    "transfer": TransferForm,
    "runtime": RuntimeForm,
    "paths": PathsForm,
}

#: sections the abstraction digest covers
ABSTRACTION_SECTIONS = ("dynamics", "truth", "gp", "grids")

#: slack when checking that ``gp.input_box`` covers the controller inputs
INPUT_BOX_TOLERANCE = 1e-9


def _format_errors(section, form) -> str:
    messages = []
    for field, errors in form.errors.get_json_data().items():
        label = section if field == "__all__" else "%s.%s" % (section, field)
        messages.extend("%s: %s" % (label, error["message"]) for error in errors)
    return "; ".join(messages)


class RunConfig:
    """
    A validated run configuration

    ``sections`` holds the bound, valid form of every section and
    ``data`` the merged raw values the digests are computed from.
    """

    def __init__(self, data: dict, sections: Dict[str, forms.Form], source=None):
        self.data = data
        self.sections = sections
        self.source = source

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "RunConfig":
        path = Path(path)
        try:
            with open(path) as handle:
                data = yaml.safe_load(handle)
        except FileNotFoundError:
            raise ConfigurationError("configuration file %s does not exist" % path)
        except yaml.YAMLError as error:
            raise ConfigurationError("cannot parse %s: %s" % (path, error)) from error
        config = cls.from_dict(data or {})
        config.source = path
        logger.info("loaded run configuration %s (abstraction %s)", path, config.abstraction_digest()[:12])
        return config

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("a run configuration must be a mapping")
        defaults = settings.SAFECOMPOSE_DEFAULT_RUN_CONFIG
        version = data.get("version", defaults["version"])
        expected = get_app_setting("safecompose", "config_version")
        if version != expected:
            raise ConfigurationError(
                "unsupported configuration version %r, expected %r" % (version, expected)
            )
        unknown = set(data) - set(SECTION_FORMS) - {"version"}
        if unknown:
            raise ConfigurationError("unknown configuration sections: %s" % ", ".join(sorted(unknown)))

        merged = {"version": version}
        sections, errors = {}, []
        for section, form_class in SECTION_FORMS.items():
            given = data.get(section) or {}
            if not isinstance(given, dict):
                raise ConfigurationError("section %s must be a mapping" % section)
            unknown = set(given) - set(form_class.base_fields)
            if unknown:
                raise ConfigurationError(
                    "unknown keys in section %s: %s" % (section, ", ".join(sorted(unknown)))
                )
            values = deepcopy(defaults.get(section, {}))
            values.update(given)
            merged[section] = values
            form = form_class(values)
            if form.is_valid():
                sections[section] = form
            else:
                errors.append(_format_errors(section, form))
        if errors:
            raise ConfigurationError("invalid configuration: %s" % "; ".join(errors))

        config = cls(merged, sections)
        config.check_consistency()
        return config

    def to_dict(self) -> dict:
        return deepcopy(self.data)

    def cleaned(self, section: str) -> dict:
        return self.sections[section].cleaned_data

    def check_consistency(self):
        """Build the model and both grids once so mismatched sections fail early"""
        model = self.build_model()
        self.build_truth()
        offset = self.cleaned("truth").get("offset")
        if self.cleaned("truth")["name"] == "constant" and len(offset) != model.state_dim:
            raise ConfigurationError(
                "truth.offset has %d entries, %s has %d states" % (len(offset), model.name, model.state_dim)
            )
        grids = self.cleaned("grids")
        if grids["domain"].dim != model.state_dim:
            raise ConfigurationError(
                "the state domain has %d dimensions, %s needs %d"
                % (grids["domain"].dim, model.name, model.state_dim)
            )
        if tuple(grids["periodic_dims"]) != tuple(model.periodic_dims):
            raise ConfigurationError(
                "periodic dimensions %s do not match %s (%s)"
                % (grids["periodic_dims"], model.name, list(model.periodic_dims))
            )
        input_box = self.cleaned("gp")["input_box"]
        if input_box is not None and input_box.dim != model.input_dim:
            raise ConfigurationError(
                "the GP input box has %d dimensions, %s takes %d inputs"
                % (input_box.dim, model.name, model.input_dim)
            )
        self.build_grids()
        required = self.controller_input_box()
        if input_box is not None and not input_box.contains_box(required, tol=INPUT_BOX_TOLERANCE):
            raise ConfigurationError(
                "gp.input_box %s does not cover the inputs %s the controller partitions produce over the domain"
                % (input_box.to_list(), required.to_list())
            )
        try:
            self.sections["gp"].hyperparameters().lengthscale_vector(model.state_dim + model.input_dim)
        except ValueError as error:
            raise ConfigurationError("gp.lengthscales: %s" % error) from error

    def build_model(self):
        return self.sections["dynamics"].build()

    def build_truth(self):
        return self.sections["truth"].build()

    def build_grids(self):
        model_class = self.sections["dynamics"].model_class
        grids = self.cleaned("grids")
        try:
            partition = build_state_grid(grids["domain"], grids["counts"], grids["periodic_dims"])
            controller_grid = build_controller_grid(
                grids["controller_box"],
                grids["controller_counts"],
                model_class.state_dim,
                model_class.input_dim,
            )
        except ValueError as error:
            raise ConfigurationError("grids: %s" % error) from error
        return partition, controller_grid

    def controller_input_box(self) -> Box:
        """Enclosure of ``u = K [x; 1]`` over the domain and the global controller box"""
        partition, controller_grid = self.build_grids()
        inputs = input_range(partition.domain, controller_grid.global_box, controller_grid.input_dim)
        return Box(inputs.lower, inputs.upper)

    @property
    def gp_input_box(self) -> Box:
        """Input box the residuals and the bound check are sampled over"""
        return self.cleaned("gp")["input_box"] or self.controller_input_box()

    @property
    def disturbance(self) -> Box:
        return self.cleaned("dynamics")["disturbance"]

    @property
    def hyperparameters(self) -> KernelHyperparameters:
        return self.sections["gp"].hyperparameters()

    @property
    def seed(self) -> int:
        return self.cleaned("training")["seed"]

    @property
    def transfer_weights(self) -> TransferWeights:
        return TransferWeights(*self.cleaned("transfer")["weights"])

    def ppo_overrides(self) -> dict:
        return self.sections["training"].ppo_overrides()

    def abstraction_digest(self) -> str:
        # the root seed drives the residual samples
        covered = {name: self.data[name] for name in ("version",) + ABSTRACTION_SECTIONS}
        covered["seed"] = self.seed
        return digest(covered)

    def store_digest(self) -> str:
        return digest({"abstraction": self.abstraction_digest(), "training": self.data["training"]})

    def __repr__(self):
        return "RunConfig(%s)" % (self.source or self.abstraction_digest()[:12])
