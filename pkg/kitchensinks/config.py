import copy
from shiftschema.schema import Schema
from shiftschema import validators
from shiftschema import filters
from kitchensinks import exceptions as x
from kitchensinks import validators as v

BOTTLENECK_KINDS = ('none', 'linear', 'sigmoid')


class TrainConfigSchema(Schema):
    """
    Train config schema
    Defines validators for mini-batch SGD hyperparameters
    """
    def schema(self):
        self.add_property('minibatch_size')
        self.minibatch_size.add_validator(v.Number(min=1, integer=True))

        self.add_property('learning_rate')
        self.learning_rate.add_validator(validators.Required(
            message='Training needs a learning rate'
        ))
        self.learning_rate.add_validator(v.Number(
            min=0,
            min_inclusive=False
        ))

        self.add_property('momentum')
        self.momentum.add_validator(v.Number(
            min=0,
            max=1,
            max_inclusive=False
        ))

        self.add_property('anneal_factor')
        self.anneal_factor.add_validator(v.Number(
            min=0,
            max=1,
            min_inclusive=False
        ))

        self.add_property('anneal_threshold')
        self.anneal_threshold.add_validator(v.Number(min=0))

        self.add_property('max_epochs')
        self.max_epochs.add_validator(v.Number(min=0, integer=True))

        self.add_property('l2')
        self.l2.add_validator(v.Number(min=0))

        self.add_property('seed')
        self.seed.add_validator(v.Number(
            min=0,
            max=2 ** 64,
            max_inclusive=False,
            integer=True
        ))

        self.add_property('eval_every')
        self.eval_every.add_validator(v.Number(min=1, integer=True))

        self.add_property('workers')
        self.workers.add_validator(v.Number(min=1, integer=True))


class ModelConfigSchema(Schema):
    """
    Model config schema
    Output layer dimensions and optional bottleneck
    """
    def schema(self):
        self.add_property('num_classes')
        self.num_classes.add_validator(validators.Required(
            message='A model must have number of classes set'
        ))
        self.num_classes.add_validator(v.Number(
            min=2,
            integer=True,
            message='A model needs at least two classes'
        ))

        self.add_property('feature_dim')
        self.feature_dim.add_validator(validators.Required(
            message='A model must have feature dimension set'
        ))
        self.feature_dim.add_validator(v.Number(min=1, integer=True))

        self.add_property('bottleneck')
        self.bottleneck.add_filter(filters.Strip())
        self.bottleneck.add_validator(validators.Choice(
            BOTTLENECK_KINDS,
            message='Bottleneck must be one of none, linear, sigmoid'
        ))

        self.add_property('width')
        self.width.add_validator(v.BottleneckWidth())


class Config:
    """
    Config
    Property bag of settings, populated from kwargs and validated
    against a schema.
    """

    # schema class, define in concrete configs
    SCHEMA = None

    # default props, define in concrete configs
    DEFAULTS = dict()

    # config props, initialized at instance level
    props = dict()

    def __init__(self, *_, **kwargs):
        """
        Instantiate config object
        Populates itself with defaults, then from kwargs

        :param _: args, ignored
        :param kwargs: dict, key-value pairs used to populate config
        """
        self.props = copy.deepcopy(self.DEFAULTS)
        self.from_dict(kwargs)

    def __repr__(self):
        """ Returns printable representation of a config """
        items = ' '.join(
            '{}=[{}]'.format(k, v) for k, v in sorted(self.props.items())
        )
        return '<{} {}>'.format(self.__class__.__name__, items)

    def __getattr__(self, item):
        """ Overrides attribute access for getting props """
        if item in self.props:
            return self.props[item]
        return object.__getattribute__(self, item)

    def __setattr__(self, key, value):
        """ Overrides attribute access for setting props """
        if key in self.props:
            self.props[key] = value
        else:
            object.__setattr__(self, key, value)

    def __eq__(self, other):
        if not isinstance(other, Config):
            return NotImplemented
        return type(self) is type(other) and self.props == other.props

    def to_dict(self):
        """ Returns dictionary representation of the config """
        return copy.copy(self.props)

    def from_dict(self, data):
        """ Populates itself from a dictionary, ignoring unknown keys """
        for prop, val in data.items():
            if prop in self.props:
                setattr(self, prop, val)
        return self

    def validate(self):
        """
        Validate
        Runs schema filters and validators. Raises on invalid config.
        :return: self
        """
        schema = self.SCHEMA()
        ok = schema.process(self)
        if not ok:
            errors = ok.get_messages()
            msg = '{} is invalid: {}'.format(self.__class__.__name__, errors)
            raise x.InvalidConfig(msg, validation_errors=errors)
        return self


class TrainConfig(Config):
    """
    Train config
    Hyperparameters for mini-batch SGD with classical momentum and
    learning rate annealing on held-out perplexity.
    """
    SCHEMA = TrainConfigSchema
    DEFAULTS = dict(
        minibatch_size=250,
        learning_rate=1.0,
        momentum=0.9,
        anneal_factor=0.5,
        anneal_threshold=0.001,
        max_epochs=20,
        l2=0.0,
        seed=0,
        eval_every=1,
        workers=1,
        cache_features=False,
    )


class ModelConfig(Config):
    """
    Model config
    Output layer over D random features for C classes, with an optional
    linear (low-rank) or sigmoid (ECOC) bottleneck of given width.
    """
    SCHEMA = ModelConfigSchema
    DEFAULTS = dict(
        num_classes=None,
        feature_dim=None,
        bottleneck='none',
        width=None,
    )

    def validate(self):
        """ Schema validation, then require a width for bottlenecks """
        super().validate()
        if self.bottleneck != 'none' and self.width is None:
            errors = dict(width=['Bottleneck width must be set'])
            msg = 'ModelConfig is invalid: {}'.format(errors)
            raise x.InvalidConfig(msg, validation_errors=errors)
        return self


def parse_bottleneck(value):
    """
    Parse bottleneck
    Accepts 'none', 'linear:W' or 'sigmoid:W' as used on the command line.
    :param value: str
    :return: tuple, (kind, width or None)
    """
    value = str(value).strip().lower()
    if value == 'none':
        return 'none', None

    kind, _, width = value.partition(':')
    if kind not in BOTTLENECK_KINDS or not width.isdigit():
        msg = 'Bottleneck must be none, linear:W or sigmoid:W, got [{}]'
        raise x.ConfigurationException(msg.format(value))
    return kind, int(width)
