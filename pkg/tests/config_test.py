from tests.base import BaseTestCase
from nose.plugins.attrib import attr

from kitchensinks.config import TrainConfig, ModelConfig, parse_bottleneck
from kitchensinks import exceptions as x


@attr('config')
class TrainConfigTest(BaseTestCase):

    def test_printable_repr(self):
        """ Getting printable representation of a config """
        self.assertIn('<TrainConfig', repr(TrainConfig()))

    def test_defaults(self):
        """ Config is populated with defaults """
        config = TrainConfig()
        self.assertEqual(250, config.minibatch_size)
        self.assertEqual(0.9, config.momentum)
        self.assertEqual(0.5, config.anneal_factor)
        self.assertEqual(0.001, config.anneal_threshold)
        self.assertEqual(20, config.max_epochs)
        self.assertFalse(config.cache_features)
        self.assertIs(config, config.validate())

    def test_property_access(self):
        """ Props can be read and set as attributes """
        config = TrainConfig(learning_rate=0.1)
        self.assertEqual(0.1, config.learning_rate)
        config.max_epochs = 3
        self.assertEqual(3, config.props['max_epochs'])
        self.assertFalse(hasattr(config, 'whatever'))

    def test_populate_from_dict_ignores_unknown_keys(self):
        """ Unknown keys are ignored when populating """
        config = TrainConfig().from_dict(dict(seed=4, colour='red'))
        self.assertEqual(4, config.seed)
        self.assertNotIn('colour', config.to_dict())

    def test_configs_compare_by_props(self):
        """ Configs with the same props are equal """
        self.assertEqual(TrainConfig(seed=1), TrainConfig(seed=1))
        self.assertNotEqual(TrainConfig(seed=1), TrainConfig(seed=2))

    def test_invalid_values_are_reported(self):
        """ Invalid props fail validation with messages per prop """
        config = TrainConfig(
            minibatch_size=0,
            momentum=1.0,
            anneal_factor=0.0,
            learning_rate=-1.0,
            max_epochs=2.5,
        )
        with self.assertRaises(x.InvalidConfig) as cm:
            config.validate()
        errors = cm.exception.validation_errors
        for prop in ('minibatch_size', 'momentum', 'anneal_factor',
                     'learning_rate', 'max_epochs'):
            self.assertIn(prop, errors)

    def test_invalid_config_is_a_configuration_error(self):
        """ Validation errors are configuration errors """
        with self.assertRaises(x.ConfigurationException):
            TrainConfig(l2=-0.1).validate()


@attr('config')
class ModelConfigTest(BaseTestCase):

    def test_valid_configs(self):
        """ Valid model configs pass """
        ModelConfig(num_classes=3, feature_dim=10).validate()
        ModelConfig(num_classes=3, feature_dim=10, bottleneck='linear',
                    width=9).validate()

    def test_num_classes_required(self):
        """ Class count is required """
        with self.assertRaises(x.InvalidConfig) as cm:
            ModelConfig(feature_dim=10).validate()
        self.assertIn('num_classes', cm.exception.validation_errors)

    def test_unknown_bottleneck(self):
        """ Bottleneck kind must be known """
        with self.assertRaises(x.InvalidConfig) as cm:
            ModelConfig(num_classes=3, feature_dim=10,
                        bottleneck='tanh', width=2).validate()
        self.assertIn('bottleneck', cm.exception.validation_errors)
        self.assertEqual(
            ['Bottleneck must be one of none, linear, sigmoid'],
            cm.exception.validation_errors['bottleneck']
        )

    def test_every_bottleneck_kind_is_accepted(self):
        """ none, linear and sigmoid pass validation """
        for kind, width in (('none', None), ('linear', 4), ('sigmoid', 4)):
            ModelConfig(num_classes=3, feature_dim=10, bottleneck=kind,
                        width=width).validate()

    def test_width_must_reduce(self):
        """ Width has to be below feature dimension """
        with self.assertRaises(x.InvalidConfig) as cm:
            ModelConfig(num_classes=3, feature_dim=10,
                        bottleneck='sigmoid', width=11).validate()
        self.assertIn('width', cm.exception.validation_errors)

    def test_parse_bottleneck(self):
        """ Parsing command line bottleneck values """
        self.assertEqual(('none', None), parse_bottleneck('none'))
        self.assertEqual(('linear', 250), parse_bottleneck('linear:250'))
        self.assertEqual(('sigmoid', 500), parse_bottleneck(' Sigmoid:500'))
        for bad in ('linear', 'relu:3', 'sigmoid:-1', 'linear:x'):
            with self.assertRaises(x.ConfigurationException):
                parse_bottleneck(bad)
