import numbers
from shiftschema.validators.abstract_validator import AbstractValidator
from shiftschema.result import Error


class Number(AbstractValidator):
    """
    Number validator
    Checks that a value is a real (optionally integral) number within
    bounds. Each bound can be inclusive or exclusive.
    """

    def __init__(
        self,
        min=None,
        max=None,
        min_inclusive=True,
        max_inclusive=True,
        integer=False,
        message=None):
        """
        Initialize validator
        :param min: lower bound or None
        :param max: upper bound or None
        :param min_inclusive: bool, whether min itself is allowed
        :param max_inclusive: bool, whether max itself is allowed
        :param integer: bool, require an integral value
        :param message: str, custom error message
        """
        self.min = min
        self.max = max
        self.min_inclusive = min_inclusive
        self.max_inclusive = max_inclusive
        self.integer = integer
        self.message = message

    def describe(self):
        """ Human-readable allowed range """
        low = '[' if self.min_inclusive else '('
        high = ']' if self.max_inclusive else ')'
        return '{}{}, {}{}'.format(
            low,
            '-inf' if self.min is None else self.min,
            'inf' if self.max is None else self.max,
            high
        )

    def validate(self, value, model=None, context=None):
        """
        Validate
        :param value: value to check
        :param model: parent model being validated
        :param context: object or None, validation context
        :return: shiftschema.result.Error
        """
        kind = 'an integer' if self.integer else 'a number'
        message = self.message or 'Must be {} in {}'.format(
            kind,
            self.describe()
        )

        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            return Error(message)
        if self.integer and not isinstance(value, numbers.Integral):
            return Error(message)
        if value != value:
            return Error(message)

        if self.min is not None:
            if value < self.min or (not self.min_inclusive
                                    and value == self.min):
                return Error(message)
        if self.max is not None:
            if value > self.max or (not self.max_inclusive
                                    and value == self.max):
                return Error(message)

        return Error()


class BottleneckWidth(AbstractValidator):
    """
    Bottleneck width validator
    A bottleneck must reduce: its width has to be at least one and strictly
    below the random feature dimension of the model being validated.
    """

    def validate(self, value, model=None, context=None):
        if getattr(model, 'bottleneck', 'none') == 'none':
            return Error()

        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            return Error('Bottleneck width must be an integer')

        feature_dim = getattr(model, 'feature_dim', None)
        if value < 1:
            return Error('Bottleneck width must be positive')
        if isinstance(feature_dim, numbers.Integral) and value >= feature_dim:
            msg = 'Bottleneck width {} must be below feature dimension {}'
            return Error(msg.format(value, feature_dim))

        return Error()
