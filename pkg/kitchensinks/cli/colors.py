import logging
from click import style, echo


def colour(colour, message, bold=False):
    """ Color a message """
    return style(fg=colour, text=message, bold=bold)


def yellow(message, bold=False):
    """ Color in yellow """
    return colour('yellow', message, bold)


def red(message, bold=False):
    """ Color in red """
    return colour('red', message, bold)


def green(message, bold=False):
    """ Color in green """
    return colour('green', message, bold)


def cyan(message, bold=False):
    """ Color in cyan """
    return colour('cyan', message, bold)


# level -> styling of log records
LEVEL_STYLES = {
    logging.DEBUG: lambda m: colour('white', m),
    logging.INFO: cyan,
    logging.WARNING: yellow,
    logging.ERROR: red,
    logging.CRITICAL: lambda m: red(m, bold=True),
}


class ClickHandler(logging.Handler):
    """
    Click handler
    Writes log records to stderr through click, coloured by level, so that
    stdout stays reserved for JSON and CSV output.
    """

    def emit(self, record):
        try:
            message = self.format(record)
            styler = LEVEL_STYLES.get(record.levelno, lambda m: m)
            echo(styler(message), err=True)
        except Exception:  # pragma: no cover
            self.handleError(record)


def setup_logging(verbose=False):
    """
    Setup logging
    Installs a single click handler on the package logger.
    :param verbose: bool, log debug messages
    :return: logging.Logger
    """
    logger = logging.getLogger('kitchensinks')
    for handler in list(logger.handlers):
        if isinstance(handler, ClickHandler):
            logger.removeHandler(handler)

    handler = ClickHandler()
    handler.setFormatter(logging.Formatter('%(levelname)s %(message)s'))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    return logger
