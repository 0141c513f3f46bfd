"""Logging setup for the command-line tools. Everything goes to stderr."""

from logging.config import dictConfig

LEVELS = ('debug', 'info', 'warning', 'error')
PACKAGES = ('src.pcp', 'src.protocol', 'src.strategy', 'src.logic', 'src.harness')


def set_levels(handler_names, default_level='warning', additions=None):
    log_loggers = {'': dict(handlers=handler_names, level='WARNING', propagate=False)}
    package_log = dict(handlers=handler_names, level=default_level.upper(), propagate=False)
    for name in PACKAGES:
        log_loggers[name] = package_log
    # per-logger overrides, e.g. {'src.protocol.pool': 'debug'}
    for name, level in (additions or {}).items():
        log_loggers[name] = dict(handlers=handler_names, level=level.upper(), propagate=False)
    return log_loggers


def setup_logging(default_level='warning', additions=None):
    if default_level not in LEVELS:
        raise ValueError(f"log level must be one of {LEVELS}, got {default_level!r}")
    stderr_handler = dict(level='DEBUG', formatter='standard', stream='ext://sys.stderr')
    stderr_handler['class'] = 'logging.StreamHandler'
    log_config = dict(version=1, disable_existing_loggers=False,
                      formatters=dict(standard=dict(format='[%(levelname)s] %(name)s: %(message)s')),
                      handlers=dict(stderr=stderr_handler),
                      loggers=set_levels(['stderr'], default_level, additions))
    dictConfig(log_config)
    return log_config
