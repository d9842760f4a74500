import os
import yaml
import logging

logger = logging.getLogger(__name__)


DEFAULTS = {'dt': 1e-3,
            't_end': 1000.0,
            'snapshot_stride': 100,
            'tolerance': 1e-9,
            'mode': 'fixed',
            'floor': 1e-14,
            'horizon': 1000.0,
            'jobs': 1,
            'output': 'realensemble_output'}

_TYPES = {'dt': float,
          't_end': float,
          'snapshot_stride': int,
          'tolerance': float,
          'mode': str,
          'floor': float,
          'horizon': float,
          'jobs': int,
          'output': str}


def _read_yaml(filename):
    with open(filename) as f:
        content = yaml.safe_load(f)
    return content or {}


def load_configuration(name, prefix, defaults, fname=None):
    """
    Load default run controls from a cascading series of locations.

    The precedence order is (highest priority last):

    1. built-in ``defaults``
    2. CONDA_ENV/etc/{name}.yml (if CONDA_ETC_ env is defined)
    3. /etc/{name}.yml
    4. ~/.config/{name}/defaults.yml
    5. reading {PREFIX}_{FIELD} environmental variables
    6. reading from fname (if it exists)

    Parameters
    ----------
    name : str
        The expected base-name of the configuration files

    prefix : str
        The prefix when looking for environmental variables

    defaults : dict
        Field name -> built-in default.  Only these fields are read.

    fname : str, optional
        Filepath to ultimate configuration file.

    Returns
    ------
    conf : dict
        Dictionary keyed on the fields of ``defaults``
    """
    filenames = [
        os.path.join('/etc', name + '.yml'),
        os.path.join(os.path.expanduser('~'), '.config',
                     name, 'defaults.yml'),
        ]
    if 'CONDA_ETC_' in os.environ:
        filenames.insert(0, os.path.join(os.environ['CONDA_ETC_'],
                                         name + '.yml'))

    config = dict(defaults)
    for filename in filenames:
        if os.path.isfile(filename):
            config.update(_read_yaml(filename))
            logger.debug("Using run defaults from config file %s. \n%r",
                         filename, config)

    config = {k: v for k, v in config.items() if k in defaults}

    for field in defaults:
        var_name = prefix + '_' + field.upper().replace(' ', '_')
        if var_name in os.environ:
            config[field] = os.environ[var_name]

    if fname is not None:
        if os.path.isfile(fname):
            config.update({k: v for k, v in _read_yaml(fname).items()
                           if k in defaults})
            logger.debug("Using run defaults from config file %s. \n%r",
                         fname, config)

    for field, value in list(config.items()):
        cast = _TYPES.get(field)
        if cast is not None and value is not None:
            try:
                config[field] = cast(value)
            except (TypeError, ValueError):
                raise ValueError("The configuration field {0!r} has value "
                                 "{1!r} which is not a valid {2}".format(
                                     field, value, cast.__name__))

    return config


run_defaults = load_configuration('realensemble', 'REALENSEMBLE', DEFAULTS)
