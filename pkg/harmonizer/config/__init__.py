from .job_config import JobConfig, resolve_config, layered_options, DEFAULTS_INI, SUBCOMMANDS, ENV_PREFIX
