"""
LinAmalg configuration package
Central place for budgets, seeds and naming conventions
"""

import logging

from .settings import AppConfig

__version__ = "1.0.0"

__all__ = [
    'AppConfig',
    'app_config',
    'validate_config',
    'get_config_info'
]

logger = logging.getLogger(__name__)

app_config = AppConfig()


def validate_config():
    """Check configuration consistency"""
    errors = []

    for name in ("ENUMERATION_BUDGET", "VERIFICATION_BUDGET", "SEARCH_BUDGET"):
        if getattr(app_config, name, 0) <= 0:
            errors.append(f"{name} must be positive")

    if sorted(app_config.EXIT_CODES.values()) != list(range(len(app_config.EXIT_CODES))):
        errors.append("EXIT_CODES must be 0..n-1")

    if not app_config.FIXTURES_DIR.exists():
        errors.append(f"fixtures directory missing: {app_config.FIXTURES_DIR}")

    return errors


for _error in validate_config():
    logger.warning(f"Configuration warning: {_error}")


def get_config_info():
    """Configuration summary"""
    return {
        "app_version": app_config.APP_VERSION,
        "enumeration_budget": app_config.ENUMERATION_BUDGET,
        "verification_budget": app_config.VERIFICATION_BUDGET,
        "search_budget": app_config.SEARCH_BUDGET,
        "default_seed": app_config.seed(),
        "fixtures_dir": str(app_config.FIXTURES_DIR)
    }
