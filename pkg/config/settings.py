"""
LinAmalg - global settings
======================================================
1. AppConfig : search budgets, seeds, naming conventions, exit codes
2. Environment overrides (.env / LINAMALG_* variables)
"""

import os
from pathlib import Path
from typing import Dict, Optional

from dotenv import load_dotenv

load_dotenv()


class AppConfig:
    """Application configuration"""

    # Basic application info
    APP_TITLE = "LinAmalg"
    APP_VERSION = "1.0.0"

    # Budgets
    ENUMERATION_BUDGET = 10 ** 8   # table candidates for enumerate_models
    VERIFICATION_BUDGET = 10 ** 7  # evaluations for the post-construction model check
    SEARCH_BUDGET = 10 ** 8        # completions for search_amalgam_on_union
    ISO_MAX_SIZE = 6
    SMALL_ALGEBRA_COUNT_BUDGET = 500

    # Reproducibility
    DEFAULT_SEED = 20210601
    RANDOM_TRIPLES_PER_VARIETY = 200

    # Naming
    FRESH_ELEMENT = "_fresh"
    RENAME_SUFFIX = "'"
    H_OP = "h"
    K_OP = "k"

    # Data
    FILE_SIZE_LIMIT_MB = 5
    FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"

    # Exit code contract
    EXIT_CODES: Dict[str, int] = {
        "ok": 0,
        "refuted": 1,
        "precondition": 2,
        "budget": 3,
        "internal": 4
    }

    # Environment variables
    ENV_BUDGET = "LINAMALG_BUDGET"
    ENV_SEED = "LINAMALG_SEED"
    ENV_LOG_LEVEL = "LINAMALG_LOG_LEVEL"

    @classmethod
    def budget(cls, override: Optional[int] = None, default: Optional[int] = None) -> int:
        """
        Resolve a search budget

        Args:
            override: value given on the command line
            default: fallback when neither flag nor env var is set

        Returns:
            int: CLI flag > LINAMALG_BUDGET > default
        """
        if override is not None:
            return int(override)
        env_value = os.getenv(cls.ENV_BUDGET)
        if env_value:
            return int(env_value)
        return default if default is not None else cls.ENUMERATION_BUDGET

    @classmethod
    def seed(cls, override: Optional[int] = None) -> int:
        if override is not None:
            return int(override)
        env_value = os.getenv(cls.ENV_SEED)
        return int(env_value) if env_value else cls.DEFAULT_SEED

    @classmethod
    def log_level(cls) -> str:
        return os.getenv(cls.ENV_LOG_LEVEL, "WARNING").upper()
