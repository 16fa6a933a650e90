"""
Configuration module - Loads settings from environment variables
"""

import os
import warnings
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv, dotenv_values

# Load .env file from project root
env_path = Path(__file__).parent.parent / '.env'
if env_path.exists():
    load_dotenv(env_path)
else:
    # Try config.env as fallback
    config_env_path = Path(__file__).parent.parent / 'config.env'
    if config_env_path.exists():
        load_dotenv(config_env_path)


class Config:
    """Application configuration from environment variables"""

    # Output
    OUTPUT_DIR: str = os.getenv('CASCADE_OUTPUT_DIR', './output')

    # Logging
    LOG_LEVEL: str = os.getenv('CASCADE_LOG_LEVEL', 'INFO')
    LOG_FILE: Optional[str] = os.getenv('CASCADE_LOG_FILE') or None

    # Recurrence grid
    GRID_STEP: float = float(os.getenv('CASCADE_GRID_STEP', '1e-3'))
    FRONT_LEVEL: float = float(os.getenv('CASCADE_FRONT_LEVEL', '0.5'))
    DOMAIN_MARGIN: float = float(os.getenv('CASCADE_DOMAIN_MARGIN', '40'))
    MAX_GRID_POINTS: int = int(os.getenv('CASCADE_MAX_GRID_POINTS', '5000000'))
    TAIL_TOLERANCE: float = float(os.getenv('CASCADE_TAIL_TOLERANCE', '1e-12'))

    # Wave profiles
    PROFILE_SPAN: float = float(os.getenv('CASCADE_PROFILE_SPAN', '40'))
    PROFILE_MARGIN: float = float(os.getenv('CASCADE_PROFILE_MARGIN', '20'))

    # Monte Carlo
    NODE_CAP: int = int(os.getenv('CASCADE_NODE_CAP', '100000000'))
    BATCH_SIZE: int = int(os.getenv('CASCADE_BATCH_SIZE', '65536'))
    BLOCK_SIZE: int = int(os.getenv('CASCADE_BLOCK_SIZE', '100'))
    THREADS: int = int(os.getenv('CASCADE_THREADS', '1'))

    # Long-running acceptance scenarios in the test suite
    RUN_SCENARIOS: bool = os.getenv('CASCADE_RUN_SCENARIOS', 'false').lower() in ('1', 'true', 'yes')

    @classmethod
    def validate(cls):
        """Validate critical configuration"""
        if cls.GRID_STEP > 1e-2:
            warnings.warn(
                f"CASCADE_GRID_STEP={cls.GRID_STEP} is coarse; "
                "front positions will carry visible quadrature error.",
                UserWarning
            )

        if not 0.0 < cls.FRONT_LEVEL < 1.0:
            warnings.warn(
                f"CASCADE_FRONT_LEVEL={cls.FRONT_LEVEL} must lie in (0, 1); "
                "front tracking will fail.",
                UserWarning
            )

    @classmethod
    def display(cls):
        """Display current configuration"""
        print("pycascade Configuration:")
        print(f"  Output Dir: {cls.OUTPUT_DIR}")
        print(f"  Log Level: {cls.LOG_LEVEL}")
        print(f"  Log File: {cls.LOG_FILE or '-'}")
        print(f"  Grid Step: {cls.GRID_STEP}")
        print(f"  Front Level: {cls.FRONT_LEVEL}")
        print(f"  Domain Margin: {cls.DOMAIN_MARGIN}")
        print(f"  Max Grid Points: {cls.MAX_GRID_POINTS}")
        print(f"  Tail Tolerance: {cls.TAIL_TOLERANCE}")
        print(f"  Profile Span/Margin: {cls.PROFILE_SPAN}/{cls.PROFILE_MARGIN}")
        print(f"  Node Cap: {cls.NODE_CAP}")
        print(f"  Batch Size: {cls.BATCH_SIZE}")
        print(f"  Block Size: {cls.BLOCK_SIZE}")
        print(f"  Threads: {cls.THREADS}")

    @staticmethod
    def load_file(path: str) -> Dict[str, Any]:
        """Read a KEY=VALUE batch file; keys are normalised to flag names"""
        config_path = Path(path)
        if not config_path.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")

        values = dotenv_values(config_path)
        return {
            key.strip().lower().replace('-', '_'): value
            for key, value in values.items()
            if value is not None
        }


# Validate configuration on import
Config.validate()
