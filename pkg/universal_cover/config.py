"""Runtime settings read from the environment (and .env via python-dotenv)"""
import os
from dataclasses import dataclass
from typing import Optional

from universal_cover.errors import InvalidInputError

SFM_METHODS = ('auto', 'wolfe', 'brute')
LP_BACKENDS = ('simplex', 'highs')


@dataclass(frozen=True)
class Settings:
    """Tunables shared by the solvers and the CLI"""
    log_file: Optional[str] = None
    sfm_method: str = 'auto'
    brute_cutoff: int = 8
    lp_backend: str = 'simplex'
    dump_lp_dir: Optional[str] = None
    saa_cap: int = 1_000_000
    mc_samples: int = 100_000

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from UNIVERSAL_COVER_* environment variables"""
        sfm_method = os.getenv('UNIVERSAL_COVER_SFM_METHOD', 'auto').lower()
        if sfm_method not in SFM_METHODS:
            raise InvalidInputError(f"UNIVERSAL_COVER_SFM_METHOD must be one of {SFM_METHODS}, got '{sfm_method}'")
        lp_backend = os.getenv('UNIVERSAL_COVER_LP_BACKEND', 'simplex').lower()
        if lp_backend not in LP_BACKENDS:
            raise InvalidInputError(f"UNIVERSAL_COVER_LP_BACKEND must be one of {LP_BACKENDS}, got '{lp_backend}'")
        try:
            return cls(
                log_file=os.getenv('UNIVERSAL_COVER_LOG_FILE'),
                sfm_method=sfm_method,
                brute_cutoff=int(os.getenv('UNIVERSAL_COVER_BRUTE_CUTOFF', '8')),
                lp_backend=lp_backend,
                dump_lp_dir=os.getenv('UNIVERSAL_COVER_DUMP_LP') or None,
                saa_cap=int(os.getenv('UNIVERSAL_COVER_SAA_CAP', '1000000')),
                mc_samples=int(os.getenv('UNIVERSAL_COVER_MC_SAMPLES', '100000')),
            )
        except ValueError as e:
            raise InvalidInputError(f"Invalid numeric setting: {e}")


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, read from the environment on first use"""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def set_settings(settings: Optional[Settings]) -> None:
    """Replace (or with None, reset) the process-wide settings"""
    global _settings
    _settings = settings
