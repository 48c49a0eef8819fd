"""
APNC Relay Simulator Version Management
"""

__version__ = "1.0.0"
__version_info__ = (1, 0, 0)
__license__ = "MIT"

# Release Information
RELEASE_NAME = "Baseline"
RELEASE_DATE = "2026-10-19"
BUILD_NUMBER = "1000"

# Platform Information
PLATFORM_NAME = "APNC Relay Simulator"
PLATFORM_TAGLINE = "Misalignment estimation and XOR decoding for RRC-shaped two-way relaying"
ORGANIZATION = "APNC Relay Contributors"

# Feature Flags
FEATURES = {
    'baud_rate_estimator': True,
    'double_baud_rate_estimator': True,
    'baud_rate_decoder': True,
    'double_baud_rate_decoder': True,
    'xor_cd_ldpc': True,
    'rayleigh_fading': True,
}


def get_version_info():
    """Get detailed version information."""
    return {
        'version': __version__,
        'version_info': __version_info__,
        'release_name': RELEASE_NAME,
        'release_date': RELEASE_DATE,
        'build_number': BUILD_NUMBER,
        'organization': ORGANIZATION,
        'license': __license__,
    }
