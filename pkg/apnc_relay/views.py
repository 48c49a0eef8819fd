"""
APNC Relay Simulator - Info Views
"""

from django.conf import settings
from django.http import JsonResponse

from .version import get_version_info, PLATFORM_NAME, PLATFORM_TAGLINE, FEATURES


def health_check(request):
    """Health check endpoint with version information."""
    version_info = get_version_info()
    return JsonResponse({
        'status': 'healthy',
        'service': 'apnc-relay',
        'version': version_info['version'],
        'build': version_info['build_number'],
        'release': version_info['release_name'],
    })


def home_api(request):
    """
    API endpoint for system information
    """
    version_info = get_version_info()

    return JsonResponse({
        'service': PLATFORM_NAME,
        'description': PLATFORM_TAGLINE,
        'version': version_info['version'],
        'build': version_info['build_number'],
        'release': version_info['release_name'],
        'status': 'operational',
        'organization': version_info['organization'],
        'license': version_info['license'],
        'features': FEATURES,
        'endpoints': {
            'experiments': '/api/v1/experiments/',
            'admin': f'/{settings.ADMIN_URL}',
            'health': '/health/',
        }
    })
