"""
APNC Relay Simulator - Main URL Configuration
"""

from django.contrib import admin
from django.urls import path, include
from django.conf import settings

from .views import health_check, home_api

urlpatterns = [
    path('api/', home_api, name='home_api'),

    # Admin
    path(f'{settings.ADMIN_URL}', admin.site.urls),

    # Health check
    path('health/', health_check, name='health_check'),

    # Experiment results (read-only)
    path('api/v1/experiments/', include('experiments.urls')),
]
