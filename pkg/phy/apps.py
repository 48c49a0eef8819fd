from django.apps import AppConfig


class PhyConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'phy'
    verbose_name = 'Physical layer'
