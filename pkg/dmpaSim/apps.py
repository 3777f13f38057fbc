from django.apps import AppConfig


class DmpasimConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dmpaSim'
    verbose_name = 'DMPA conditional dynamics'
