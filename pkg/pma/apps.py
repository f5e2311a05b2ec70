from django.apps import AppConfig


class PmaConfig(AppConfig):
    name = "pma"
    verbose_name = "Behavior planning"
