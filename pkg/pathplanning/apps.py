from django.apps import AppConfig


class PathplanningConfig(AppConfig):
    name = "pathplanning"
