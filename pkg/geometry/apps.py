from django.apps import AppConfig


class GeometryConfig(AppConfig):
    name = "geometry"
    verbose_name = "Workspace geometry and grids"
