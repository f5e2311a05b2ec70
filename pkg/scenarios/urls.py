from django.urls import path
from .views import ScenarioViewSet

urlpatterns = [
    # Check a scenario without running it
    path('validate/',
         ScenarioViewSet.as_view({'post': 'validate'}),
         name='scenario-validate'),

    # Run a scenario to global success or failure
    path('run/',
         ScenarioViewSet.as_view({'post': 'run'}),
         name='scenario-run'),
]
