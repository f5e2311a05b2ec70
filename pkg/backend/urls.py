"""
URL configuration for the relocation simulator.

The `urlpatterns` list routes URLs to views. For more information please see:
    https://docs.djangoproject.com/en/5.2/topics/http/urls/
"""

from django.urls import path, include

urlpatterns = [
    # API Endpoints
    path('api/scenarios/', include('scenarios.urls')),
]
