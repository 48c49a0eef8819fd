"""
Experiment URLs
"""

from django.urls import path
from . import views

app_name = 'experiments'

urlpatterns = [
    path('', views.ExperimentRunListView.as_view(), name='run_list'),
    path('<uuid:run_id>/', views.ExperimentRunDetailView.as_view(), name='run_detail'),
]
