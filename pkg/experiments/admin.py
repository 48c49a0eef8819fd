from django.contrib import admin
from .models import ExperimentRun, MetricsEntry


class MetricsEntryInline(admin.TabularInline):
    model = MetricsEntry
    extra = 0
    fields = ('solution', 'ebn0', 'L', 'mse_tau', 'ser', 'per', 'good_estimate_rate', 'trials_run', 'wall_time')
    readonly_fields = fields


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'scenario', 'solution', 'seed', 'status', 'created_at')
    list_filter = ('scenario', 'solution', 'status', 'created_at')
    search_fields = ('id', 'output_dir')
    readonly_fields = ('id', 'created_at', 'updated_at', 'completed_at')
    inlines = [MetricsEntryInline]

    fieldsets = (
        ('Run Info', {
            'fields': ('id', 'status', 'scenario', 'solution', 'seed', 'created_at', 'updated_at', 'completed_at')
        }),
        ('Configuration', {
            'fields': ('config', 'output_dir')
        }),
        ('Errors', {
            'fields': ('failure_reason',)
        }),
    )


@admin.register(MetricsEntry)
class MetricsEntryAdmin(admin.ModelAdmin):
    list_display = ('run', 'solution', 'ebn0', 'L', 'mse_tau', 'ser', 'per', 'trials_run')
    list_filter = ('solution', 'L')
    search_fields = ('run__id',)
