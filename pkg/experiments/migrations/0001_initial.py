# Generated by Django 4.2.16 on 2026-10-19 09:12

from django.db import migrations, models
import django.db.models.deletion
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('scenario', models.CharField(choices=[('estimator_mse', 'Estimator MSE'), ('estimator_pdf', 'Estimator square-error PDF'), ('decoder_ser_awgn', 'Decoder SER (AWGN)'), ('decoder_per_rayleigh', 'Decoder PER (Rayleigh)'), ('truncation_sweep', 'Truncation sweep')], max_length=30)),
                ('solution', models.CharField(choices=[('I', 'Baud estimator, baud decoder'), ('II', 'Double estimator, baud decoder'), ('III', 'Baud estimator, double decoder'), ('IV', 'Double estimator, double decoder'), ('exact_tau', 'Exact offsets')], max_length=20)),
                ('config', models.JSONField(blank=True, default=dict)),
                ('seed', models.BigIntegerField(default=0)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('failure_reason', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'db_table': 'experiment_runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['scenario', 'solution'], name='experiment__scenari_5c1d2e_idx'), models.Index(fields=['status'], name='experiment__status_8a4f71_idx'), models.Index(fields=['created_at'], name='experiment__created_3b9e0c_idx')],
            },
        ),
        migrations.CreateModel(
            name='MetricsEntry',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('solution', models.CharField(choices=[('I', 'Baud estimator, baud decoder'), ('II', 'Double estimator, baud decoder'), ('III', 'Baud estimator, double decoder'), ('IV', 'Double estimator, double decoder'), ('exact_tau', 'Exact offsets')], max_length=20)),
                ('ebn0', models.FloatField()),
                ('L', models.PositiveIntegerField()),
                ('mse_tau', models.FloatField(blank=True, null=True)),
                ('ser', models.FloatField(blank=True, null=True)),
                ('per', models.FloatField(blank=True, null=True)),
                ('good_estimate_rate', models.FloatField(blank=True, null=True)),
                ('trials_run', models.PositiveIntegerField(default=0)),
                ('wall_time', models.FloatField(default=0.0)),
                ('histogram', models.JSONField(blank=True, default=list)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='metrics', to='experiments.experimentrun')),
            ],
            options={
                'db_table': 'experiment_metrics',
                'ordering': ['run', 'solution', 'L', 'ebn0'],
            },
        ),
    ]
