import uuid

from django.test import TestCase
from django.urls import reverse
from rest_framework.test import APIClient

from experiments.models import ExperimentRun
from experiments.services.harness import ExperimentConfig, MetricsRecord
from experiments.services.runs import complete_run, fail_run, start_run


def record(solution='IV', ebn0=10.0, histogram=None):
    return MetricsRecord(
        scenario='estimator_pdf', solution=solution, beta=0.5, Q=31, G=10, d=4, L=4, N=64,
        ebn0=ebn0, mse_tau=2e-5, ser=None, per=None, good_estimate_rate=0.9, trials=100, seed=0,
        histogram=histogram, wall_time=1.5,
    )


class ExperimentApiTests(TestCase):

    def setUp(self):
        self.client = APIClient()
        config = ExperimentConfig(scenario='estimator_pdf', trials=100)
        self.run = start_run(config, '/tmp/results')
        complete_run(self.run, [record(ebn0=0.0, histogram=((0.0, 0.01, 100.0),)), record(ebn0=10.0)])

    def test_list_runs(self):
        response = self.client.get(reverse('experiments:run_list'))
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['count'], 1)
        item = response.data['results'][0]
        self.assertEqual(item['id'], str(self.run.id))
        self.assertEqual(item['status'], 'completed')
        self.assertEqual(item['scenario'], 'estimator_pdf')

    def test_list_filters(self):
        other = start_run(ExperimentConfig(scenario='estimator_mse', solution='I'))
        fail_run(other, 'interrupted')
        response = self.client.get(reverse('experiments:run_list'), {'status': 'failed'})
        self.assertEqual(response.data['count'], 1)
        self.assertEqual(response.data['results'][0]['solution'], 'I')
        response = self.client.get(reverse('experiments:run_list'), {'scenario': 'estimator_pdf'})
        self.assertEqual(response.data['count'], 1)

    def test_run_detail(self):
        response = self.client.get(reverse('experiments:run_detail', args=[self.run.id]))
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['config']['scenario'], 'estimator_pdf')
        metrics = response.data['metrics']
        self.assertEqual([m['ebn0'] for m in metrics], [0.0, 10.0])
        self.assertEqual(metrics[0]['histogram'], [[0.0, 0.01, 100.0]])
        self.assertEqual(metrics[1]['trials'], 100)
        self.assertNotIn('failure_reason', response.data)

    def test_failed_run_reports_reason(self):
        other = start_run(ExperimentConfig(scenario='estimator_mse'))
        fail_run(other, 'covariance not positive definite')
        response = self.client.get(reverse('experiments:run_detail', args=[other.id]))
        self.assertEqual(response.data['status'], 'failed')
        self.assertEqual(response.data['failure_reason'], 'covariance not positive definite')
        self.assertEqual(response.data['metrics'], [])

    def test_unknown_run(self):
        response = self.client.get(reverse('experiments:run_detail', args=[uuid.uuid4()]))
        self.assertEqual(response.status_code, 404)


class ExperimentRunModelTests(TestCase):

    def test_completion_timestamp(self):
        run = ExperimentRun.objects.create(scenario='estimator_mse', solution='I')
        self.assertIsNone(run.completed_at)
        self.assertFalse(run.is_finished)
        run.status = 'completed'
        run.save()
        self.assertIsNotNone(run.completed_at)
        self.assertTrue(run.is_finished)
        self.assertIn('estimator_mse/I', str(run))


class HealthCheckTests(TestCase):

    def test_health(self):
        response = self.client.get('/health/')
        self.assertEqual(response.status_code, 200)

    def test_home_describes_the_service(self):
        response = self.client.get('/api/')
        self.assertEqual(response.status_code, 200)
        body = response.json()
        self.assertEqual(body['service'], 'APNC Relay Simulator')
        self.assertIn('XOR decoding', body['description'])
        self.assertEqual(body['license'], 'MIT')
        self.assertTrue(body['features']['xor_cd_ldpc'])
