# Copyright 2026 gradzip developers.
# All Rights Reserved.
#
#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

import math

import ddt
import numpy as np

from gradzip import exc
from gradzip.harness import model as modellib
from gradzip.tests import test


def make_case(seed=0, n=8, dims=(4, 5, 3)):
    rng = np.random.default_rng(seed)
    d, _h, c = dims
    model = modellib.ToyModel.initialize(*dims, rng=rng)
    # nonzero biases keep the hidden pre-activations away from the kink
    model = modellib.ToyModel(model.w1, rng.normal(size=dims[1]) * 0.1,
                              model.w2, rng.normal(size=c) * 0.1)
    data = modellib.ClientDataset(0, rng.normal(size=(n, d)),
                                  rng.integers(0, c, size=n))
    return model, data


class ToyModelTestCase(test.TestCase):

    def test_layers_round_trip(self):
        model, _ = make_case()
        self.assertEqual({"fc1": 25, "fc2": 18}, model.layer_sizes())
        layers = model.layers()
        self.assertEqual(25, layers["fc1"].size)
        self.assertEqual(model,
                         modellib.ToyModel.from_layers(layers, model.dims))

    def test_from_layers_size_mismatch(self):
        model, _ = make_case()
        layers = model.layers()
        layers["fc2"] = layers["fc2"][:-1]
        self.assertRaises(exc.InputError, modellib.ToyModel.from_layers,
                          layers, model.dims)

    def test_invalid(self):
        self.assertRaises(exc.InputError, modellib.ToyModel, np.zeros((2, 3)),
                          np.zeros(2), np.zeros((3, 2)), np.zeros(2))
        self.assertRaises(exc.InputError, modellib.ToyModel,
                          np.full((2, 3), np.nan), np.zeros(3),
                          np.zeros((3, 2)), np.zeros(2))

    def test_uniform_logits(self):
        model = modellib.ToyModel(np.zeros((4, 5)), np.zeros(5),
                                  np.zeros((5, 3)), np.zeros(3))
        _, data = make_case()
        self.assertAlmostEqual(math.log(3.0),
                               model.loss(data.features, data.labels),
                               delta=1e-12)
        self.assertAllClose(np.full((8, 3), 1.0 / 3.0),
                            model.probabilities(data.features), rtol=1e-12)

    def test_accuracy(self):
        model = modellib.ToyModel(np.eye(2), np.zeros(2), np.eye(2),
                                  np.zeros(2))
        x = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 1.0], [0.0, 3.0]])
        self.assertEqual(0.75, model.accuracy(x, np.array([0, 1, 1, 1])))


@ddt.ddt
class GradientTestCase(test.TestCase):

    @ddt.data(0, 1, 2)
    def test_finite_differences(self, seed):
        model, data = make_case(seed)
        gradient = modellib.local_gradient(model, data)
        layers = model.layers()
        eps = 1e-6
        for name in modellib.LAYERS:
            numeric = np.empty_like(layers[name])
            for i in range(layers[name].size):
                plus = {k: v.copy() for k, v in layers.items()}
                minus = {k: v.copy() for k, v in layers.items()}
                plus[name][i] += eps
                minus[name][i] -= eps
                numeric[i] = (
                    modellib.ToyModel.from_layers(plus, model.dims).loss(
                        data.features, data.labels)
                    - modellib.ToyModel.from_layers(minus, model.dims).loss(
                        data.features, data.labels)) / (2 * eps)
            self.assertAllClose(numeric, gradient[name], rtol=1e-5,
                                atol=1e-8)

    def test_output_bias_gradient_sums_to_zero(self):
        model, data = make_case()
        g_b2 = modellib.local_gradient(model, data)["fc2"][-3:]
        self.assertAlmostEqual(0.0, g_b2.sum(), delta=1e-12)

    def test_duplicated_samples(self):
        model, data = make_case()
        doubled = modellib.ClientDataset(
            0, np.concatenate((data.features, data.features)),
            np.concatenate((data.labels, data.labels)))
        single = modellib.local_gradient(model, data)
        double = modellib.local_gradient(model, doubled)
        for name in modellib.LAYERS:
            self.assertAllClose(single[name], double[name], rtol=1e-12,
                                atol=1e-15)

    def test_minibatch_average(self):
        model, data = make_case()
        full = modellib.local_gradient(model, data)
        halves = modellib.local_gradient(model, data, batch_size=4)
        whole = modellib.local_gradient(model, data, batch_size=8)
        for name in modellib.LAYERS:
            self.assertAllClose(full[name], halves[name], rtol=1e-12,
                                atol=1e-15)
            self.assertArrayEqual(full[name], whole[name])

    def test_uneven_minibatches(self):
        model, data = make_case()
        gradient = modellib.local_gradient(model, data, batch_size=3)
        parts = [modellib.batch_gradient(model, data.features[i:i + 3],
                                         data.labels[i:i + 3])
                 for i in (0, 3, 6)]
        for name in modellib.LAYERS:
            self.assertAllClose(np.mean([p[name] for p in parts], axis=0),
                                gradient[name], rtol=1e-12)

    def test_dataset_mismatch(self):
        model, _ = make_case()
        wide = modellib.ClientDataset(0, np.zeros((3, 5)), [0, 1, 2])
        self.assertRaises(exc.InputError, modellib.local_gradient, model,
                          wide)
        labels = modellib.ClientDataset(0, np.zeros((2, 4)), [0, 3])
        self.assertRaises(exc.InputError, modellib.local_gradient, model,
                          labels)


class ServerTestCase(test.TestCase):

    def test_aggregate(self):
        result = modellib.aggregate([{"fc1": [1.0, 2.0], "fc2": [0.0]},
                                     {"fc1": [3.0, 6.0], "fc2": [1.0]}])
        self.assertArrayEqual([2.0, 4.0], result["fc1"])
        self.assertArrayEqual([0.5], result["fc2"])

    def test_aggregate_errors(self):
        self.assertRaises(exc.InputError, modellib.aggregate, [])
        self.assertRaises(exc.InputError, modellib.aggregate,
                          [{"fc1": [1.0]}, {"fc2": [1.0]}])
        self.assertRaises(exc.InputError, modellib.aggregate,
                          [{"fc1": [1.0]}, {"fc1": [1.0, 2.0]}])

    def test_update(self):
        model, data = make_case()
        gradient = modellib.local_gradient(model, data)
        stepped = modellib.update(model, gradient, 0.5)
        for name, weights in model.layers().items():
            self.assertAllClose(weights - 0.5 * gradient[name],
                                stepped.layers()[name], rtol=1e-15)

    def test_small_step_lowers_loss(self):
        model, data = make_case()
        gradient = modellib.local_gradient(model, data)
        stepped = modellib.update(model, gradient, 1e-3)
        self.assertLess(stepped.loss(data.features, data.labels),
                        model.loss(data.features, data.labels))

    def test_update_errors(self):
        model, data = make_case()
        gradient = modellib.local_gradient(model, data)
        self.assertRaises(exc.ParameterError, modellib.update, model,
                          gradient, 0.0)
        self.assertRaises(exc.InputError, modellib.update, model,
                          {"fc1": gradient["fc1"]}, 0.1)
        gradient["fc2"] = gradient["fc2"][:-1]
        self.assertRaises(exc.InputError, modellib.update, model, gradient,
                          0.1)


class BlobTaskTestCase(test.TestCase):

    def _task(self, seed):
        return modellib.blob_task(3, 10, 7, 4, 2, 3.0,
                                  np.random.default_rng(seed))

    def test_shapes(self):
        clients, test_set = self._task(0)
        self.assertEqual(3, len(clients))
        self.assertEqual(30, sum(len(c) for c in clients))
        self.assertEqual([0, 1, 2], [c.client_id for c in clients])
        self.assertEqual((7, 4), test_set.features.shape)
        for client in clients:
            self.assertTrue(np.all(client.labels < 2))

    def test_deterministic(self):
        first, first_test = self._task(5)
        second, second_test = self._task(5)
        for a, b in zip(first, second):
            self.assertArrayEqual(a.features, b.features)
            self.assertArrayEqual(a.labels, b.labels)
        self.assertArrayEqual(first_test.features, second_test.features)

    def test_dataset_validation(self):
        self.assertRaises(exc.InputError, modellib.ClientDataset, 0,
                          np.zeros(3), [0, 1, 0])
        self.assertRaises(exc.InputError, modellib.ClientDataset, 0,
                          np.zeros((3, 2)), [0, 1])
        self.assertRaises(exc.InputError, modellib.ClientDataset, 0,
                          np.zeros((1, 2)), [-1])
