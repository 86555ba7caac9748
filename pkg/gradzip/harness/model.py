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

"""Two layer MLP with analytic gradients, and its federated data."""

import dataclasses

import numpy as np

from gradzip import exc


LAYERS = ("fc1", "fc2")


class ToyModel(object):
    """ReLU MLP ``x -> relu(x W1 + b1) W2 + b2`` with softmax output.

    Layer "fc1" is W1 flattened row-major followed by b1, layer "fc2" is W2
    followed by b2.
    """

    def __init__(self, w1, b1, w2, b2):
        w1, b1, w2, b2 = (np.array(a, dtype=np.float64)
                          for a in (w1, b1, w2, b2))
        if (w1.ndim != 2 or w2.ndim != 2 or b1.shape != (w1.shape[1],)
                or w2.shape[0] != w1.shape[1] or b2.shape != (w2.shape[1],)):
            raise exc.InputError("inconsistent layer shapes %s %s %s %s"
                                 % (w1.shape, b1.shape, w2.shape, b2.shape))
        for array in (w1, b1, w2, b2):
            if not np.all(np.isfinite(array)):
                raise exc.InputError("model parameters must be finite")
        self.w1, self.b1, self.w2, self.b2 = w1, b1, w2, b2

    @classmethod
    def initialize(cls, input_dim, hidden_dim, classes, rng):
        """He-initialized weights, zero biases."""
        w1 = rng.normal(0.0, np.sqrt(2.0 / input_dim),
                        size=(input_dim, hidden_dim))
        w2 = rng.normal(0.0, np.sqrt(2.0 / hidden_dim),
                        size=(hidden_dim, classes))
        return cls(w1, np.zeros(hidden_dim), w2, np.zeros(classes))

    @property
    def dims(self):
        return (self.w1.shape[0], self.w1.shape[1], self.w2.shape[1])

    def layer_sizes(self):
        d, h, c = self.dims
        return {"fc1": d * h + h, "fc2": h * c + c}

    def layers(self):
        return {"fc1": np.concatenate((self.w1.ravel(), self.b1)),
                "fc2": np.concatenate((self.w2.ravel(), self.b2))}

    @classmethod
    def from_layers(cls, layers, dims):
        d, h, c = dims
        fc1 = np.asarray(layers["fc1"], dtype=np.float64)
        fc2 = np.asarray(layers["fc2"], dtype=np.float64)
        if fc1.size != d * h + h or fc2.size != h * c + c:
            raise exc.InputError("layer vectors do not match dims %s"
                                 % (dims,))
        return cls(fc1[:d * h].reshape(d, h), fc1[d * h:],
                   fc2[:h * c].reshape(h, c), fc2[h * c:])

    def copy(self):
        return ToyModel(self.w1, self.b1, self.w2, self.b2)

    def forward(self, x):
        z1 = x @ self.w1 + self.b1
        a1 = np.maximum(z1, 0.0)
        logits = a1 @ self.w2 + self.b2
        return z1, a1, logits

    def probabilities(self, x):
        return _softmax(self.forward(x)[2])

    def loss(self, x, y):
        """Mean softmax cross-entropy."""
        logits = self.forward(x)[2]
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(shifted).sum(axis=1))
        return float(np.mean(log_norm - shifted[np.arange(len(y)), y]))

    def accuracy(self, x, y):
        return float(np.mean(np.argmax(self.forward(x)[2], axis=1) == y))

    def __eq__(self, other):
        if not isinstance(other, ToyModel):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in
                   zip(self.layers().values(), other.layers().values()))

    __hash__ = None


def _softmax(logits):
    shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)


@dataclasses.dataclass(frozen=True)
class ClientDataset(object):
    client_id: int
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if features.ndim != 2 or labels.ndim != 1:
            raise exc.InputError("features must be 2-D and labels 1-D")
        if features.shape[0] != labels.size or labels.size < 1:
            raise exc.InputError("dataset needs as many labels as feature "
                                 "rows, and at least one of each")
        if labels.min() < 0:
            raise exc.InputError("labels must be nonnegative")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.labels.size


def _check_dataset(model, data):
    d, _h, c = model.dims
    if data.features.shape[1] != d:
        raise exc.InputError("dataset has %d features, model expects %d"
                             % (data.features.shape[1], d))
    if data.labels.max() >= c:
        raise exc.InputError("label %d outside the %d classes"
                             % (data.labels.max(), c))


def batch_gradient(model, x, y):
    """Backpropagated gradient of the mean cross-entropy on one batch."""
    z1, a1, logits = model.forward(x)
    delta = _softmax(logits)
    delta[np.arange(len(y)), y] -= 1.0
    delta /= len(y)
    g_w2 = a1.T @ delta
    g_b2 = delta.sum(axis=0)
    delta_hidden = (delta @ model.w2.T) * (z1 > 0.0)
    g_w1 = x.T @ delta_hidden
    g_b1 = delta_hidden.sum(axis=0)
    return {"fc1": np.concatenate((g_w1.ravel(), g_b1)),
            "fc2": np.concatenate((g_w2.ravel(), g_b2))}


def local_gradient(model, data, batch_size=0):
    """Averaged local gradient of one client, per layer.

    :param batch_size: 0 for one gradient over the whole shard, otherwise
                       the average of the gradients of consecutive
                       minibatches of this size (the last may be smaller)
    :raises InputError: on shape mismatch between model and data
    """
    _check_dataset(model, data)
    if batch_size <= 0 or batch_size >= len(data):
        return batch_gradient(model, data.features, data.labels)
    gradients = [batch_gradient(model, data.features[i:i + batch_size],
                                data.labels[i:i + batch_size])
                 for i in range(0, len(data), batch_size)]
    return aggregate(gradients)


def aggregate(gradients):
    """Unweighted mean over users of per-layer gradient vectors."""
    if not gradients:
        raise exc.InputError("nothing to aggregate")
    names = set(gradients[0])
    for gradient in gradients:
        if set(gradient) != names:
            raise exc.InputError("users report different layers")
    result = {}
    for name in gradients[0]:
        stacked = [np.asarray(g[name], dtype=np.float64) for g in gradients]
        if any(s.shape != stacked[0].shape for s in stacked):
            raise exc.InputError("layer %s has different shapes" % name)
        result[name] = np.mean(stacked, axis=0)
    return result


def update(model, aggregated, learning_rate):
    """Gradient step ``w - learning_rate * g`` as a new model."""
    if not learning_rate > 0:
        raise exc.ParameterError("learning rate must be positive, got %r"
                                 % learning_rate)
    layers = model.layers()
    if set(aggregated) != set(layers):
        raise exc.InputError("gradient layers %s do not match model layers"
                             % sorted(aggregated))
    stepped = {}
    for name, weights in layers.items():
        gradient = np.asarray(aggregated[name], dtype=np.float64)
        if gradient.shape != weights.shape:
            raise exc.InputError("gradient of %s has shape %s, expected %s"
                                 % (name, gradient.shape, weights.shape))
        stepped[name] = weights - learning_rate * gradient
    return ToyModel.from_layers(stepped, model.dims)


def make_blobs(classes, input_dim, count, centers, rng):
    labels = rng.integers(0, classes, size=count)
    features = centers[labels] + rng.normal(size=(count, input_dim))
    return features, labels


def blob_task(users, samples_per_user, test_samples, input_dim, classes,
              separation, rng):
    """Gaussian class blobs split IID over users, plus a test set.

    Every class mean is a random direction scaled to ``separation``.
    """
    directions = rng.normal(size=(classes, input_dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    centers = directions * separation
    features, labels = make_blobs(classes, input_dim,
                                  users * samples_per_user, centers, rng)
    order = rng.permutation(labels.size)
    shards = np.array_split(order, users)
    clients = [ClientDataset(u, features[idx], labels[idx])
               for u, idx in enumerate(shards)]
    test_x, test_y = make_blobs(classes, input_dim, test_samples, centers,
                                rng)
    return clients, ClientDataset(-1, test_x, test_y)
