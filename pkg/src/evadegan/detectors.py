"""Black-box traffic detectors: seven classic classifiers behind one interface.

Every model is trained from scratch on encoded [0,1] vectors with binary
labels (0 = normal, 1 = attack), is deterministic under a fixed seed, and
predicts record-by-record (batch composition never changes a prediction).
Vote ties break toward "attack": the conservative call for a detector.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import nn
from .blob import load_blob, save_blob

LABEL_NORMAL = 0
LABEL_ATTACK = 1

ALGORITHMS = ("svm", "nb", "mlp", "lr", "dt", "rf", "knn")

DEFAULT_HYPERPARAMS = {
    "svm": {"lam": 1e-4, "learning_rate": 0.5, "epochs": 10, "batch_size": 256},
    "nb": {"var_floor": 1e-9},
    "mlp": {"hidden": (64, 32), "learning_rate": 1e-3, "epochs": 20, "batch_size": 64},
    "lr": {"learning_rate": 0.1, "epochs": 50, "batch_size": 256},
    "dt": {"max_depth": 12, "min_leaf": 5},
    "rf": {"n_trees": 30, "max_depth": 12, "min_leaf": 5, "features_per_split": 6},
    "knn": {"k": 5, "max_reference": 20000},
}

MODEL_FORMAT_VERSION = 1


class SingleClassData(ValueError):
    """Raised when training data contains only one class."""


class SchemaMismatch(ValueError):
    """Raised when vectors were encoded under a different schema."""


class UnknownAlgorithm(ValueError):
    pass


class ClassifierModel:
    """Shared surface: algorithm tag, hyperparams, seed, schema fingerprint."""

    algorithm = None

    def __init__(self, hyperparams, seed, schema_fingerprint=None):
        self.hyperparams = dict(hyperparams)
        self.seed = int(seed)
        self.schema_fingerprint = schema_fingerprint

    def fit(self, X, y, rng):
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def _check_input(self, X, n_features):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != n_features:
            raise SchemaMismatch(f"expected (n, {n_features}) vectors, got {X.shape}")
        return X

    # checkpoint plumbing
    def _arrays(self) -> dict:
        raise NotImplementedError

    def _load_arrays(self, arrays) -> None:
        raise NotImplementedError

    def manifest(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "algorithm": self.algorithm,
            "hyperparams": _jsonable(self.hyperparams),
            "seed": self.seed,
            "schema_fingerprint": self.schema_fingerprint,
        }

    def save(self, path) -> None:
        save_blob(path, self._arrays(), meta=self.manifest())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (tuple, list)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _to_signed(y):
    """{0,1} labels -> {-1,+1} with attack = +1."""
    return np.where(np.asarray(y) == LABEL_ATTACK, 1.0, -1.0)


class LinearSVM(ClassifierModel):
    """Linear SVM: constant-step subgradient descent on the L2-regularized hinge."""

    algorithm = "svm"

    def fit(self, X, y, rng):
        X = np.asarray(X, dtype=float)
        ys = _to_signed(y)
        n, d = X.shape
        lam = self.hyperparams["lam"]
        lr = self.hyperparams["learning_rate"]
        batch = min(self.hyperparams["batch_size"], n)
        self.w = np.zeros(d)
        self.b = 0.0
        for _ in range(self.hyperparams["epochs"]):
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                xb, yb = X[idx], ys[idx]
                viol = yb * (xb @ self.w + self.b) < 1.0
                grad_w = lam * self.w
                grad_b = 0.0
                if viol.any():
                    grad_w = grad_w - (yb[viol, None] * xb[viol]).sum(axis=0) / len(idx)
                    grad_b = -yb[viol].sum() / len(idx)
                self.w -= lr * grad_w
                self.b -= lr * grad_b
        return self

    def decision_scores(self, X) -> np.ndarray:
        X = self._check_input(X, self.w.shape[0])
        return X @ self.w + self.b

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_scores(X) >= 0.0, LABEL_ATTACK, LABEL_NORMAL)

    def _arrays(self):
        return {"w": self.w, "b": np.array([self.b])}

    def _load_arrays(self, arrays):
        self.w = arrays["w"]
        self.b = float(arrays["b"][0])


class GaussianNB(ClassifierModel):
    """Gaussian Naive Bayes with a variance floor, computed in log domain."""

    algorithm = "nb"

    def fit(self, X, y, rng):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        floor = self.hyperparams["var_floor"]
        self.mean = np.zeros((2, X.shape[1]))
        self.var = np.zeros((2, X.shape[1]))
        self.log_prior = np.zeros(2)
        for c in (LABEL_NORMAL, LABEL_ATTACK):
            Xc = X[y == c]
            self.mean[c] = Xc.mean(axis=0)
            self.var[c] = np.maximum(Xc.var(axis=0), floor)
            self.log_prior[c] = np.log(len(Xc) / len(X))
        return self

    def log_posteriors(self, X) -> np.ndarray:
        X = self._check_input(X, self.mean.shape[1])
        out = np.zeros((X.shape[0], 2))
        for c in (LABEL_NORMAL, LABEL_ATTACK):
            diff = X - self.mean[c]
            out[:, c] = self.log_prior[c] - 0.5 * (
                np.log(2.0 * np.pi * self.var[c]) + diff * diff / self.var[c]
            ).sum(axis=1)
        return out

    def predict(self, X) -> np.ndarray:
        lp = self.log_posteriors(X)
        return np.where(lp[:, LABEL_ATTACK] >= lp[:, LABEL_NORMAL], LABEL_ATTACK, LABEL_NORMAL)

    def _arrays(self):
        return {"mean": self.mean, "var": self.var, "log_prior": self.log_prior}

    def _load_arrays(self, arrays):
        self.mean = arrays["mean"]
        self.var = arrays["var"]
        self.log_prior = arrays["log_prior"]


class MlpClassifier(ClassifierModel):
    """Two-hidden-layer ReLU net with softmax cross-entropy, RMSProp-trained."""

    algorithm = "mlp"

    def fit(self, X, y, rng):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        n, d = X.shape
        hidden = tuple(self.hyperparams["hidden"])
        self.net = nn.Network((d, *hidden, 2), rng)
        opt = nn.RmsProp(learning_rate=self.hyperparams["learning_rate"])
        batch = min(self.hyperparams["batch_size"], n)
        for _ in range(self.hyperparams["epochs"]):
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                logits = self.net.forward(X[idx])
                probs = _softmax(logits)
                grad = probs.copy()
                grad[np.arange(len(idx)), y[idx]] -= 1.0
                grad /= len(idx)
                self.net.zero_grad()
                self.net.backward(grad)
                opt.step(self.net.parameters())
        return self

    def predict(self, X) -> np.ndarray:
        X = self._check_input(X, self.net.dims[0])
        logits = self.net.forward(X, cache=False)
        return np.where(
            logits[:, LABEL_ATTACK] >= logits[:, LABEL_NORMAL], LABEL_ATTACK, LABEL_NORMAL
        )

    def _arrays(self):
        return self.net.param_arrays()

    def _load_arrays(self, arrays):
        d = arrays["w0"].shape[1]
        hidden = tuple(self.hyperparams["hidden"])
        self.net = nn.Network((d, *hidden, 2), nn.make_rng(0))
        self.net.load_param_arrays(arrays)


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class LogisticRegression(ClassifierModel):
    """Plain logistic regression via shuffled mini-batch gradient descent."""

    algorithm = "lr"

    def fit(self, X, y, rng):
        X = np.asarray(X, dtype=float)
        y01 = np.asarray(y, dtype=float)
        n, d = X.shape
        lr = self.hyperparams["learning_rate"]
        batch = min(self.hyperparams["batch_size"], n)
        self.w = np.zeros(d)
        self.b = 0.0
        for _ in range(self.hyperparams["epochs"]):
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                p = _sigmoid(X[idx] @ self.w + self.b)
                err = p - y01[idx]
                self.w -= lr * (X[idx].T @ err) / len(idx)
                self.b -= lr * err.mean()
        return self

    def decision_scores(self, X) -> np.ndarray:
        X = self._check_input(X, self.w.shape[0])
        return X @ self.w + self.b

    def predict(self, X) -> np.ndarray:
        # p >= 0.5 iff the affine score is >= 0
        return np.where(self.decision_scores(X) >= 0.0, LABEL_ATTACK, LABEL_NORMAL)

    def _arrays(self):
        return {"w": self.w, "b": np.array([self.b])}

    def _load_arrays(self, arrays):
        self.w = arrays["w"]
        self.b = float(arrays["b"][0])


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class _TreeArrays:
    """Flat array representation of one fitted CART tree."""

    __slots__ = ("feature", "threshold", "left", "right", "leaf_label")

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.leaf_label = []

    def add_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_label.append(-1)
        return len(self.feature) - 1

    def freeze(self):
        self.feature = np.asarray(self.feature, dtype=int)
        self.threshold = np.asarray(self.threshold, dtype=float)
        self.left = np.asarray(self.left, dtype=int)
        self.right = np.asarray(self.right, dtype=int)
        self.leaf_label = np.asarray(self.leaf_label, dtype=int)
        return self


def _gini_counts(n_attack, n_total):
    """Gini impurity from attack counts; n_total may be an array."""
    with np.errstate(invalid="ignore", divide="ignore"):
        p = n_attack / n_total
        g = 1.0 - p * p - (1.0 - p) * (1.0 - p)
    return np.where(n_total > 0, g, 0.0)


def _best_split(X, y, feature_ids, min_leaf):
    """Best (feature, threshold, gain) over candidate features, or None."""
    n = len(y)
    parent_gini = _gini_counts(y.sum(), n)
    best = None
    for f in feature_ids:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sorted_col = col[order]
        sorted_y = y[order]
        attack_left = np.cumsum(sorted_y)[:-1]
        n_left = np.arange(1, n)
        boundary = sorted_col[1:] != sorted_col[:-1]
        valid = boundary & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        n_right = n - n_left
        gini_l = _gini_counts(attack_left, n_left)
        gini_r = _gini_counts(y.sum() - attack_left, n_right)
        child = (n_left * gini_l + n_right * gini_r) / n
        gain = np.where(valid, parent_gini - child, -np.inf)
        pos = int(np.argmax(gain))
        if gain[pos] <= 1e-12:
            continue
        threshold = 0.5 * (sorted_col[pos] + sorted_col[pos + 1])
        if best is None or gain[pos] > best[2]:
            best = (int(f), float(threshold), float(gain[pos]))
    return best


def _leaf_label(y):
    n_attack = int(y.sum())
    # ties go to attack
    return LABEL_ATTACK if n_attack * 2 >= len(y) else LABEL_NORMAL


def _grow_tree(X, y, max_depth, min_leaf, feature_rng=None, features_per_split=None):
    tree = _TreeArrays()

    def grow(rows, depth):
        node = tree.add_node()
        sub_y = y[rows]
        if (
            depth >= max_depth
            or len(rows) < 2 * min_leaf
            or sub_y.min() == sub_y.max()
        ):
            tree.leaf_label[node] = _leaf_label(sub_y)
            return node
        if feature_rng is not None:
            feats = np.sort(
                feature_rng.choice(X.shape[1], size=features_per_split, replace=False)
            )
        else:
            feats = np.arange(X.shape[1])
        split = _best_split(X[rows], sub_y, feats, min_leaf)
        if split is None:
            tree.leaf_label[node] = _leaf_label(sub_y)
            return node
        f, thr, _ = split
        go_left = X[rows, f] <= thr
        left = grow(rows[go_left], depth + 1)
        right = grow(rows[~go_left], depth + 1)
        tree.feature[node] = f
        tree.threshold[node] = thr
        tree.left[node] = left
        tree.right[node] = right
        return node

    grow(np.arange(len(y)), 0)
    return tree.freeze()


def _tree_predict(tree, X):
    idx = np.zeros(X.shape[0], dtype=int)
    while True:
        internal = tree.leaf_label[idx] < 0
        if not internal.any():
            break
        at = idx[internal]
        go_left = X[internal, tree.feature[at]] <= tree.threshold[at]
        idx[internal] = np.where(go_left, tree.left[at], tree.right[at])
    return tree.leaf_label[idx]


class DecisionTree(ClassifierModel):
    """CART with Gini impurity, depth and leaf-size limits."""

    algorithm = "dt"

    def fit(self, X, y, rng):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.n_features = X.shape[1]
        self.tree = _grow_tree(
            X, y, self.hyperparams["max_depth"], self.hyperparams["min_leaf"]
        )
        return self

    def predict(self, X) -> np.ndarray:
        X = self._check_input(X, self.n_features)
        return _tree_predict(self.tree, X)

    def _arrays(self):
        return _tree_to_arrays(self.tree, prefix="t") | {
            "n_features": np.array([self.n_features])
        }

    def _load_arrays(self, arrays):
        self.tree = _tree_from_arrays(arrays, prefix="t")
        self.n_features = int(arrays["n_features"][0])


def _tree_to_arrays(tree, prefix):
    return {
        f"{prefix}_feature": tree.feature.astype(float),
        f"{prefix}_threshold": tree.threshold,
        f"{prefix}_left": tree.left.astype(float),
        f"{prefix}_right": tree.right.astype(float),
        f"{prefix}_leaf": tree.leaf_label.astype(float),
    }


def _tree_from_arrays(arrays, prefix):
    tree = _TreeArrays()
    tree.feature = arrays[f"{prefix}_feature"].astype(int)
    tree.threshold = arrays[f"{prefix}_threshold"]
    tree.left = arrays[f"{prefix}_left"].astype(int)
    tree.right = arrays[f"{prefix}_right"].astype(int)
    tree.leaf_label = arrays[f"{prefix}_leaf"].astype(int)
    return tree


class RandomForest(ClassifierModel):
    """Bagged CART trees with per-split feature subsampling, majority vote."""

    algorithm = "rf"

    def fit(self, X, y, rng):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        n = X.shape[0]
        self.n_features = X.shape[1]
        self.trees = []
        for _ in range(self.hyperparams["n_trees"]):
            rows = rng.integers(0, n, size=n)
            self.trees.append(
                _grow_tree(
                    X[rows],
                    y[rows],
                    self.hyperparams["max_depth"],
                    self.hyperparams["min_leaf"],
                    feature_rng=rng,
                    features_per_split=min(
                        self.hyperparams["features_per_split"], self.n_features
                    ),
                )
            )
        return self

    def tree_votes(self, X) -> np.ndarray:
        X = self._check_input(X, self.n_features)
        return np.stack([_tree_predict(t, X) for t in self.trees])

    def predict(self, X) -> np.ndarray:
        votes = self.tree_votes(X)
        attack = votes.sum(axis=0)
        # ties go to attack
        return np.where(attack * 2 >= len(self.trees), LABEL_ATTACK, LABEL_NORMAL)

    def _arrays(self):
        arrays = {"n_features": np.array([self.n_features]), "n_trees": np.array([len(self.trees)])}
        for i, tree in enumerate(self.trees):
            arrays.update(_tree_to_arrays(tree, prefix=f"t{i}"))
        return arrays

    def _load_arrays(self, arrays):
        self.n_features = int(arrays["n_features"][0])
        self.trees = [
            _tree_from_arrays(arrays, prefix=f"t{i}")
            for i in range(int(arrays["n_trees"][0]))
        ]


class KNearestNeighbors(ClassifierModel):
    """Brute-force k-NN on Euclidean distance over a stored reference set."""

    algorithm = "knn"

    def fit(self, X, y, rng):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        cap = self.hyperparams["max_reference"]
        if cap and len(X) > cap:
            keep = rng.choice(len(X), size=cap, replace=False)
            X, y = X[keep], y[keep]
        self.ref_X = X
        self.ref_y = y
        self.ref_sq = (X * X).sum(axis=1)
        return self

    def predict(self, X) -> np.ndarray:
        X = self._check_input(X, self.ref_X.shape[1])
        k = min(self.hyperparams["k"], len(self.ref_y))
        out = np.empty(X.shape[0], dtype=int)
        chunk = 512
        for start in range(0, X.shape[0], chunk):
            q = X[start : start + chunk]
            d2 = (q * q).sum(axis=1)[:, None] + self.ref_sq[None, :] - 2.0 * (q @ self.ref_X.T)
            nearest = np.argpartition(d2, k - 1, axis=1)[:, :k]
            attack = self.ref_y[nearest].sum(axis=1)
            # ties go to attack
            out[start : start + chunk] = np.where(
                attack * 2 >= k, LABEL_ATTACK, LABEL_NORMAL
            )
        return out

    def _arrays(self):
        return {"ref_X": self.ref_X, "ref_y": self.ref_y.astype(float)}

    def _load_arrays(self, arrays):
        self.ref_X = arrays["ref_X"]
        self.ref_y = arrays["ref_y"].astype(int)
        self.ref_sq = (self.ref_X * self.ref_X).sum(axis=1)


_MODEL_CLASSES = {
    cls.algorithm: cls
    for cls in (
        LinearSVM,
        GaussianNB,
        MlpClassifier,
        LogisticRegression,
        DecisionTree,
        RandomForest,
        KNearestNeighbors,
    )
}


def fit(
    algorithm: str,
    X,
    y,
    seed: int = 0,
    schema_fingerprint: str | None = None,
    hyperparams: dict | None = None,
) -> ClassifierModel:
    """Train one detector; both classes must be present in the labels."""
    algorithm = algorithm.lower()
    if algorithm not in _MODEL_CLASSES:
        raise UnknownAlgorithm(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    y = np.asarray(y, dtype=int)
    if len(np.unique(y)) < 2:
        raise SingleClassData("training labels contain a single class")
    params = dict(DEFAULT_HYPERPARAMS[algorithm])
    params.update(hyperparams or {})
    model = _MODEL_CLASSES[algorithm](params, seed, schema_fingerprint)
    model.fit(np.asarray(X, dtype=float), y, nn.make_rng(seed))
    return model


def predict(model: ClassifierModel, X, schema_fingerprint: str | None = None) -> np.ndarray:
    """Label a batch, optionally verifying the encoding schema fingerprint."""
    if (
        schema_fingerprint is not None
        and model.schema_fingerprint is not None
        and schema_fingerprint != model.schema_fingerprint
    ):
        raise SchemaMismatch("vectors were encoded under a different schema")
    return model.predict(X)


def save_model(model: ClassifierModel, path, manifest_path=None) -> None:
    """Write the model blob and a JSON manifest beside it."""
    model.save(path)
    if manifest_path is None:
        manifest_path = Path(path).with_suffix(".manifest.json")
    Path(manifest_path).write_text(
        json.dumps(model.manifest(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_model(path) -> ClassifierModel:
    arrays, meta = load_blob(path)
    if meta.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {meta.get('format_version')}")
    cls = _MODEL_CLASSES[meta["algorithm"]]
    hyper = meta["hyperparams"]
    model = cls(hyper, meta["seed"], meta.get("schema_fingerprint"))
    model._load_arrays(arrays)
    return model
