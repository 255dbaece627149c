"""Incremental PCA for streaming dimensionality reduction of semantic vectors.

Mean-corrected incremental SVD: each batch is stacked with the scaled current
components and a mean-correction row, and the top-k right singular vectors of
the stack become the new components. Memory stays bounded by one batch.
"""

from __future__ import annotations

import json

import numpy as np

DEFAULT_N_COMPONENTS = 64
DEFAULT_BATCH_SIZE = 4096


class NotFittedError(RuntimeError):
    """transform() called before enough samples were seen."""


class IncrementalPca:
    """Streaming PCA with a fixed number of components.

    Batches smaller than `n_components` are buffered until enough rows are
    available for the first SVD; after initialization any batch size >= 1 is
    accepted. `last_batch_residual` is the relative reconstruction error of
    the most recent batch: mean squared residual over mean squared centered
    norm, so it is comparable across datasets.
    """

    def __init__(self, n_components: int = DEFAULT_N_COMPONENTS):
        if n_components < 1:
            raise ValueError("n_components must be >= 1")
        self.n_components = n_components
        self.dim_in: int | None = None
        self.mean_: np.ndarray | None = None
        self.components_: np.ndarray | None = None
        self.singular_values_: np.ndarray | None = None
        self.n_samples_seen = 0
        self.last_batch_residual = 0.0
        self._buffer: list[np.ndarray] = []

    @property
    def is_fitted(self) -> bool:
        return self.n_samples_seen >= self.n_components

    def _check_batch(self, batch) -> np.ndarray:
        X = np.atleast_2d(np.asarray(batch, dtype=float))
        if X.ndim != 2 or X.shape[0] < 1:
            raise ValueError("batch must be a non-empty 2-D array")
        if not np.all(np.isfinite(X)):
            raise ValueError("batch contains non-finite values")
        if self.dim_in is None:
            if X.shape[1] < self.n_components:
                raise ValueError(
                    f"input dimension {X.shape[1]} smaller than n_components {self.n_components}"
                )
            self.dim_in = X.shape[1]
        elif X.shape[1] != self.dim_in:
            raise ValueError(f"batch has dimension {X.shape[1]}, model expects {self.dim_in}")
        return X

    def partial_fit(self, batch) -> "IncrementalPca":
        X = self._check_batch(batch)

        if self.components_ is None:
            self._buffer.append(X)
            buffered = sum(b.shape[0] for b in self._buffer)
            if buffered < self.n_components:
                return self
            X = np.vstack(self._buffer)
            self._buffer = []
            col_mean = X.mean(axis=0)
            _, s, vt = np.linalg.svd(X - col_mean, full_matrices=False)
            self.mean_ = col_mean
            self.components_ = vt[: self.n_components]
            self.singular_values_ = s[: self.n_components]
            self.n_samples_seen = X.shape[0]
            self._update_residual(X)
            return self

        n_old = self.n_samples_seen
        n_new = X.shape[0]
        n_total = n_old + n_new
        col_mean = X.mean(axis=0)
        mean_correction = np.sqrt(n_old * n_new / n_total) * (self.mean_ - col_mean)
        stacked = np.vstack(
            [
                self.singular_values_[:, None] * self.components_,
                X - col_mean,
                mean_correction,
            ]
        )
        _, s, vt = np.linalg.svd(stacked, full_matrices=False)
        self.mean_ = (n_old * self.mean_ + n_new * col_mean) / n_total
        self.components_ = vt[: self.n_components]
        self.singular_values_ = s[: self.n_components]
        self.n_samples_seen = n_total
        self._update_residual(X)
        return self

    def _update_residual(self, X: np.ndarray) -> None:
        centered = X - self.mean_
        recon = (centered @ self.components_.T) @ self.components_
        err = float(np.mean(np.sum((centered - recon) ** 2, axis=1)))
        energy = float(np.mean(np.sum(centered**2, axis=1)))
        self.last_batch_residual = err / energy if energy > 0 else 0.0

    def transform(self, vec) -> np.ndarray:
        """Project a vector (or row matrix) onto the learned components."""
        if not self.is_fitted:
            raise NotFittedError(
                f"model has seen {self.n_samples_seen} samples; "
                f"needs >= {self.n_components} before transform"
            )
        x = np.asarray(vec, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.dim_in:
            raise ValueError(f"vector has dimension {x.shape[1]}, model expects {self.dim_in}")
        out = (x - self.mean_) @ self.components_.T
        return out[0] if single else out

    def save(self, path) -> None:
        """Header line (JSON object) + mean row + one row per component, all JSON arrays."""
        if not self.is_fitted:
            raise NotFittedError("cannot save an unfitted model")
        header = {
            "dim_in": self.dim_in,
            "n_components": self.n_components,
            "n_samples_seen": self.n_samples_seen,
            "last_batch_residual": self.last_batch_residual,
            "singular_values": [float(v) for v in self.singular_values_],
        }
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, allow_nan=False) + "\n")
            fh.write(json.dumps([float(v) for v in self.mean_], allow_nan=False) + "\n")
            for row in self.components_:
                fh.write(json.dumps([float(v) for v in row], allow_nan=False) + "\n")

    @classmethod
    def load(cls, path) -> "IncrementalPca":
        with open(path, "r", encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            rows = [json.loads(line) for line in fh if line.strip()]
        model = cls(n_components=int(header["n_components"]))
        model.dim_in = int(header["dim_in"])
        model.n_samples_seen = int(header["n_samples_seen"])
        model.last_batch_residual = float(header["last_batch_residual"])
        model.singular_values_ = np.asarray(header["singular_values"], dtype=float)
        if len(rows) != model.n_components + 1:
            raise ValueError(
                f"{path}: expected mean + {model.n_components} component rows, got {len(rows)}"
            )
        model.mean_ = np.asarray(rows[0], dtype=float)
        model.components_ = np.asarray(rows[1:], dtype=float)
        if model.components_.shape != (model.n_components, model.dim_in):
            raise ValueError(f"{path}: component matrix shape mismatch")
        return model


def reduce_stream(stream, model: IncrementalPca):
    """Project every frame of a feature stream to the model's component space."""
    from autocut.features import FeatureStream, FrameFeature

    reduced = model.transform(stream.semantic_matrix())
    frames = tuple(
        FrameFeature(
            frame_index=f.frame_index,
            timestamp_s=f.timestamp_s,
            semantic=tuple(float(x) for x in row),
            aesthetic=f.aesthetic,
            shot_size=f.shot_size,
        )
        for f, row in zip(stream.frames, reduced)
    )
    return FeatureStream(
        source_id=stream.source_id,
        fps_sampled=stream.fps_sampled,
        dim_semantic=model.n_components,
        frames=frames,
        meta=stream.meta,
    )
