"""Per-frame inference backends: semantic embedding, aesthetic score, shot size.

Each backend consumes preprocessed frames (N, 3, 227, 227, RGB, mean-subtracted)
and reports a descriptor string that lands in the output stream header, plus a
warning when it is a fallback rather than a trained model.

Identifiers: "untrained-seeded" (semantic default: ImageNet-architecture
backbone with seeded random weights, usable offline), "proxy" (aesthetic
default: image-statistics score), "proxy-uniform" (shot-size default, as no
public 3-class shot-size model exists), or a filesystem path to a TorchScript
module / state dict.
"""

from __future__ import annotations

import os

import numpy as np
import torch
import torch.nn.functional as F
from torchvision.models import googlenet

SEMANTIC_DIM = 1024
UNTRAINED_SEED = 20240501


def _load_scripted(path: str) -> torch.nn.Module:
    if not os.path.exists(path):
        raise FileNotFoundError(f"model weights not found: {path}")
    model = torch.jit.load(path, map_location="cpu")
    model.eval()
    return model


class SemanticBackend:
    """1024-dim embedding from the penultimate global-pooling layer of an
    ImageNet-style backbone.

    With the default "untrained-seeded" identifier the backbone keeps its
    seeded random initialization: embeddings are still content-sensitive
    (random projections preserve distances), which keeps the downstream
    pipeline runnable where pretrained weights cannot be fetched.
    """

    def __init__(self, identifier: str = "untrained-seeded"):
        self.identifier = identifier
        self.warning = None
        if identifier == "untrained-seeded":
            torch.manual_seed(UNTRAINED_SEED)
            net = googlenet(weights=None, aux_logits=False, init_weights=True)
            self.warning = "semantic backend uses seeded untrained weights"
        elif identifier == "imagenet":
            from torchvision.models import GoogLeNet_Weights

            net = googlenet(weights=GoogLeNet_Weights.IMAGENET1K_V1)
        else:
            if not os.path.exists(identifier):
                raise FileNotFoundError(f"model weights not found: {identifier}")
            torch.manual_seed(UNTRAINED_SEED)
            net = googlenet(weights=None, aux_logits=False, init_weights=True)
            state = torch.load(identifier, map_location="cpu", weights_only=True)
            net.load_state_dict(state, strict=False)
        net.eval()
        # Everything up to and including the global average pool; the
        # classifier head is dropped.
        modules = list(net.children())
        cut = [i for i, m in enumerate(modules) if isinstance(m, torch.nn.AdaptiveAvgPool2d)]
        self._body = torch.nn.Sequential(*modules[: cut[0] + 1])
        self._body.eval()

    @torch.no_grad()
    def __call__(self, batch: torch.Tensor) -> np.ndarray:
        out = self._body(batch).flatten(1)
        if out.shape[1] != SEMANTIC_DIM:
            raise RuntimeError(f"semantic backbone produced {out.shape[1]} dims, expected {SEMANTIC_DIM}")
        return out.numpy().astype(float)


class AestheticBackend:
    """Two-way visual-quality score, first component = P(high quality).

    The default "proxy" maps sharpness (Laplacian energy) and exposure spread
    to [0, 1]; it flags obviously defective frames (blur, blackout) without a
    trained model. A TorchScript path replaces it with real inference.
    """

    def __init__(self, identifier: str = "proxy"):
        self.identifier = identifier
        self.warning = None
        self._model = None
        if identifier == "proxy":
            self.warning = "aesthetic backend is an image-statistics proxy"
        else:
            self._model = _load_scripted(identifier)

    @torch.no_grad()
    def __call__(self, batch: torch.Tensor) -> np.ndarray:
        if self._model is not None:
            scores = F.softmax(self._model(batch), dim=1).numpy().astype(float)
            return scores[:, :2]
        gray = batch.mean(dim=1)  # (N, H, W), mean-subtracted scale
        lap = (
            -4.0 * gray[:, 1:-1, 1:-1]
            + gray[:, :-2, 1:-1]
            + gray[:, 2:, 1:-1]
            + gray[:, 1:-1, :-2]
            + gray[:, 1:-1, 2:]
        )
        sharpness = lap.pow(2).mean(dim=(1, 2)).numpy()
        spread = gray.std(dim=(1, 2)).numpy()
        # Squash to (0, 1): flat or blurred frames score low on both terms.
        p_high = 1.0 - np.exp(-(sharpness / 500.0 + spread / 40.0))
        p_high = np.clip(p_high, 0.0, 1.0)
        return np.stack([p_high, 1.0 - p_high], axis=1).astype(float)


class ShotSizeBackend:
    """3-way (close-up, medium, long) distribution.

    The reference classifier was trained on a private dataset; without a
    public replacement the default emits the uniform distribution and flags
    the stream so evaluation on real footage knows sizes are unavailable.
    """

    def __init__(self, identifier: str = "proxy-uniform"):
        self.identifier = identifier
        self.warning = None
        self._model = None
        if identifier == "proxy-uniform":
            self.warning = "shot-size backend emits a uniform distribution"
        else:
            self._model = _load_scripted(identifier)

    @torch.no_grad()
    def __call__(self, batch: torch.Tensor) -> np.ndarray:
        n = batch.shape[0]
        if self._model is None:
            return np.full((n, 3), 1.0 / 3.0)
        return F.softmax(self._model(batch), dim=1).numpy().astype(float)
