"""Feature-alignment distillation loss with a learnable affine projection.

The student's ``B x P`` features are mapped into the teacher's ``D``-dim space
by ``phi(s) = W s + b`` and compared row by row:

    L = mean_i || t_i - phi(s_i) ||^2

Because ``phi`` is affine, minimizing ``L`` is linear least squares; the
closed-form fitter serves as the reference for the gradient-descent one.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import Divergence, IoError, ShapeMismatch


@dataclass(frozen=True)
class FeatureBatch:
    """One feature vector per row; ``B >= 1`` rows, all entries finite."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeMismatch(f"feature batch must be a non-empty B x dim matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature batch contains non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def batch_size(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @classmethod
    def from_csv(cls, path) -> "FeatureBatch":
        try:
            return cls(np.loadtxt(path, delimiter=",", ndmin=2))
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc

    def to_csv(self, path) -> None:
        try:
            np.savetxt(path, self.data, delimiter=",", fmt="%.17g")
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc


@dataclass(frozen=True)
class LinearProjection:
    """Affine map from student to teacher space: ``weight`` is D x P, ``bias`` has length D."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.array(self.weight, dtype=float)
        b = np.array(self.bias, dtype=float).reshape(-1)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise ShapeMismatch(f"weight {w.shape} and bias {b.shape} are inconsistent")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("projection contains non-finite entries")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @classmethod
    def identity(cls, dim: int) -> "LinearProjection":
        return cls(np.eye(dim), np.zeros(dim))

    def __call__(self, student) -> np.ndarray:
        return _as_matrix(student) @ self.weight.T + self.bias


def _as_matrix(x) -> np.ndarray:
    return x.data if isinstance(x, FeatureBatch) else FeatureBatch(x).data


def _check_shapes(t: np.ndarray, s: np.ndarray, proj: LinearProjection) -> None:
    if t.shape[0] != s.shape[0]:
        raise ShapeMismatch(f"teacher batch {t.shape[0]} != student batch {s.shape[0]}")
    if proj.weight.shape != (t.shape[1], s.shape[1]):
        raise ShapeMismatch(f"projection weight {proj.weight.shape} does not map P={s.shape[1]} to D={t.shape[1]}")


def distill_loss(teacher, student, proj: LinearProjection) -> float:
    t, s = _as_matrix(teacher), _as_matrix(student)
    _check_shapes(t, s, proj)
    residual = t - proj(s)
    return float(np.sum(residual**2) / t.shape[0])


def distill_grad(teacher, student, proj: LinearProjection) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of :func:`distill_loss` with respect to ``(weight, bias)``."""
    t, s = _as_matrix(teacher), _as_matrix(student)
    _check_shapes(t, s, proj)
    err = proj(s) - t
    scale = 2.0 / t.shape[0]
    return scale * err.T @ s, scale * err.sum(axis=0)


def _augment(s: np.ndarray, use_bias: bool) -> np.ndarray:
    return np.hstack([s, np.ones((s.shape[0], 1))]) if use_bias else s


def lipschitz_constant(student, use_bias: bool = True) -> float:
    """Largest Hessian eigenvalue of the loss; any step ``lr <= 1/L`` decreases it monotonically."""
    x = _augment(_as_matrix(student), use_bias)
    gram = x.T @ x
    return float(2.0 / x.shape[0] * np.linalg.eigvalsh(gram)[-1])


def fit_projection_gd(
    teacher,
    student,
    lr: float,
    epochs: int,
    seed: int = 0,
    use_bias: bool = True,
) -> tuple[LinearProjection, np.ndarray]:
    """Full-batch gradient descent from a seeded uniform(-0.01, 0.01) start.

    Returns the final projection and the loss after every epoch. With
    ``use_bias=False`` the bias stays at zero.
    """
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    t, s = _as_matrix(teacher), _as_matrix(student)
    if t.shape[0] != s.shape[0]:
        raise ShapeMismatch(f"teacher batch {t.shape[0]} != student batch {s.shape[0]}")
    rng = np.random.default_rng(seed)
    d, p = t.shape[1], s.shape[1]
    w = rng.uniform(-0.01, 0.01, size=(d, p))
    b = rng.uniform(-0.01, 0.01, size=d) if use_bias else np.zeros(d)
    scale = 2.0 / t.shape[0]
    trace = np.empty(epochs)
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(epochs):
            err = s @ w.T + b - t
            w = w - lr * scale * (err.T @ s)
            if use_bias:
                b = b - lr * scale * err.sum(axis=0)
            residual = s @ w.T + b - t
            loss = float(np.sum(residual**2) / t.shape[0])
            if not np.isfinite(loss):
                raise Divergence(f"loss became non-finite at epoch {epoch + 1} (lr={lr})")
            trace[epoch] = loss
    return LinearProjection(w, b), trace


def fit_projection_closed_form(teacher, student, ridge: float = 1e-9, use_bias: bool = True) -> LinearProjection:
    """Least-squares projection from the ridge-regularized normal equations.

    The tiny ridge term keeps the system solvable when the Gram matrix is
    singular (e.g. ``B <= P``).
    """
    t, s = _as_matrix(teacher), _as_matrix(student)
    if t.shape[0] != s.shape[0]:
        raise ShapeMismatch(f"teacher batch {t.shape[0]} != student batch {s.shape[0]}")
    x = _augment(s, use_bias)
    gram = x.T @ x + ridge * np.eye(x.shape[1])
    coef = np.linalg.solve(gram, x.T @ t)  # (P[+1]) x D
    if use_bias:
        return LinearProjection(coef[:-1].T, coef[-1])
    return LinearProjection(coef.T, np.zeros(t.shape[1]))


def save_loss_trace(trace: np.ndarray, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = ["epoch,loss"] + [f"{i},{v!r}" for i, v in enumerate(map(float, trace), start=1)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
