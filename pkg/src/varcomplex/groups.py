"""The four matrix groups GL, SL, Sp and the linear conformal group.

Each group is described by a :class:`GroupSpec`; membership of matrices and of
Lie algebra elements is decided by relative constraint residuals compared
against ``TAU_GRP``.  All functions accept a single ``(n, n)`` matrix or a
batch ``(..., n, n)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .errors import InvalidArgument

TAU_GRP = 1e-9


class Tag(str, enum.Enum):
    GL = "gl"
    SL = "sl"
    SP = "sp"
    CONF = "conf"


@dataclass(frozen=True)
class GroupSpec:
    """A matrix group tag together with its ambient dimension ``n``."""

    tag: Tag
    n: int

    def __post_init__(self):
        object.__setattr__(self, "tag", Tag(self.tag))
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgument(f"dimension must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.tag is Tag.SP and self.n % 2:
            raise InvalidArgument(f"symplectic group needs even n, got {self.n}")

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse ``"sl:2"``, ``"gl:3"``, ``"sp:2"`` or ``"conf:2"``."""
        try:
            tag, n = text.strip().lower().split(":")
            return cls(Tag(tag), int(n))
        except (ValueError, KeyError) as exc:
            raise InvalidArgument(f"cannot parse group {text!r}; expected e.g. 'sl:2'") from exc

    def __str__(self):
        return f"{self.tag.value}:{self.n}"

    @cached_property
    def omega(self) -> np.ndarray:
        """Canonical symplectic matrix ``[[0, I], [-I, 0]]`` (needs even n)."""
        return symplectic_matrix(self.n)


def GL(n):
    return GroupSpec(Tag.GL, n)


def SL(n):
    return GroupSpec(Tag.SL, n)


def Sp(n):
    return GroupSpec(Tag.SP, n)


def Conformal(n):
    return GroupSpec(Tag.CONF, n)


def symplectic_matrix(n: int) -> np.ndarray:
    if n % 2:
        raise InvalidArgument(f"symplectic matrix needs even n, got {n}")
    m = n // 2
    w = np.zeros((n, n))
    w[:m, m:] = np.eye(m)
    w[m:, :m] = -np.eye(m)
    return w


def _checked(g: GroupSpec, F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.ndim < 2 or F.shape[-1] != F.shape[-2]:
        raise InvalidArgument(f"expected square matrices, got shape {F.shape}")
    if F.shape[-1] != g.n:
        raise InvalidArgument(f"matrix size {F.shape[-1]} does not match group {g}")
    if not np.all(np.isfinite(F)):
        raise InvalidArgument("matrix has non-finite entries")
    return F


def _fro(A):
    return np.sqrt(np.sum(A * A, axis=(-2, -1)))


def residual(g: GroupSpec, F) -> np.ndarray:
    """Relative distance of ``F`` from the group; ``inf`` when det F <= 0.

    GL has no equality constraint, so its residual is 0 on the orientation
    preserving component.
    """
    F = _checked(g, F)
    det = np.linalg.det(F)
    if g.tag is Tag.GL:
        res = np.zeros_like(det)
    elif g.tag is Tag.SL:
        scale = np.prod(np.linalg.norm(F, axis=-2), axis=-1)
        res = np.abs(det - 1.0) / np.maximum(1.0, scale)
    elif g.tag is Tag.SP:
        w = g.omega
        R = F @ w @ np.swapaxes(F, -1, -2) - w
        res = _fro(R) / np.maximum(1.0, _fro(F) ** 2)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.abs(det) ** (2.0 / g.n)
            G = F @ np.swapaxes(F, -1, -2) / s[..., None, None]
        res = _fro(G - np.eye(g.n))
    return np.where(det > 0, res, np.inf)


def member(g: GroupSpec, F, tol: float = TAU_GRP):
    """True iff ``F`` lies in the group to relative tolerance ``tol``."""
    ok = residual(g, F) <= tol
    return bool(ok) if np.ndim(ok) == 0 else ok


def algebra_residual(g: GroupSpec, H) -> np.ndarray:
    H = _checked(g, H)
    scale = np.maximum(1.0, _fro(H))
    if g.tag is Tag.GL:
        return np.zeros(H.shape[:-2])
    if g.tag is Tag.SL:
        return np.abs(np.trace(H, axis1=-2, axis2=-1)) / scale
    if g.tag is Tag.SP:
        w = g.omega
        return _fro(H @ w + w @ np.swapaxes(H, -1, -2)) / scale
    # conformal algebra: multiples of the identity plus skew matrices
    lam = np.trace(H, axis1=-2, axis2=-1) / g.n
    A = H - lam[..., None, None] * np.eye(g.n)
    return _fro(A + np.swapaxes(A, -1, -2)) / (2 * scale)


def algebra_member(g: GroupSpec, H, tol: float = TAU_GRP):
    """True iff ``H`` satisfies the Lie algebra constraint of ``g``."""
    ok = algebra_residual(g, H) <= tol
    return bool(ok) if np.ndim(ok) == 0 else ok


def random_algebra_element(g: GroupSpec, rng: np.random.Generator) -> np.ndarray:
    """Seeded algebra element with entries in [-1, 1]."""
    n = g.n
    A = rng.uniform(-1.0, 1.0, size=(n, n))
    if g.tag is Tag.GL:
        return A
    if g.tag is Tag.SL:
        # zero the trace while keeping entries in [-1, 1]
        A[-1, -1] = -np.trace(A[:-1, :-1])
        return A / max(1.0, abs(A[-1, -1]))
    if g.tag is Tag.SP:
        S = np.triu(A) + np.triu(A, 1).T
        return g.omega @ S
    K = np.triu(A, 1)
    return rng.uniform(-1.0, 1.0) * np.eye(n) + K - K.T


def random_element(g: GroupSpec, scale: float, seed: int) -> np.ndarray:
    """``exp(scale * H)`` for a seeded random algebra element ``H``."""
    if not scale > 0:
        raise InvalidArgument(f"scale must be positive, got {scale}")
    H = random_algebra_element(g, np.random.default_rng(seed))
    return expm(scale * H)


def random_elements(g: GroupSpec, count: int, scale: float, rng: np.random.Generator) -> np.ndarray:
    """A batch ``(count, n, n)`` of group elements drawn from ``rng``."""
    H = np.stack([random_algebra_element(g, rng) for _ in range(count)])
    return expm(scale * H)
