"""Phase-space Gaussian lattice, overlap matrices and the biorthogonal dual.

A lattice of n_x * n_p Gaussians tiles the phase-space rectangle of a grid
with exactly one function per Planck cell (cell area a*dp = h). Sampling the
Gaussians on the grid gives the matrix G whose columns span the same space
as the periodic sinc basis; S = G^dag G is the overlap of the periodized
Gaussians and B = G S^-1 samples their biorthogonal partners.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedError, NotAvailableError
from .fourier_grid import Grid1D
from .potentials import PotentialSpec

CENTER_CONVENTIONS = ("cell_center", "integer")


def balanced_factors(n: int) -> tuple:
    """Factor n = n_x * n_p with the sides as close to square as possible."""
    if n <= 0:
        raise ValueError("n must be positive")
    d = int(math.isqrt(n))
    while n % d:
        d -= 1
    return d, n // d


@dataclass(frozen=True)
class VnLattice:
    """Rectangular lattice of phase-space cells with Gaussian centers.

    Cell m corresponds to position index n = m % n_x and momentum index
    l = m // n_x (position index fastest). Momentum rows cover [-P, P]
    symmetrically; the width alpha defaults to dp/(2*a*hbar), which matches
    the Gaussian aspect ratio to the unit cell.
    """

    x_min: float
    L: float
    n_x: int
    n_p: int
    hbar: float = 1.0
    alpha: float | None = None
    center_convention: str = "cell_center"

    def __post_init__(self):
        if self.n_x <= 0 or self.n_p <= 0:
            raise ValueError("lattice dimensions must be positive")
        if self.L <= 0 or self.hbar <= 0:
            raise ValueError("L and hbar must be positive")
        if self.center_convention not in CENTER_CONVENTIONS:
            raise ValueError(f"unknown center convention {self.center_convention!r}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", self.dp / (2.0 * self.a * self.hbar))
        elif not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def size(self) -> int:
        return self.n_x * self.n_p

    @property
    def a(self) -> float:
        """Position spacing."""
        return self.L / self.n_x

    @property
    def p_half(self) -> float:
        """Momentum half-extent of the covered rectangle."""
        return math.pi * self.hbar * self.size / self.L

    @property
    def dp(self) -> float:
        """Momentum spacing; a * dp = 2*pi*hbar by construction."""
        return 2.0 * self.p_half / self.n_p

    @property
    def centers_x(self) -> np.ndarray:
        n = np.arange(self.n_x)
        off = 0.5 if self.center_convention == "cell_center" else 0.0
        return self.x_min + self.a * (n + off)

    @property
    def centers_p(self) -> np.ndarray:
        l = np.arange(self.n_p)
        off = 0.5 if self.center_convention == "cell_center" else 0.0
        return -self.p_half + self.dp * (l + off)

    @property
    def centers(self) -> np.ndarray:
        """(size, 2) array of (x_c, p_c), position index fastest."""
        x = np.tile(self.centers_x, self.n_p)
        p = np.repeat(self.centers_p, self.n_x)
        return np.column_stack([x, p])

    @classmethod
    def from_grid(cls, grid: Grid1D, n_x: int, n_p: int, hbar: float = 1.0,
                  alpha: float | None = None,
                  center_convention: str = "cell_center") -> "VnLattice":
        if n_x * n_p != grid.N:
            raise ValueError(
                f"lattice size {n_x}*{n_p} must equal the grid size {grid.N}")
        return cls(grid.x_min, grid.L, n_x, n_p, hbar, alpha, center_convention)


@dataclass(frozen=True)
class BasisMatrices:
    """Sampled Gaussians G, overlap S = G^dag G, its inverse and B = G S^-1."""

    G: np.ndarray
    S: np.ndarray
    S_inv: np.ndarray
    B: np.ndarray
    cond_S: float


def gaussian_eval(lattice: VnLattice, m: int, x, hbar: float | None = None):
    """Continuous-normalized Gaussian of cell m at x (scalar or array).

    (2a/pi)^(1/4) exp(-a (x-x_c)^2 - i p_c (x-x_c)/hbar); the momentum phase
    sign is fixed by convention and only conjugates the basis globally.
    """
    if not 0 <= m < lattice.size:
        raise ValueError(f"cell index {m} outside 0..{lattice.size - 1}")
    hbar = lattice.hbar if hbar is None else hbar
    x = np.asarray(x, dtype=float)
    xc, pc = lattice.centers[m]
    alpha = lattice.alpha
    out = ((2.0 * alpha / math.pi) ** 0.25
           * np.exp(-alpha * (x - xc) ** 2 - 1j * pc * (x - xc) / hbar))
    return complex(out) if out.ndim == 0 else out


def build_G(lattice: VnLattice, grid: Grid1D, hbar: float | None = None) -> np.ndarray:
    """N x N complex matrix G[i, m] = g_m(x_i) over the grid points."""
    if lattice.size != grid.N:
        raise ValueError("lattice size must equal the grid size")
    hbar = lattice.hbar if hbar is None else hbar
    x = grid.points[:, None]
    xc = lattice.centers[:, 0][None, :]
    pc = lattice.centers[:, 1][None, :]
    return ((2.0 * lattice.alpha / math.pi) ** 0.25
            * np.exp(-lattice.alpha * (x - xc) ** 2 - 1j * pc * (x - xc) / hbar))


def build_overlap(g: np.ndarray) -> np.ndarray:
    """Overlap S = G^dag G of the periodized Gaussians (exact on the grid)."""
    s = g.conj().T @ g
    return 0.5 * (s + s.conj().T)


def invert_overlap(s: np.ndarray, rcond: float = 1e-12,
                   allow_pseudo: bool = False):
    """Invert S by Hermitian eigendecomposition.

    Eigenvalues below rcond * lambda_max are inverted only when allow_pseudo
    is set (with a warning); otherwise the overlap counts as numerically
    singular. Returns (S_inv, cond) with cond = lambda_max / lambda_min.
    """
    w, u = np.linalg.eigh(s)
    w_max = w[-1]
    if w_max <= 0:
        raise IllConditionedError("overlap matrix is not positive definite")
    bad = w < rcond * w_max
    cond = float(w_max / w[0]) if w[0] > 0 else float("inf")
    if np.any(bad):
        if not allow_pseudo:
            raise IllConditionedError(
                f"overlap matrix numerically singular (cond ~ {cond:.3e}); "
                "pass allow_pseudo=True to pseudo-invert")
        warnings.warn(
            f"overlap pseudo-inverted: dropping {int(bad.sum())} modes below "
            f"rcond (cond ~ {cond:.3e})", stacklevel=2)
        keep = ~bad
        s_inv = (u[:, keep] / w[keep]) @ u[:, keep].conj().T
    else:
        s_inv = (u / w) @ u.conj().T
    return 0.5 * (s_inv + s_inv.conj().T), cond


def build_bvn(g: np.ndarray, s_inv: np.ndarray) -> np.ndarray:
    """Grid-sampled biorthogonal functions B = G S^-1 (so G^dag B = I)."""
    if g.shape[1] != s_inv.shape[0]:
        raise ValueError("G and S_inv shapes disagree")
    return g @ s_inv


def build_basis(lattice: VnLattice, grid: Grid1D, hbar: float | None = None,
                rcond: float = 1e-12, allow_pseudo: bool = False) -> BasisMatrices:
    """Convenience constructor for the full (G, S, S_inv, B) bundle."""
    g = build_G(lattice, grid, hbar)
    s = build_overlap(g)
    s_inv, cond = invert_overlap(s, rcond, allow_pseudo)
    return BasisMatrices(g, s, s_inv, build_bvn(g, s_inv), cond)


def continuous_vn_matrices(lattice: VnLattice, spec: PotentialSpec,
                           mass: float | None = None,
                           hbar: float | None = None):
    """Analytic Hamiltonian and overlap of the raw (non-periodized) Gaussians.

    Closed-form integrals over the infinite line; only the harmonic potential
    is supported. This is the baseline the periodized basis is compared
    against.
    """
    if spec.kind != "harmonic":
        raise NotAvailableError(
            "analytic Gaussian integrals are implemented for the harmonic "
            "potential only")
    mass = spec.mass if mass is None else mass
    hbar = spec.hbar if hbar is None else hbar
    omega = spec.params["omega"]
    alpha = lattice.alpha
    c = lattice.centers
    x1, x2 = c[:, 0][:, None], c[:, 0][None, :]
    p1, p2 = c[:, 1][:, None], c[:, 1][None, :]
    dx = x1 - x2
    dpm = p1 - p2
    s = np.exp(-0.5 * alpha * dx**2 - dpm**2 / (8.0 * alpha * hbar**2)
               - 0.5j * (p1 + p2) * dx / hbar)
    # moments of the complex Gaussian weight g1* g2
    z0 = 0.5 * (x1 + x2) + 1j * dpm / (4.0 * alpha * hbar)
    var = 1.0 / (4.0 * alpha)
    ex2 = z0**2 + var
    e11 = ex2 - (x1 + x2) * z0 + x1 * x2  # <(x-x1)(x-x2)>
    em1 = z0 - x1
    em2 = z0 - x2
    p_sq = s * (4.0 * hbar**2 * alpha**2 * e11
                + 2j * hbar * alpha * (p2 * em1 - p1 * em2) + p1 * p2)
    x_sq = s * ex2
    h = p_sq / (2.0 * mass) + 0.5 * mass * omega**2 * x_sq
    return 0.5 * (h + h.conj().T), 0.5 * (s + s.conj().T)
