"""
Spin spaces the oracle evolves states in.

The Dicke space holds the N+1 symmetric states |S, m>; the product space
holds all 2^N qubit configurations and is needed once individual dephasing
breaks the permutation symmetry. Both expose the same interface: collective
operators, the S_z eigenvalue of every basis state, and the elementwise
factors of the twisting unitary and the dephasing channels.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
import numpy.typing as npt
from scipy.special import gammaln

from ramsey_echo.core.core import Direction

ComplexArray = npt.NDArray[np.complex128]
FloatArray = npt.NDArray[np.float64]

MAX_PRODUCT_PARTICLES = 10

SINGLE_SX = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
SINGLE_SY = np.array([[0, 0.5j], [-0.5j, 0]], dtype=complex)
SINGLE_SZ = np.array([[-0.5, 0], [0, 0.5]], dtype=complex)


@dataclass(frozen=True)
class SpinOperators:
    """Collective spin components in one basis."""

    sx: ComplexArray
    sy: ComplexArray
    sz: ComplexArray

    def along(self, axis: Direction) -> ComplexArray:
        """S_n = n_x S_x + n_y S_y + n_z S_z."""
        nx, ny, nz = axis.components
        return nx * self.sx + ny * self.sy + nz * self.sz

    def components(self) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
        return self.sx, self.sy, self.sz


def hermitian_unitary(generator: ComplexArray, angle: float) -> ComplexArray:
    """exp(-i angle H) from the eigendecomposition of the Hermitian H."""
    eigenvalues, eigenvectors = np.linalg.eigh(generator)
    return (eigenvectors * np.exp(-1j * angle * eigenvalues)) @ eigenvectors.conj().T


@dataclass(frozen=True)
class SpinSpace:
    """
    Basis, operators and channel factors of one spin space.

    Attributes:
        n_particles: Number of qubits N
        m_values: S_z eigenvalue of each basis state
        operators: Collective S_x, S_y, S_z
        hamming: Number of differing qubits between basis states (product space only)
        x_state: The polarized initial state |x>
    """

    n_particles: int
    m_values: FloatArray
    operators: SpinOperators
    hamming: Optional[npt.NDArray[np.int_]]
    x_state: ComplexArray

    @property
    def dimension(self) -> int:
        return int(self.m_values.size)

    @property
    def is_product(self) -> bool:
        return self.hamming is not None

    def oat_phases(self, mu: float) -> ComplexArray:
        """Diagonal of T_mu = exp(-i mu S_z^2 / 2)."""
        return np.exp(-0.5j * mu * self.m_values**2)

    def collective_factor(self, sigma: float, strength: float) -> FloatArray:
        """Elementwise factor exp(-sigma |mu| (m - m')^2 / 4) of collective dephasing."""
        difference = self.m_values[:, None] - self.m_values[None, :]
        return np.exp(-sigma * abs(strength) * difference**2 / 4)

    def individual_factor(self, big_sigma: float, strength: float) -> FloatArray:
        """Elementwise factor exp(-Sigma |mu| d) with d the number of flipped qubits."""
        if self.hamming is None:
            msg = "Individual dephasing needs the product space"
            raise ValueError(msg)
        return np.exp(-big_sigma * abs(strength) * self.hamming)

    def rotation(self, axis: Direction, angle: float) -> ComplexArray:
        """R_n(angle) = exp(-i angle S_n)."""
        if not self.is_product:
            return hermitian_unitary(self.operators.along(axis), angle)
        nx, ny, nz = axis.components
        single = hermitian_unitary(nx * SINGLE_SX + ny * SINGLE_SY + nz * SINGLE_SZ, angle)
        unitary = np.ones((1, 1), dtype=complex)
        for _ in range(self.n_particles):
            unitary = np.kron(unitary, single)
        return unitary


def _spin_ladder(n_particles: int) -> FloatArray:
    """Raising operator S_+ in the Dicke basis, index i = m + N/2."""
    spin = n_particles / 2
    m = np.arange(n_particles + 1) - spin
    raising = np.zeros((n_particles + 1, n_particles + 1))
    lower = m[:-1]
    raising[np.arange(1, n_particles + 1), np.arange(n_particles)] = np.sqrt(spin * (spin + 1) - lower * (lower + 1))
    return raising


def _log_binomial_amplitudes(n_particles: int) -> FloatArray:
    k = np.arange(n_particles + 1)
    return 0.5 * (gammaln(n_particles + 1) - gammaln(k + 1) - gammaln(n_particles - k + 1))


@lru_cache(maxsize=64)
def dicke(n_particles: int) -> SpinSpace:
    """Dicke space of N particles (cached per N)."""
    if n_particles < 1:
        msg = f"Particle number must be >= 1, got {n_particles}"
        raise ValueError(msg)

    raising = _spin_ladder(n_particles).astype(complex)
    lowering = raising.T.copy()
    operators = SpinOperators(
        sx=(raising + lowering) / 2,
        sy=(raising - lowering) / 2j,
        sz=np.diag(np.arange(n_particles + 1) - n_particles / 2).astype(complex),
    )
    # Equatorial coherent state: sqrt(C(N, k)) / 2^(N/2), all amplitudes positive.
    x_state = np.exp(_log_binomial_amplitudes(n_particles) - n_particles * np.log(2) / 2).astype(complex)
    return SpinSpace(
        n_particles=n_particles,
        m_values=np.arange(n_particles + 1) - n_particles / 2,
        operators=operators,
        hamming=None,
        x_state=x_state,
    )


def _popcount(values: npt.NDArray[np.int_], n_bits: int) -> npt.NDArray[np.int_]:
    return sum(((values >> bit) & 1 for bit in range(n_bits)), np.zeros_like(values))


def _collective(single: ComplexArray, n_particles: int) -> ComplexArray:
    """Sum over qubits of the single-qubit operator acting on that qubit."""
    total = np.zeros((2**n_particles, 2**n_particles), dtype=complex)
    for qubit in range(n_particles):
        left = np.eye(2 ** (n_particles - 1 - qubit))
        right = np.eye(2**qubit)
        total += np.kron(np.kron(left, single), right)
    return total


@lru_cache(maxsize=16)
def product(n_particles: int) -> SpinSpace:
    """
    Product space of N qubits; bit q of a basis index is 1 when qubit q is up.

    Raises:
        ValueError: If N exceeds the dense product-space limit
    """
    if not 1 <= n_particles <= MAX_PRODUCT_PARTICLES:
        msg = f"Product space supports 1 <= N <= {MAX_PRODUCT_PARTICLES}, got {n_particles}"
        raise ValueError(msg)

    index = np.arange(2**n_particles)
    ups = _popcount(index, n_particles)
    plus_x = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
    x_state = np.ones(1, dtype=complex)
    for _ in range(n_particles):
        x_state = np.kron(x_state, plus_x)

    return SpinSpace(
        n_particles=n_particles,
        m_values=ups - n_particles / 2,
        operators=SpinOperators(
            sx=_collective(SINGLE_SX, n_particles),
            sy=_collective(SINGLE_SY, n_particles),
            sz=_collective(SINGLE_SZ, n_particles),
        ),
        hamming=_popcount(index[:, None] ^ index[None, :], n_particles),
        x_state=x_state,
    )


def dicke_embedding(n_particles: int) -> ComplexArray:
    """Isometry E (2^N x (N+1)) mapping |S, m> to the symmetric product state."""
    space = product(n_particles)
    ups = (space.m_values + n_particles / 2).astype(int)
    embedding = np.zeros((space.dimension, n_particles + 1), dtype=complex)
    counts = np.bincount(ups, minlength=n_particles + 1)
    embedding[np.arange(space.dimension), ups] = 1 / np.sqrt(counts[ups])
    return embedding
