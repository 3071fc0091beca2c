//! Optimal eigenvalue sums and the Hamiltonian systems they generate.
//!
//! The crate has two halves that meet in the middle.
//!
//! The spectral half: a Dirichlet Sturm-Liouville eigensolver on `[0,1]`
//! ([`spectral`]) and a projected-gradient optimizer ([`optimize`]) that
//! extremizes the sum of the first `m` eigenvalues over potentials on an
//! `L^p` sphere, then extracts the critical system the optimizer lands on:
//! `m` coupled oscillators with a polynomial coupling of degree `2k`.
//!
//! The dynamical half: the Hamiltonian family itself with its first
//! integrals and Poisson brackets ([`dynamics`]), fixed-step symplectic
//! integration ([`integrator`]), Poincare sections and a largest-Lyapunov
//! chaos indicator ([`poincare`]), and an exact arithmetic decision
//! procedure for meromorphic integrability ([`galois`]) backed by the
//! second part of Kovacic's algorithm over `Q(z)` ([`kovacic`]).
//!
//! Decision-side computations are exact (arbitrary-precision rationals);
//! numerical-side computations are deterministic for fixed seeds and
//! configurations. The [`cli`] module exposes every capability as a
//! subcommand of the `slcrit` binary; the `examples/` directory drives the
//! same entry points as a library.

pub mod cli;
pub mod dynamics;
pub mod exact;
pub mod galois;
pub mod integrator;
pub mod kovacic;
pub mod optimize;
pub mod poincare;
pub mod spectral;
