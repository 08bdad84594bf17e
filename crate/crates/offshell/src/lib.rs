//! Numerical machinery for the five-dimensional pre-Maxwell gauge fields of a
//! point source.
//!
//! The observable sector is a parametrized electrodynamics on (x, τ): gauge
//! potentials a^α(x, τ) with α ∈ {t, x, y, z, τ} are sourced by a point charge
//! moving on a worldline z^μ(τ′), z⁵(τ′) ≡ τ′, through a τ-retarded Green
//! function of the 5D ultrahyperbolic wave operator.  The potentials reduce to
//! hypersingular worldline integrals
//!
//! ```text
//!   a^α(x, τ) = −(q σ₅ / 4π²) FP ∫ θ(R) R^{−3/2}(τ′) ż^α(τ′) dτ′
//! ```
//!
//! with R(τ′) = −σ₅[(x − z(τ′))² + σ₅(τ − τ′)²] and FP the canonical
//! (finite-part) regularization at the cone roots R(τ′) = 0.  Field strengths
//! f^{αβ} follow from the same integral with λ = 5/2 and the antisymmetrized
//! numerator φ^{αβ} = ż^β ∂^αR − ż^α ∂^βR.
//!
//! Module layout:
//! - [`dd`]: double-double (~31 significant digits) scalar arithmetic used for
//!   compensated kernel evaluation near cone roots.
//! - [`core`]: signatures, five-vectors, worldlines, and the kernel R(τ′) with
//!   its derivatives and observation-point gradient.
//! - [`greens`]: normalization constants and the retarded Green function of
//!   the 5D wave operator in both metric signatures.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature with inverse-square-root
//!   endpoint weights and a semi-infinite transform.
//! - [`regfp`]: canonical finite-part regularization of ∫ φ R^{−λ} dτ′ at
//!   simple cone roots, plus an independent Hadamard-limit oracle.
//! - [`roots`]: certified root scan of R(τ′) on (−∞, τ], singularity
//!   classification, and integration segment planning.
//! - [`maxwell`]: analytic Maxwell references (Liénard–Wiechert potential,
//!   the magnetic field of a uniformly accelerated charge, Lorentz–Dirac
//!   radiation reaction).
//! - [`solver`]: assembly of potentials, field tensors, zero-mode Maxwell
//!   limits, the self-force integral, and the 5D Lorentz force.

pub mod core;
pub mod dd;
pub mod greens;
pub mod maxwell;
pub mod quad;
pub mod regfp;
pub mod roots;
pub mod solver;
