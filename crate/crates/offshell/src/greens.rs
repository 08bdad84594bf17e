//! Ultrahyperbolic kernels Φ_α, their normalization constants K_m(α) and
//! N_m(α), and the closed-form τ-retarded Green function of the 5D wave
//! operator for both metric signatures.
//!
//! The retarded family lives on the positive side of the cone form
//! r² = −σ₅(x·x + σ₅τ²) (plus-count p = 1 for O(4,1), p = 3 for O(3,2)) and
//! is normalized so that the analytic descent ΔΦ_α = −Φ_{α−2} holds, where Δ
//! is the second-order operator with the same signs as r².  At α = 2, m = 5
//! the kernel reduces to the closed form used by the solver:
//!
//! ```text
//!   g_ret(x, τ) = −σ₅ · θ(τ)/(4π²) · θ(r²) (r²)^{−3/2}
//! ```
//!
//! Γ-functions of negative half-integer-adjacent arguments appear throughout,
//! so evaluation goes through log-Γ with the reflection formula rather than
//! direct Γ products (which would overflow or lose the sign).

use crate::core::{FiveVector, Signature};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GreensError {
    #[error("gamma-function pole at argument {gamma_arg}")]
    PoleAt { gamma_arg: f64 },
    #[error("sin(pi p/2) prefactor vanishes for even p = {p}")]
    ZeroPrefactor { p: u32 },
}

/// Order parameters of the kernel family Φ_α in m total dimensions with
/// cone-form plus-count p.
#[derive(Clone, Copy, Debug)]
pub struct KernelOrder {
    pub alpha: f64,
    pub m: u32,
    pub p: u32,
}

impl KernelOrder {
    /// Order α in the physical dimension m = 5 with p matching `sig`.
    pub fn for_sig(alpha: f64, sig: Signature) -> KernelOrder {
        KernelOrder {
            alpha,
            m: 5,
            p: sig.p_eff(),
        }
    }
}

/// ln|Γ(x)| and the sign of Γ(x); poles at non-positive integers are errors.
///
/// Negative arguments go through the reflection formula
/// Γ(x)Γ(1−x) = π/sin(πx), keeping everything in log space.
fn gamma_ln_sign(x: f64) -> Result<(f64, f64), GreensError> {
    if x > 0.0 {
        return Ok((ln_gamma(x), 1.0));
    }
    let r = x.round();
    if (x - r).abs() < 1e-12 {
        // r ≤ 0 here since x ≤ 0.
        return Err(GreensError::PoleAt { gamma_arg: x });
    }
    let s = (PI * x).sin();
    Ok((PI.ln() - s.abs().ln() - ln_gamma(1.0 - x), s.signum()))
}

/// sin(πp/2) for integer p, exactly.
fn sin_half_pi(p: u32) -> f64 {
    match p % 4 {
        0 | 2 => 0.0,
        1 => 1.0,
        _ => -1.0,
    }
}

/// The m-dimensional Γ-function generalization
/// K_m(α) = π^{(m−1)/2} Γ((α−m+2)/2) Γ(α) Γ((1−α)/2)
///          / [Γ((α−p+2)/2) Γ((p−α)/2)].
///
/// Any Γ argument landing on a non-positive integer — numerator or
/// denominator — is reported as `PoleAt` rather than evaluated (denominator
/// poles are zeros of K, but the caller asked for a finite nonzero order).
pub fn k_m(alpha: f64, m: u32, p: u32) -> Result<f64, GreensError> {
    let mf = m as f64;
    let pf = p as f64;
    let (l1, s1) = gamma_ln_sign((alpha - mf + 2.0) / 2.0)?;
    let (l2, s2) = gamma_ln_sign(alpha)?;
    let (l3, s3) = gamma_ln_sign((1.0 - alpha) / 2.0)?;
    let (l4, s4) = gamma_ln_sign((alpha - pf + 2.0) / 2.0)?;
    let (l5, s5) = gamma_ln_sign((pf - alpha) / 2.0)?;
    let ln_val = 0.5 * (mf - 1.0) * PI.ln() + l1 + l2 + l3 - l4 - l5;
    Ok(s1 * s2 * s3 * s4 * s5 * ln_val.exp())
}

/// The retarded-family normalization
/// N_m(α) = 2 π^{(m−3)/2} sin(πp/2) Γ((2+α−m)/2) Γ((1−α)/2) Γ(α).
pub fn n_m(alpha: f64, m: u32, p: u32) -> Result<f64, GreensError> {
    if p % 2 == 0 {
        return Err(GreensError::ZeroPrefactor { p });
    }
    let mf = m as f64;
    let (l1, s1) = gamma_ln_sign((2.0 + alpha - mf) / 2.0)?;
    let (l2, s2) = gamma_ln_sign((1.0 - alpha) / 2.0)?;
    let (l3, s3) = gamma_ln_sign(alpha)?;
    let ln_val = (2.0f64).ln() + 0.5 * (mf - 3.0) * PI.ln() + l1 + l2 + l3;
    Ok(sin_half_pi(p) * s1 * s2 * s3 * ln_val.exp())
}

/// The Green-function normalization denominator
/// 2 π^{m/2−1} sin(πp/2) Γ((4−m)/2): −4π² for (m=5, p=1), +4π² for (m=5, p=3).
pub fn gf_denominator(m: u32, p: u32) -> Result<f64, GreensError> {
    if p % 2 == 0 {
        return Err(GreensError::ZeroPrefactor { p });
    }
    let mf = m as f64;
    let (l, s) = gamma_ln_sign((4.0 - mf) / 2.0)?;
    Ok(sin_half_pi(p) * s * 2.0 * PI.powf(mf / 2.0 - 1.0) * l.exp())
}

/// Cone form r² = −σ₅(x·x + σ₅τ²) of an observation event; positive strictly
/// inside the retarded cone.
pub fn cone_form(x5: FiveVector, sig: Signature) -> f64 {
    let s5 = sig.sigma5();
    let x4sq = -x5.t * x5.t + x5.x * x5.x + x5.y * x5.y + x5.z * x5.z;
    -s5 * x4sq - x5.tau * x5.tau
}

/// The kernel Φ_α(x5) = r₊^{α−m}/N_m(α): zero outside the open retarded cone
/// (r² ≤ 0 or τ ≤ 0), (r²)^{(α−m)/2}/N_m(α) inside.
pub fn phi_alpha(x5: FiveVector, order: &KernelOrder, sig: Signature) -> Result<f64, GreensError> {
    let n = n_m(order.alpha, order.m, order.p)?;
    let r2 = cone_form(x5, sig);
    if x5.tau <= 0.0 || r2 <= 0.0 {
        return Ok(0.0);
    }
    Ok(r2.powf(0.5 * (order.alpha - order.m as f64)) / n)
}

/// Closed-form τ-retarded Green function of the 5D wave operator:
/// −σ₅ θ(τ)/(4π²) · θ(r²) (r²)^{−3/2}, with the pointwise boundary value 0
/// (the distributional cone content is owned by the finite-part integrals).
pub fn gf_retarded(x5: FiveVector, sig: Signature) -> f64 {
    let r2 = cone_form(x5, sig);
    if x5.tau <= 0.0 || r2 <= 0.0 {
        return 0.0;
    }
    -sig.sigma5() / (4.0 * PI * PI) * r2.powf(-1.5)
}

/// |Δ_fd Φ_α + Φ_{α−2}| at x5: the analytic descent ΔΦ_α = −Φ_{α−2} probed by
/// central second differences of the operator with the signs of r²
/// (σ₅∂_t² − σ₅∇² − ∂_τ²).  Second-order accurate in `step` for x5 strictly
/// inside the cone.
pub fn laplacian_descent_residual(
    alpha: f64,
    x5: FiveVector,
    sig: Signature,
    step: f64,
) -> Result<f64, GreensError> {
    let order = KernelOrder::for_sig(alpha, sig);
    let f = |v: FiveVector| phi_alpha(v, &order, sig);
    let center = f(x5)?;
    let s5 = sig.sigma5();
    let mut lap = 0.0;
    for i in 0..5 {
        let mut plus = x5;
        let mut minus = x5;
        let (eps, fp, fm): (f64, &mut f64, &mut f64) = match i {
            0 => (s5, &mut plus.t, &mut minus.t),
            1 => (-s5, &mut plus.x, &mut minus.x),
            2 => (-s5, &mut plus.y, &mut minus.y),
            3 => (-s5, &mut plus.z, &mut minus.z),
            _ => (-1.0, &mut plus.tau, &mut minus.tau),
        };
        *fp += step;
        *fm -= step;
        lap += eps * (f(plus)? - 2.0 * center + f(minus)?) / (step * step);
    }
    let target = -phi_alpha(x5, &KernelOrder::for_sig(alpha - 2.0, sig), sig)?;
    Ok((lap - target).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{KernelCurve, Worldline};

    const S41: Signature = Signature::OFourOne;
    const S32: Signature = Signature::OThreeTwo;
    const PI2: f64 = PI * PI;

    #[test]
    fn gf_denominator_values() {
        let d1 = gf_denominator(5, 1).unwrap();
        let d3 = gf_denominator(5, 3).unwrap();
        assert!((d1 + 4.0 * PI2).abs() < 1e-12 * 4.0 * PI2, "{d1}");
        assert!((d3 - 4.0 * PI2).abs() < 1e-12 * 4.0 * PI2, "{d3}");
    }

    #[test]
    fn n5_known_values() {
        // N₅(2) = 8π², N₅(4) = 16π², N₅(6) = −64π² for p = 1; p = 3 flips sign.
        for (alpha, want) in [(2.0, 8.0 * PI2), (4.0, 16.0 * PI2), (6.0, -64.0 * PI2)] {
            let n1 = n_m(alpha, 5, 1).unwrap();
            let n3 = n_m(alpha, 5, 3).unwrap();
            assert!((n1 - want).abs() < 1e-12 * want.abs(), "p1 α{alpha}: {n1}");
            assert!((n3 + want).abs() < 1e-12 * want.abs(), "p3 α{alpha}: {n3}");
        }
    }

    #[test]
    fn descent_recursion_of_n() {
        // N(α) = −(α−m)(α−2) N(α−2) — the identity behind ΔΦ_α = −Φ_{α−2}.
        for &alpha in &[3.3, 4.0, 5.7, 6.0, 8.5] {
            let lhs = n_m(alpha, 5, 1).unwrap();
            let rhs = -(alpha - 5.0) * (alpha - 2.0) * n_m(alpha - 2.0, 5, 1).unwrap();
            assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0), "α {alpha}");
        }
    }

    #[test]
    fn k_pole_reporting() {
        // α = p makes Γ((p−α)/2) = Γ(0) singular (other factors may pole too;
        // any is reported).
        assert!(matches!(k_m(1.0, 5, 1), Err(GreensError::PoleAt { .. })));
        assert!(matches!(k_m(3.0, 5, 3), Err(GreensError::PoleAt { .. })));
        assert!(k_m(2.0, 5, 1).unwrap().is_finite());
        // α → 0⁺ blows up through the Γ(α) factor.
        assert!(k_m(1e-8, 5, 1).unwrap().abs() > 1e6);
        assert!(n_m(1e-8, 5, 1).unwrap().abs() > 1e6);
    }

    #[test]
    fn even_p_prefactor() {
        assert_eq!(n_m(2.0, 5, 2), Err(GreensError::ZeroPrefactor { p: 2 }));
        assert_eq!(gf_denominator(5, 0), Err(GreensError::ZeroPrefactor { p: 0 }));
    }

    #[test]
    fn phi_support_and_value() {
        let inside = FiveVector::new(2.0, 0.0, 0.0, 0.0, 1.0);
        let order = KernelOrder::for_sig(2.0, S41);
        let v = phi_alpha(inside, &order, S41).unwrap();
        let want = 3.0f64.powf(-1.5) / (8.0 * PI2);
        assert!((v - want).abs() < 1e-15, "{v} vs {want}");
        // Outside the cone and at negative τ the kernel vanishes.
        let spacelike = FiveVector::new(0.0, 1.0, 0.0, 0.0, 0.5);
        assert_eq!(phi_alpha(spacelike, &order, S41).unwrap(), 0.0);
        let past = FiveVector::new(2.0, 0.0, 0.0, 0.0, -1.0);
        assert_eq!(phi_alpha(past, &order, S41).unwrap(), 0.0);
    }

    #[test]
    fn gf_known_value_and_gates() {
        let x5 = FiveVector::new(2.0, 0.0, 0.0, 0.0, 1.0);
        let v = gf_retarded(x5, S41);
        let want = -3.0f64.powf(-1.5) / (4.0 * PI2);
        assert!((v - want).abs() < 1e-18, "{v} vs {want}");
        assert!((-4.9e-3..-4.8e-3).contains(&v));
        assert_eq!(gf_retarded(FiveVector::new(2.0, 0.0, 0.0, 0.0, -1.0), S41), 0.0);
        assert_eq!(gf_retarded(FiveVector::new(0.0, 1.0, 0.0, 0.0, 0.5), S41), 0.0);
    }

    #[test]
    fn gf_sign_relation() {
        let mut k = 0u32;
        for it in -3..=3 {
            for ix in -3..=3 {
                for itau in 0..=3 {
                    let x5 = FiveVector::new(
                        it as f64 * 0.7,
                        ix as f64 * 0.6,
                        0.3,
                        -0.2,
                        itau as f64 * 0.5,
                    );
                    assert!(gf_retarded(x5, S41) <= 0.0);
                    assert!(gf_retarded(x5, S32) >= 0.0);
                    k += 1;
                }
            }
        }
        assert!(k > 0);
    }

    #[test]
    fn gf_matches_core_kernel_at_origin_source() {
        // R(τ′=0) of a static source at the origin is exactly the cone form.
        let w = Worldline::Static { x0: [0.0; 4] };
        for sig in [S41, S32] {
            for &(t, x, tau) in &[(2.0, 0.5, 1.0), (0.3, 2.0, 0.7), (3.0, 1.0, 2.0)] {
                let x5 = FiveVector::axisym(t, x, 0.8, tau);
                let r = KernelCurve::new(x5, &w, sig).eval_dd(0.0).unwrap().r.to_f64();
                let direct = if tau > 0.0 && r > 0.0 {
                    -sig.sigma5() / (4.0 * PI2) * r.powf(-1.5)
                } else {
                    0.0
                };
                let gf = gf_retarded(x5, sig);
                assert!(
                    (gf - direct).abs() <= 1e-12 * direct.abs(),
                    "{sig:?} ({t},{x},{tau}): {gf} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn laplacian_descent_is_second_order() {
        // Strictly inside the cone for each signature.
        let pts = [
            (S41, FiveVector::new(3.0, 0.5, 0.3, 0.0, 0.8)),
            (S32, FiveVector::new(0.2, 3.0, 0.4, 0.1, 0.7)),
        ];
        for (sig, x5) in pts {
            let r1 = laplacian_descent_residual(4.0, x5, sig, 2e-3).unwrap();
            let r2 = laplacian_descent_residual(4.0, x5, sig, 1e-3).unwrap();
            assert!(r1 < 1e-6, "{sig:?} residual {r1}");
            let ratio = r1 / r2;
            assert!(
                (2.5..6.0).contains(&ratio),
                "{sig:?} convergence ratio {ratio} (r1 {r1}, r2 {r2})"
            );
        }
    }
}
