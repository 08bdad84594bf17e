//! Canonical finite-part regularization of hypersingular segment integrals
//! ∫ φ(τ′) R^{−λ}(τ′) dτ′ whose integration region ends on a zero of R.
//!
//! Near a simple root τ′₀ of R the integrand diverges like (τ′−τ′₀)^{−λ} with
//! λ ∈ {3/2, 5/2}; the finite part is defined through the substitution
//! R → integration variable, Taylor subtraction of ψ(R) = φ/Ṙ at R = 0, and
//! analytic continuation of the divergent monomial integrals.  Concretely the
//! value is assembled from three pieces over an offset interval of width h
//! next to the root:
//!
//! - R1: ∫ R^{−λ} [φ − dir·Ṙ·(ψ₀ + ψ₁R)] dτ′ over the offset interval, where
//!   the bracket vanishes to O(R²) so the integrand is only R^{−1/2}·bounded;
//! - R2: the analytically continued boundary terms
//!   −(2/3)ψ₀R_h^{−3/2} − 2ψ₁R_h^{−1/2}   (λ = 5/2),
//!   −2ψ₀R_h^{−1/2}                        (λ = 3/2);
//! - R3: the plain quadrature over the rest of the segment.
//!
//! Here ψ₀ = φ₀/(dir·Ṙ₀), ψ₁ = (φ̇₀Ṙ₀ − φ₀R̈₀)/(dir·Ṙ₀³), dir = +1 when the
//! root sits at the lower end of the segment and −1 at the upper end, and
//! R_h = R at the offset point.  The h-dependence of R1+R3 is cancelled
//! exactly by R2; residual variation is quadrature error only, which is the
//! defining self-test of the construction.
//!
//! The subtracted bracket is a difference of O(1) quantities that must be
//! trusted down to O(R²); it is therefore evaluated in double-double
//! arithmetic before the single multiplication by R^{−λ}.  In plain f64 the
//! 1e−16-relative bracket noise, amplified by R^{−5/2}, grows faster than the
//! adaptive quadrature can average it away and subdivision runs away; with
//! the ~1e−32 double-double floor the noise stays below tolerance at every
//! depth the driver can reach.
//!
//! `hadamard_oracle` provides an independent check: integrate over {R ≥ ε}
//! with plain quadrature, subtract the analytically known divergent terms in
//! ε, and Richardson-extrapolate ε → 0 along a geometric ladder.  It shares
//! no code with the three-operator path beyond the quadrature engine.

use crate::core::KernelDd;
use crate::dd::Dd;
use crate::quad::{integrate_finite, integrate_semi_infinite, EndpointWeight, QuadError, QuadOptions, QuadResult};
use thiserror::Error;

/// Exponent of the hypersingular kernel factor R^{−λ}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lambda {
    /// λ = 3/2 — potential-type integrals, one divergent term.
    ThreeHalves,
    /// λ = 5/2 — field-strength-type integrals, two divergent terms.
    FiveHalves,
}

impl Lambda {
    pub fn exponent(self) -> f64 {
        match self {
            Lambda::ThreeHalves => 1.5,
            Lambda::FiveHalves => 2.5,
        }
    }

    /// Number of Taylor terms of ψ subtracted at the root (m_sub).
    pub fn n_subtractions(self) -> usize {
        match self {
            Lambda::ThreeHalves => 1,
            Lambda::FiveHalves => 2,
        }
    }
}

/// Parameters of the finite-part construction.
#[derive(Clone, Copy, Debug)]
pub struct RegParams {
    /// Offset from the singular endpoint, in τ′ units.  The cancellation is
    /// exact in any h; accuracy prefers h large enough that the quadrature
    /// never probes the region where root-location noise dominates.
    pub h: f64,
    pub lambda: Lambda,
    /// Minimum allowed |Ṙ| on the offset interval; below this the point is
    /// treated as shock-adjacent rather than regularizable.
    pub shock_guard: f64,
}

impl Default for RegParams {
    fn default() -> RegParams {
        RegParams {
            h: 0.1,
            lambda: Lambda::FiveHalves,
            shock_guard: 1e-8,
        }
    }
}

/// Which end of the segment carries the cone root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootEnd {
    Lower,
    Upper,
}

/// One integration segment with R ≥ 0 in its interior and a root of R at one
/// end.  `lo` may be −∞ when the root is at the upper end.
#[derive(Clone, Copy, Debug)]
pub struct FpSegment {
    pub lo: f64,
    pub hi: f64,
    pub root_end: RootEnd,
}

impl FpSegment {
    pub fn root_at_lower(lo: f64, hi: f64) -> FpSegment {
        FpSegment {
            lo,
            hi,
            root_end: RootEnd::Lower,
        }
    }

    pub fn root_at_upper(lo: f64, hi: f64) -> FpSegment {
        FpSegment {
            lo,
            hi,
            root_end: RootEnd::Upper,
        }
    }
}

/// Integrand data for the finite-part machinery.  Implementations must be
/// infallible on the segment handed in: range guards (e.g. worldline
/// parameters that would overflow exp) belong upstream, in segment planning.
pub trait FpIntegrand {
    /// R, Ṙ in double-double and R̈ in f64 at τ′.
    fn kernel_dd(&self, tp: f64) -> KernelDd;

    /// Numerator φ(τ′) in double-double, trusted near the root.
    fn phi_dd(&self, tp: f64) -> Dd;

    /// Analytic dφ/dτ′, used only at the root for the subtraction
    /// coefficient ψ₁; no numerical differentiation.
    fn phi_dot(&self, tp: f64) -> f64;

    /// φ in plain f64 (used away from the root).
    fn phi(&self, tp: f64) -> f64 {
        self.phi_dd(tp).to_f64()
    }

    /// (R, Ṙ, R̈) in plain f64 (used away from the root).
    fn kernel(&self, tp: f64) -> (f64, f64, f64) {
        let k = self.kernel_dd(tp);
        (k.r.to_f64(), k.rdot.to_f64(), k.rddot)
    }
}

#[derive(Debug, Error)]
pub enum RegError {
    #[error("kernel slope too small near the root: min |Ṙ| = {rdot_min:.3e} on the offset interval (guard {guard:.3e})")]
    ShockTooClose { rdot_min: f64, guard: f64 },
    #[error("segment of length {len:.3e} cannot support a finite-part offset (h = {h:.3e})")]
    SegmentTooShort { len: f64, h: f64 },
    #[error("extrapolation to ε → 0 is diverging: last differences {prev:.3e} → {last:.3e}")]
    ExtrapolationUnstable { prev: f64, last: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Finite-part value with quadrature bookkeeping.
#[derive(Clone, Copy, Debug)]
pub struct FpOutcome {
    pub value: f64,
    pub abs_err_estimate: f64,
    pub n_evals: u64,
    /// False when some sub-integral only reached its budget estimate.
    pub converged: bool,
    /// Offset actually used (shrunk once on short segments).
    pub h_used: f64,
}

fn accept(res: Result<QuadResult, QuadError>) -> (QuadResult, bool) {
    match res {
        Ok(r) => (r, true),
        Err(QuadError::NotConverged { estimate }) => (estimate, false),
    }
}

/// Subtraction coefficients ψ₀, ψ₁ at the root, in double-double.
fn psi_coefficients(g: &impl FpIntegrand, root: f64, dir: f64) -> (Dd, Dd) {
    let k0 = g.kernel_dd(root);
    let phi0 = g.phi_dd(root);
    let phid0 = g.phi_dot(root);
    let psi0 = phi0 / (k0.rdot * dir);
    // ψ₁ = (φ̇₀Ṙ₀ − φ₀R̈₀) / (dir·Ṙ₀³)
    let num = k0.rdot * phid0 - phi0 * k0.rddot;
    let den = k0.rdot * k0.rdot * k0.rdot * dir;
    (psi0, num / den)
}

/// The three-operator finite part of ∫ φ R^{−λ} dτ′ over one segment with a
/// simple cone root at one end.
pub fn finite_part_segment(
    g: &impl FpIntegrand,
    seg: &FpSegment,
    params: &RegParams,
    quad: &QuadOptions,
) -> Result<FpOutcome, RegError> {
    assert!(params.h > 0.0, "offset h must be positive");
    let (root, far, dir) = match seg.root_end {
        RootEnd::Lower => {
            assert!(
                seg.lo.is_finite(),
                "a root at the lower end must sit at finite τ′"
            );
            (seg.lo, seg.hi, 1.0)
        }
        RootEnd::Upper => (seg.hi, seg.lo, -1.0),
    };

    // Polish the root to machine precision.  The three-operator identity is
    // exact only at R(root) = 0; a leftover residual δ (e.g. a scanner
    // stopping at |R| ≤ 1e-12·scale) perturbs the value by O(√δ), which is
    // far above quadrature accuracy.  Newton on the double-double kernel
    // costs a handful of evaluations and removes the entire effect.
    let mut root = root;
    for _ in 0..4 {
        let k = g.kernel_dd(root);
        let step = (k.r / k.rdot).to_f64();
        if !step.is_finite() || step.abs() > params.h {
            break;
        }
        root -= step;
        if step.abs() <= f64::EPSILON * root.abs() {
            break;
        }
    }

    // Shrink h once on short segments; below the floor the construction has
    // no room to breathe (the offset cannot be vanishingly small).
    let len = (far - root).abs();
    let mut h = params.h;
    if len < h {
        h = 0.5 * len;
        let floor = 1e-8 * root.abs().max(1.0);
        if !(h > floor) {
            return Err(RegError::SegmentTooShort { len, h: params.h });
        }
    }
    let tp_h = root + dir * h;

    // Guard: dir·Ṙ must stay positive and above the shock threshold on the
    // offset interval (sampled), and R must not return to zero.
    let mut rdot_min = f64::INFINITY;
    for k in 0..=32 {
        let tp = root + dir * h * (f64::from(k) / 32.0);
        let (r, rdot, _) = g.kernel(tp);
        let s = dir * rdot;
        rdot_min = rdot_min.min(s);
        if k > 0 && r <= 0.0 {
            rdot_min = rdot_min.min(0.0);
        }
    }
    if rdot_min < params.shock_guard {
        return Err(RegError::ShockTooClose {
            rdot_min,
            guard: params.shock_guard,
        });
    }

    let (psi0, psi1) = psi_coefficients(g, root, dir);
    let lam = params.lambda.exponent();

    // The polished root is still only the nearest representable number; the
    // kernel keeps a residual R(root) = r0 ≠ 0 there (typically ~Ṙ·ulp).  The
    // two-term subtraction must vanish *at the numerical root*, not at the
    // unrepresentable true root: a leftover constant ψ₁·r0 in the bracket gets
    // amplified by R^{−5/2} into an O(ψ₁·r0^{−1/2}) spurious mass near the
    // endpoint.  Expanding the subtraction in (R − r0) kills it exactly; the
    // boundary term below shifts ψ₀ → ψ₀ − ψ₁·r0 to stay consistent.
    let r0 = g.kernel_dd(root).r;

    // R2: analytically continued boundary terms at the offset point.
    let r_h = g.kernel_dd(tp_h).r.to_f64();
    debug_assert!(r_h > 0.0);
    let r2 = match params.lambda {
        Lambda::FiveHalves => {
            let psi0_eff = psi0 - psi1 * r0;
            -(2.0 / 3.0) * psi0_eff.to_f64() * r_h.powf(-1.5)
                - 2.0 * psi1.to_f64() * r_h.powf(-0.5)
        }
        Lambda::ThreeHalves => -2.0 * psi0.to_f64() * r_h.powf(-0.5),
    };

    // R1: subtracted integrand over the offset interval.  The bracket is a
    // catastrophic cancellation of O(1) terms down to O(R²), hence the
    // double-double evaluation before the single f64 rounding.
    let n_sub = params.lambda.n_subtractions();
    let r1_integrand = |tp: f64| -> f64 {
        let k = g.kernel_dd(tp);
        let rf = k.r.to_f64();
        if rf <= 0.0 {
            // Within root-location noise; the true bracket is O(R²) here.
            return 0.0;
        }
        let taylor = if n_sub == 2 { psi0 + psi1 * (k.r - r0) } else { psi0 };
        let bracket = g.phi_dd(tp) - (k.rdot * taylor) * dir;
        bracket.to_f64() * rf.powf(-lam)
    };
    let (a, b, w) = if dir > 0.0 {
        (root, tp_h, EndpointWeight::InvSqrtLeft)
    } else {
        (tp_h, root, EndpointWeight::InvSqrtRight)
    };
    let (r1, ok1) = accept(integrate_finite(r1_integrand, a, b, quad, w));

    // R3: regular remainder of the segment.
    let r3_integrand = |tp: f64| -> f64 {
        let (r, _, _) = g.kernel(tp);
        if r <= 0.0 {
            return 0.0;
        }
        g.phi(tp) * r.powf(-lam)
    };
    let (r3, ok3) = if dir > 0.0 {
        accept(integrate_finite(r3_integrand, tp_h, far, quad, EndpointWeight::None))
    } else if far == f64::NEG_INFINITY {
        accept(integrate_semi_infinite(r3_integrand, tp_h, quad))
    } else {
        accept(integrate_finite(r3_integrand, far, tp_h, quad, EndpointWeight::None))
    };

    Ok(FpOutcome {
        value: r1.value + r2 + r3.value,
        abs_err_estimate: r1.abs_err_estimate + r3.abs_err_estimate,
        n_evals: r1.n_evals + r3.n_evals,
        converged: ok1 && ok3,
        h_used: h,
    })
}

/// Richardson extrapolation to ε → 0 of values J(ε_i) on a geometric ladder
/// ε_i = ε₀ρ^i, with error expansion in the half-integer powers
/// ε^{1/2}, ε^{3/2}, ε^{5/2}, …
fn richardson_half_powers(j: &[f64], rho: f64) -> Result<f64, RegError> {
    let n = j.len();
    assert!(n >= 3, "need at least three ladder points");
    let mut t: Vec<Vec<f64>> = vec![j.to_vec()];
    for col in 1..n {
        let p = (2.0 * (col as f64) - 1.0) / 2.0; // kills ε^{(2col−1)/2}
        let r = rho.powf(p);
        let prev = &t[col - 1];
        let mut next = Vec::with_capacity(n - col);
        for i in 1..prev.len() {
            next.push((prev[i] - r * prev[i - 1]) / (1.0 - r));
        }
        t.push(next);
    }
    // Diagonal estimates; geometrically growing successive differences mean
    // the subtraction coefficients do not match the integral's true
    // expansion (a leftover ε^{−1/2} term grows only ×ρ^{−1/2} per rung, so
    // the ratio threshold must sit below that).
    let diag: Vec<f64> = (0..n).map(|i| t[i][0]).collect();
    let scale = diag[n - 1].abs().max(1.0);
    let last = (diag[n - 1] - diag[n - 2]).abs();
    let prev = (diag[n - 2] - diag[n - 3]).abs();
    let growing = if n >= 4 {
        let prev2 = (diag[n - 3] - diag[n - 4]).abs();
        last > 1.8 * prev && prev > 1.8 * prev2
    } else {
        last > 4.0 * prev
    };
    if growing && last > 1e-6 * scale {
        return Err(RegError::ExtrapolationUnstable { prev, last });
    }
    Ok(diag[n - 1])
}

/// Locate τ′ with R(τ′) = eps, walking from the root end into the segment and
/// bisecting.  Returns None when R never reaches eps before `far`.
fn crossing(g: &impl FpIntegrand, root: f64, far: f64, dir: f64, eps: f64) -> Option<f64> {
    let r_at = |tp: f64| g.kernel(tp).0;
    if r_at(root) >= eps {
        // {R ≥ ε} already starts at the endpoint: nothing to peel off.
        return None;
    }
    let mut step = 1e-3;
    let mut lo = root;
    let mut hi;
    loop {
        let cand = root + dir * step;
        let reached_far = if far.is_finite() {
            (cand - far) * dir >= 0.0
        } else {
            step > 1e9
        };
        let tp = if reached_far && far.is_finite() { far } else { cand };
        if r_at(tp) >= eps {
            hi = tp;
            break;
        }
        if reached_far {
            return None;
        }
        lo = tp;
        step *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if r_at(mid) >= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Independent verification of the finite part: plain integrals over {R ≥ ε},
/// subtraction of the analytically known divergent terms, Richardson
/// extrapolation ε → 0.
pub fn hadamard_oracle(
    g: &impl FpIntegrand,
    seg: &FpSegment,
    lambda: Lambda,
    eps_list: &[f64],
) -> Result<f64, RegError> {
    assert!(eps_list.len() >= 3, "need at least three ε values");
    let rho = eps_list[1] / eps_list[0];
    assert!(
        (0.0..1.0).contains(&rho),
        "eps_list must decrease geometrically"
    );
    for w in eps_list.windows(2) {
        assert!(
            (w[1] / w[0] - rho).abs() < 1e-9 * rho,
            "eps_list must decrease geometrically"
        );
    }

    let (root, far, dir) = match seg.root_end {
        RootEnd::Lower => (seg.lo, seg.hi, 1.0),
        RootEnd::Upper => (seg.hi, seg.lo, -1.0),
    };
    let (psi0, psi1) = psi_coefficients(g, root, dir);
    let (psi0, psi1) = (psi0.to_f64(), psi1.to_f64());
    let lam = lambda.exponent();

    // The ε-expansion of J(ε) only holds for rungs that the kernel actually
    // reaches inside the segment.  On short or shallow segments shrink the
    // whole ladder geometrically (same ratio) until the top rung sits safely
    // below the attained maximum of R.
    let reach = {
        let probe_far = if far.is_finite() {
            far
        } else {
            root + dir * 64.0
        };
        let mut m = 0.0_f64;
        for k in 1..=256 {
            let tp = root + (probe_far - root) * (f64::from(k) / 256.0);
            m = m.max(g.kernel(tp).0);
        }
        m
    };
    let eps_scaled: Vec<f64>;
    let eps_list = if eps_list[0] <= 0.5 * reach {
        eps_list
    } else {
        let shrink = 0.5 * reach / eps_list[0];
        eps_scaled = eps_list.iter().map(|e| e * shrink).collect();
        &eps_scaled
    };

    let tight = QuadOptions {
        tol_rel: 1e-12,
        tol_abs: 1e-16,
        max_subdivisions: 20_000,
    };
    let plain = |tp: f64| -> f64 {
        let (r, _, _) = g.kernel(tp);
        if r <= 0.0 {
            return 0.0;
        }
        g.phi(tp) * r.powf(-lam)
    };

    let mut j_ladder = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let cut = crossing(g, root, far, dir, eps);
        let (a, b, semi) = match (cut, seg.root_end) {
            (Some(c), RootEnd::Lower) => (c, far, false),
            (Some(c), RootEnd::Upper) => (far, c, far == f64::NEG_INFINITY),
            // R never dips to ε: integrate the whole segment, nothing to
            // subtract.
            (None, RootEnd::Lower) => (root, far, false),
            (None, RootEnd::Upper) => (far, root, far == f64::NEG_INFINITY),
        };
        let i_eps = if semi {
            integrate_semi_infinite(&plain, b, &tight).map_err(RegError::from)?
        } else {
            integrate_finite(&plain, a, b, &tight, EndpointWeight::None).map_err(RegError::from)?
        };
        let j = if cut.is_some() {
            match lambda {
                Lambda::FiveHalves => {
                    i_eps.value - (2.0 / 3.0) * psi0 * eps.powf(-1.5) - 2.0 * psi1 * eps.powf(-0.5)
                }
                Lambda::ThreeHalves => i_eps.value - 2.0 * psi0 * eps.powf(-0.5),
            }
        } else {
            i_eps.value
        };
        j_ladder.push(j);
    }

    richardson_half_powers(&j_ladder, rho)
}

/// A convenient geometric ε ladder for the oracle.  It stays deliberately
/// shallow: I(ε) grows like ε^{−3/2}, so relative quadrature noise on the
/// deepest rung is what limits the oracle's absolute accuracy.
pub fn default_eps_list() -> Vec<f64> {
    (0..7).map(|i| 0.2 * 0.5f64.powi(i)).collect()
}
