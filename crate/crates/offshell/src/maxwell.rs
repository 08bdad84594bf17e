//! Analytic Maxwell-side references: Liénard-Wiechert potentials with an
//! independent retarded-root finder, the closed-form azimuthal magnetic
//! field H_φ of a uniformly accelerated charge, and the Lorentz-Dirac
//! radiation-reaction force.
//!
//! # Normalization of the retarded denominator
//!
//! The Liénard-Wiechert potential is written here as
//!
//! ```text
//!     A^μ(x) = e ż^μ(s₀) / (2π |Ṙ₄(s₀)|),     Ṙ₄(s) = 2 ż·(x − z(s)),
//! ```
//!
//! where s₀ is the Einstein-retarded root of R₄(s) = −(x−z(s))·(x−z(s))
//! with t > z⁰(s₀).  The absolute value fixes a sign convention that the
//! static limit pins down: for a charge at rest, s₀ = t − r and, in the
//! (−,+,+,+) metric used throughout this crate,
//!
//! ```text
//!     ż·(x − z(s₀)) = η₀₀ · 1 · (t − s₀) = −r,   so  Ṙ₄(s₀) = −2r,
//! ```
//!
//! and only |Ṙ₄| reproduces the Coulomb potential A⁰ = e/(4πr) > 0.
//! (Equivalently: the conventional retarded denominator is the source's
//! rest-frame distance, which is the magnitude of ż·(x−z) regardless of
//! which metric signature the surrounding formulas were written in.)

use crate::core::{CoreError, Worldline, EXP_ARG_MAX};
use crate::dd::Dd;
use crate::roots::{scan_roots, RootRecord, RootsError, ScanCurve, ScanOptions};
use thiserror::Error;

/// Azimuthal Maxwell magnetic field of the uniformly accelerated charge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxwellField {
    pub h_phi: f64,
    pub region: Region,
}

/// Causal region of the accelerated charge's field: everything behind the
/// rigid front x + t = 0 is identically zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// x + t < 0: no retarded signal reaches the observation point.
    Gated,
    Active,
}

#[derive(Debug, Error)]
pub enum MaxwellError {
    #[error("no Einstein-retarded root below the observation time")]
    NoRetardedRoot,
    #[error("retarded root is shock-singular: |dR/ds| = {rdot_abs:.3e} at the root")]
    ShockSingular { rdot_abs: f64 },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// 4D squared-interval curve R₄(s) = −(x−z(s))·(x−z(s)) in the same
/// reduced-coefficient representations as the 5D kernel, exposing the
/// [`ScanCurve`] interface so the generic scanner can cross-check the
/// dedicated closed-form root finder.
pub struct IntervalCurve {
    form: Interval4,
}

enum Interval4 {
    /// R₄ = a4 − bm·e^{gs} + bp·e^{−gs}.
    Hyperbolic { g: f64, a4: Dd, bm: Dd, bp: Dd },
    /// R₄ = c0 + c1·s + c2·s².
    Poly { c0: Dd, c1: Dd, c2: Dd },
}

impl IntervalCurve {
    pub fn new(obs4: [f64; 4], w: &Worldline) -> IntervalCurve {
        let form = match *w {
            Worldline::Hyperbolic { g, z0, t0 } => {
                let tt = Dd::from_f64(obs4[0]) - t0;
                let xt = Dd::from_f64(obs4[1]) - z0;
                let rho2 = Dd::from_prod(obs4[2], obs4[2]) + Dd::from_prod(obs4[3], obs4[3]);
                let ginv = Dd::ONE / g;
                Interval4::Hyperbolic {
                    g,
                    a4: tt.sqr() - xt.sqr() - rho2 - ginv.sqr(),
                    bm: (tt - xt) * ginv,
                    bp: (tt + xt) * ginv,
                }
            }
            Worldline::Uniform { u, x0 } => poly4(obs4, &u, &x0),
            Worldline::Static { x0 } => poly4(obs4, &[1.0, 0.0, 0.0, 0.0], &x0),
        };
        IntervalCurve { form }
    }

    fn eval_dd(&self, s: f64) -> Result<(Dd, Dd, f64), CoreError> {
        match self.form {
            Interval4::Hyperbolic { g, a4, bm, bp } => {
                let u = Dd::from_prod(g, s);
                if u.hi.abs() > EXP_ARG_MAX {
                    return Err(CoreError::RangeExceeded {
                        arg: u.hi.abs(),
                        max: EXP_ARG_MAX,
                    });
                }
                let e = Dd::exp(u);
                let em = e.recip();
                let r = a4 - bm * e + bp * em;
                let rdot = (bp * em + bm * e) * -g;
                let rddot = -g * g * (bm * e - bp * em).to_f64();
                Ok((r, rdot, rddot))
            }
            Interval4::Poly { c0, c1, c2 } => {
                let sd = Dd::from_f64(s);
                let r = c0 + sd * (c1 + sd * c2);
                let rdot = c1 + sd * (c2 + c2);
                Ok((r, rdot, 2.0 * c2.to_f64()))
            }
        }
    }
}

fn poly4(obs4: [f64; 4], u: &[f64; 4], x0: &[f64; 4]) -> Interval4 {
    // R₄(s) = −(d − u s)·(d − u s) = −d·d + 2s u·d + s²(−u·u), d = x − x0.
    let eta = [-1.0, 1.0, 1.0, 1.0];
    let mut dd = Dd::ZERO;
    let mut ud = Dd::ZERO;
    let mut uu = Dd::ZERO;
    for i in 0..4 {
        let d = Dd::from_f64(obs4[i]) - x0[i];
        dd = dd + d.sqr() * eta[i];
        ud = ud + d * u[i] * eta[i];
        uu = uu + Dd::from_prod(u[i], u[i]) * eta[i];
    }
    Interval4::Poly {
        c0: -dd,
        c1: ud.scale2(1),
        c2: -uu,
    }
}

impl ScanCurve for IntervalCurve {
    fn eval3(&self, s: f64) -> Result<(f64, f64, f64), CoreError> {
        let (r, rdot, rddot) = self.eval_dd(s)?;
        Ok((r.to_f64(), rdot.to_f64(), rddot))
    }

    fn eval_refine(&self, s: f64) -> Result<(Dd, f64), CoreError> {
        let (r, rdot, _) = self.eval_dd(s)?;
        Ok((r, rdot.to_f64()))
    }

    fn scale(&self, s: f64) -> f64 {
        match self.form {
            Interval4::Hyperbolic { g, a4, bm, bp } => {
                let u = g * s;
                let ep = if u.abs() > EXP_ARG_MAX { f64::MAX } else { u.exp() };
                let em = if u.abs() > EXP_ARG_MAX { f64::MAX } else { (-u).exp() };
                let sum = a4.hi.abs() + bm.hi.abs() * ep + bp.hi.abs() * em;
                if sum.is_finite() {
                    sum
                } else {
                    f64::MAX
                }
            }
            Interval4::Poly { c0, c1, c2 } => {
                c0.hi.abs() + c1.hi.abs() * s.abs() + c2.hi.abs() * s * s
            }
        }
    }

    fn tail_certificate(&self, dominance: f64, hi: f64) -> Option<(f64, f64)> {
        match self.form {
            Interval4::Hyperbolic { g, a4, bm, bp } => {
                if bp.hi != 0.0 {
                    // bp e^{−gs} must dominate the other two terms; work in
                    // log space and walk down by doubling distance.
                    let mut dist = 1.0;
                    let anchor = hi.min(0.0);
                    for _ in 0..200 {
                        let t = anchor - dist;
                        let gt = g * t;
                        if gt.abs() > EXP_ARG_MAX {
                            return None;
                        }
                        let rest = dominance * (a4.hi.abs() + bm.hi.abs() * (gt).exp());
                        if bp.hi.abs() * (-gt).exp() >= rest {
                            return Some((t, bp.hi.signum()));
                        }
                        dist *= 2.0;
                    }
                    None
                } else if a4.hi != 0.0 {
                    let mut dist = 1.0;
                    let anchor = hi.min(0.0);
                    for _ in 0..300 {
                        let t = anchor - dist;
                        let gt = g * t;
                        let decay = if gt.abs() > EXP_ARG_MAX { 0.0 } else { gt.exp() };
                        if a4.hi.abs() >= dominance * bm.hi.abs() * decay {
                            return Some((t, a4.hi.signum()));
                        }
                        dist *= 2.0;
                    }
                    None
                } else if bm.hi != 0.0 {
                    // R₄ = −bm e^{gs}: one sign on the whole line.
                    Some((hi, -bm.hi.signum()))
                } else {
                    None
                }
            }
            Interval4::Poly { c0, c1, c2 } => {
                if c2.hi != 0.0 {
                    let mut dist = 1.0;
                    let anchor = hi.min(0.0);
                    for _ in 0..300 {
                        let t = anchor - dist;
                        if c2.hi.abs() * t * t >= dominance * (c0.hi.abs() + c1.hi.abs() * t.abs())
                        {
                            return Some((t, c2.hi.signum()));
                        }
                        dist *= 2.0;
                    }
                    None
                } else if c1.hi != 0.0 {
                    let t = hi.min(0.0) - dominance * c0.hi.abs() / c1.hi.abs() - 1.0;
                    Some((t, -c1.hi.signum()))
                } else if c0.hi != 0.0 {
                    Some((hi, c0.hi.signum()))
                } else {
                    None
                }
            }
        }
    }
}

/// Largest s compatible with the retardation condition z⁰(s) < t.
fn retardation_bound(obs4: [f64; 4], w: &Worldline) -> f64 {
    match *w {
        Worldline::Hyperbolic { g, t0, .. } => (g * (obs4[0] - t0)).asinh() / g,
        Worldline::Uniform { u, x0 } => (obs4[0] - x0[0]) / u[0],
        Worldline::Static { x0 } => obs4[0] - x0[0],
    }
}

/// Closed-form Einstein-retarded root of R₄(s) = 0 with t > z⁰(s₀).
fn retarded_root(obs4: [f64; 4], w: &Worldline) -> Result<f64, MaxwellError> {
    let s_max = retardation_bound(obs4, w);
    match *w {
        Worldline::Hyperbolic { g, z0, t0 } => {
            // In w = e^{gs}: bm·w² − a4·w − bp = 0.
            let tt = obs4[0] - t0;
            let xt = obs4[1] - z0;
            let rho2 = obs4[2] * obs4[2] + obs4[3] * obs4[3];
            let a4 = tt * tt - xt * xt - rho2 - 1.0 / (g * g);
            let bm = (tt - xt) / g;
            let bp = (tt + xt) / g;
            let mut candidates: Vec<f64> = Vec::new();
            if bm == 0.0 {
                if a4 != 0.0 && bp / a4 < 0.0 {
                    candidates.push((-bp / a4).ln() / g);
                }
            } else {
                let disc = a4 * a4 + 4.0 * bm * bp;
                if disc >= 0.0 {
                    // Numerically stable quadratic: q = (a4 + sign(a4)√disc)/2.
                    let q = 0.5 * (a4 + a4.signum() * disc.sqrt());
                    for wv in [q / bm, if q != 0.0 { -bp / q } else { f64::NAN }] {
                        if wv.is_finite() && wv > 0.0 {
                            candidates.push(wv.ln() / g);
                        }
                    }
                }
            }
            candidates.retain(|&s| s < s_max);
            candidates
                .into_iter()
                .min_by(|a, b| a.total_cmp(b))
                .ok_or(MaxwellError::NoRetardedRoot)
        }
        Worldline::Uniform { u, x0 } => {
            // R₄ = −d·d + 2s(u·d) − s²(u·u); retarded root is the smaller one.
            let eta = [-1.0, 1.0, 1.0, 1.0];
            let mut dd = 0.0;
            let mut ud = 0.0;
            let mut uu = 0.0;
            for i in 0..4 {
                let d = obs4[i] - x0[i];
                dd += eta[i] * d * d;
                ud += eta[i] * u[i] * d;
                uu += eta[i] * u[i] * u[i];
            }
            // (−uu)s² + 2(ud)s − dd = 0, −uu > 0 for timelike u; the
            // quarter-discriminant is (ud)² + (−uu)(dd).
            let a = -uu;
            let disc = ud * ud + a * dd;
            if disc < 0.0 || a <= 0.0 {
                return Err(MaxwellError::NoRetardedRoot);
            }
            let s0 = (-ud - disc.sqrt()) / a;
            if s0 < s_max {
                Ok(s0)
            } else {
                Err(MaxwellError::NoRetardedRoot)
            }
        }
        Worldline::Static { x0 } => {
            let r = ((obs4[1] - x0[1]).powi(2)
                + (obs4[2] - x0[2]).powi(2)
                + (obs4[3] - x0[3]).powi(2))
            .sqrt();
            Ok(obs4[0] - x0[0] - r)
        }
    }
}

/// Liénard-Wiechert 4-potential A^μ = e ż^μ(s₀) / (2π |Ṙ₄(s₀)|).
pub fn lw_potential(obs4: [f64; 4], w: &Worldline, e: f64) -> Result<[f64; 4], MaxwellError> {
    let s0 = retarded_root(obs4, w)?;
    let st = w.state(s0)?;
    let eta = [-1.0, 1.0, 1.0, 1.0];
    let mut zdot_d = 0.0;
    let mut shock_scale = 0.0;
    for i in 0..4 {
        let term = eta[i] * st.zdot[i] * (obs4[i] - st.z[i]);
        zdot_d += term;
        shock_scale += term.abs();
    }
    let rdot = 2.0 * zdot_d;
    if rdot.abs() <= 1e-12 * (2.0 * shock_scale).max(f64::MIN_POSITIVE) {
        return Err(MaxwellError::ShockSingular {
            rdot_abs: rdot.abs(),
        });
    }
    let denom = 2.0 * std::f64::consts::PI * rdot.abs();
    Ok([
        e * st.zdot[0] / denom,
        e * st.zdot[1] / denom,
        e * st.zdot[2] / denom,
        e * st.zdot[3] / denom,
    ])
}

/// Retarded root as seen by the generic scanner on the 4D interval curve
/// (cross-check surface for the closed-form finder).
pub fn retarded_root_scanned(
    obs4: [f64; 4],
    w: &Worldline,
    opts: &ScanOptions,
) -> Result<Vec<RootRecord>, RootsError> {
    let curve = IntervalCurve::new(obs4, w);
    scan_roots(&curve, retardation_bound(obs4, w), opts)
}

/// Azimuthal magnetic field of a charge in uniform acceleration g along x,
/// axially symmetric in ρ.  Everything behind the front x + t = 0 is
/// identically zero (gated); on and ahead of the front,
///
/// ```text
///     H_φ = 8 e g⁻² ρ t / [ (g⁻² − ρ² + t² − x²)² + 4 g⁻² ρ² ]^{3/2}.
/// ```
pub fn hphi_hyperbolic(t: f64, x: f64, rho: f64, e: f64, g: f64) -> MaxwellField {
    if x + t < 0.0 {
        return MaxwellField {
            h_phi: 0.0,
            region: Region::Gated,
        };
    }
    let g2inv = 1.0 / (g * g);
    let base = g2inv - rho * rho + t * t - x * x;
    let denom = (base * base + 4.0 * g2inv * rho * rho).powf(1.5);
    MaxwellField {
        h_phi: 8.0 * e * g2inv * rho * t / denom,
        region: Region::Active,
    }
}

/// Lorentz-Dirac radiation-reaction force
/// Γ^μ = (2e²/3)·[⃛z^μ − (⃛z·ż)/(ż·ż) ż^μ], the projection of ⃛z orthogonal
/// to the 4-velocity.  Because ż·z̈ = 0 implies ⃛z·ż = −z̈·z̈, this is the
/// familiar (⃛z + z̈² ż) combination written so that it is correct in either
/// metric-signature convention; for uniform acceleration ⃛z ∝ ż exactly and
/// the projection vanishes identically.
pub fn ld_radiation_reaction(w: &Worldline, tau: f64, e: f64) -> Result<[f64; 4], CoreError> {
    let st = w.state(tau)?;
    Ok(ld_force_from_kinematics(st.zdot, st.zdddot, e))
}

/// The projected force from raw kinematic data (see
/// [`ld_radiation_reaction`] for the formula).
pub fn ld_force_from_kinematics(zdot: [f64; 4], zdddot: [f64; 4], e: f64) -> [f64; 4] {
    let eta = [-1.0, 1.0, 1.0, 1.0];
    let mut z3_zdot = 0.0;
    let mut zdot_zdot = 0.0;
    for i in 0..4 {
        z3_zdot += eta[i] * zdddot[i] * zdot[i];
        zdot_zdot += eta[i] * zdot[i] * zdot[i];
    }
    let c = z3_zdot / zdot_zdot;
    let pref = 2.0 * e * e / 3.0;
    [
        pref * (zdddot[0] - c * zdot[0]),
        pref * (zdddot[1] - c * zdot[1]),
        pref * (zdddot[2] - c * zdot[2]),
        pref * (zdddot[3] - c * zdot[3]),
    ]
}
