//! Metric signatures, five-vectors, source worldlines, and the retardation
//! kernel R(τ′).
//!
//! Observation events live in five dimensions (t, x, y, z, τ) with the 4D
//! Minkowski metric η = diag(−,+,+,+) and a fifth diagonal entry σ₅ = ±1
//! (O(4,1) for +1, O(3,2) for −1).  For a source on a worldline z^μ(τ′) with
//! z⁵(τ′) ≡ τ′, the kernel entering every worldline integral is
//!
//! ```text
//!   R(τ′) = −σ₅ [ (x − z(τ′))·(x − z(τ′)) + σ₅ (τ − τ′)² ]
//! ```
//!
//! whose zeros are the intersections of the source history with the 5D light
//! cone of the observation point.  Everything downstream (root scans,
//! finite-part weights, integrand brackets) consumes R together with Ṙ, R̈
//! and the observation-point gradient ∂^αR.
//!
//! Numerically, R is a difference of terms that can dwarf the result, so each
//! worldline reduces R to a small set of per-observation double-double
//! coefficients multiplying e^{±gτ′} or powers of τ′.  That structured form
//! keeps the absolute evaluation noise at ~1e-31 of the *largest surviving
//! term* — in particular, an exactly vanishing e^{−gτ′} coefficient (an
//! observation on the t + x = 0 line) stays exactly absent instead of being
//! resurrected by roundoff of squared displacements.

use crate::dd::Dd;
use thiserror::Error;

/// Largest |g·τ′| (or |τ′| growth equivalent) at which hyperbolic worldline
/// exponentials are evaluated; beyond this cosh/sinh overflow f64.
pub const EXP_ARG_MAX: f64 = 690.0;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("worldline evaluation out of range: |argument| = {arg:.3e} exceeds {max:.3e} (cosh/sinh overflow)")]
    RangeExceeded { arg: f64, max: f64 },
}

/// Metric signature of the 5D flat space: σ₅ is the sign of the ττ entry.
///
/// `p_eff` is the number of plus signs in the quadratic form whose positive
/// side is the retarded support (the "cone form" −σ₅[x² + σ₅τ²]): 1 for
/// O(4,1) and 3 for O(3,2).  `q_eff` is its complement in 4 spacetime signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    /// σ₅ = +1 (O(4,1)).
    OFourOne,
    /// σ₅ = −1 (O(3,2)).
    OThreeTwo,
}

impl Signature {
    #[inline]
    pub fn sigma5(self) -> f64 {
        match self {
            Signature::OFourOne => 1.0,
            Signature::OThreeTwo => -1.0,
        }
    }

    /// Plus-count of the cone quadratic form.
    #[inline]
    pub fn p_eff(self) -> u32 {
        match self {
            Signature::OFourOne => 1,
            Signature::OThreeTwo => 3,
        }
    }

    /// Minus-count of the cone quadratic form (m − 1 − p_eff for m = 5).
    #[inline]
    pub fn q_eff(self) -> u32 {
        4 - self.p_eff()
    }

    /// Parses "41" / "32" (as in the CLI's `--sig` flag).
    pub fn from_flag(s: &str) -> Option<Signature> {
        match s {
            "41" => Some(Signature::OFourOne),
            "32" => Some(Signature::OThreeTwo),
            _ => None,
        }
    }
}

/// An observation event (t, x, y, z, τ).  Components must be finite.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FiveVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub tau: f64,
}

impl FiveVector {
    pub fn new(t: f64, x: f64, y: f64, z: f64, tau: f64) -> FiveVector {
        let v = FiveVector { t, x, y, z, tau };
        debug_assert!(v.is_finite(), "non-finite observation point {v:?}");
        v
    }

    /// Observation in the axisymmetric (t, x, ρ, τ) frame, placed at y = ρ,
    /// z = 0.
    pub fn axisym(t: f64, x: f64, rho: f64, tau: f64) -> FiveVector {
        FiveVector::new(t, x, rho, 0.0, tau)
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.x.is_finite()
            && self.y.is_finite()
            && self.z.is_finite()
            && self.tau.is_finite()
    }

    /// Cylindrical radius about the x axis.
    #[inline]
    pub fn rho(&self) -> f64 {
        self.y.hypot(self.z)
    }
}

/// Boost-shift map of the hyperbolic configuration: a (t, x) boost of
/// rapidity −gα combined with τ → τ − α.  For a centered hyperbola
/// (t0 = z0 = 0) this relabels the source history, z(τ′) → z(τ′ − α), so the
/// kernel obeys R(τ′; obs) = R(τ′ − α; boost_shift(obs, α, g)) exactly and
/// every cone root shifts by −α.
pub fn boost_shift(obs: FiveVector, alpha: f64, g: f64) -> FiveVector {
    let (c, s) = ((g * alpha).cosh(), (g * alpha).sinh());
    FiveVector::new(
        obs.t * c - obs.x * s,
        obs.x * c - obs.t * s,
        obs.y,
        obs.z,
        obs.tau - alpha,
    )
}

/// Source worldline z^μ(τ′); the fifth component is always z⁵(τ′) ≡ τ′.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Worldline {
    /// Uniformly accelerated motion in the (t, x) plane:
    /// z⁰ = t0 + sinh(gτ′)/g, z¹ = z0 + cosh(gτ′)/g.
    Hyperbolic { g: f64, z0: f64, t0: f64 },
    /// Inertial motion z^μ = x0^μ + u^μ τ′ with normalized 4-velocity u.
    Uniform { u: [f64; 4], x0: [f64; 4] },
    /// At rest at x0 (u = (1,0,0,0)).
    Static { x0: [f64; 4] },
}

/// Kinematic state of the worldline at one τ′.
#[derive(Clone, Copy, Debug)]
pub struct WorldlineState {
    pub z: [f64; 4],
    pub zdot: [f64; 4],
    pub zddot: [f64; 4],
    pub zdddot: [f64; 4],
}

impl Worldline {
    /// The g = 1 hyperbola through (t, x) = (0, 1):  x = cosh τ′, t = sinh τ′.
    pub fn hyperbolic_unit() -> Worldline {
        Worldline::Hyperbolic {
            g: 1.0,
            z0: 0.0,
            t0: 0.0,
        }
    }

    /// z, ż, z̈, z⃛ at τ′.
    ///
    /// # Errors
    /// `RangeExceeded` when a hyperbolic worldline is evaluated where
    /// cosh(gτ′) overflows.
    pub fn state(&self, tau_src: f64) -> Result<WorldlineState, CoreError> {
        match *self {
            Worldline::Hyperbolic { g, z0, t0 } => {
                let u = g * tau_src;
                if u.abs() > EXP_ARG_MAX {
                    return Err(CoreError::RangeExceeded {
                        arg: u.abs(),
                        max: EXP_ARG_MAX,
                    });
                }
                let (c, s) = (u.cosh(), u.sinh());
                Ok(WorldlineState {
                    z: [t0 + s / g, z0 + c / g, 0.0, 0.0],
                    zdot: [c, s, 0.0, 0.0],
                    zddot: [g * s, g * c, 0.0, 0.0],
                    zdddot: [g * g * c, g * g * s, 0.0, 0.0],
                })
            }
            Worldline::Uniform { u, x0 } => Ok(WorldlineState {
                z: [
                    x0[0] + u[0] * tau_src,
                    x0[1] + u[1] * tau_src,
                    x0[2] + u[2] * tau_src,
                    x0[3] + u[3] * tau_src,
                ],
                zdot: u,
                zddot: [0.0; 4],
                zdddot: [0.0; 4],
            }),
            Worldline::Static { x0 } => Ok(WorldlineState {
                z: [x0[0] + tau_src, x0[1], x0[2], x0[3]],
                zdot: [1.0, 0.0, 0.0, 0.0],
                zddot: [0.0; 4],
                zdddot: [0.0; 4],
            }),
        }
    }

    /// Position and velocity at τ′ in double-double.  Differences of these
    /// states cancel exactly where the geometry says they must (straight-line
    /// displacements stay proportional to the velocity to ~1e-32), which the
    /// plain f64 [`Worldline::state`] cannot guarantee.
    ///
    /// # Errors
    /// `RangeExceeded` when a hyperbolic worldline is evaluated where
    /// cosh(gτ′) overflows.
    pub fn state_dd(&self, tau_src: f64) -> Result<SourceStateDd, CoreError> {
        match *self {
            Worldline::Hyperbolic { g, z0, t0 } => {
                let u = Dd::from_prod(g, tau_src);
                if u.hi.abs() > EXP_ARG_MAX {
                    return Err(CoreError::RangeExceeded {
                        arg: u.hi.abs(),
                        max: EXP_ARG_MAX,
                    });
                }
                let (c, s) = Dd::cosh_sinh(u);
                let ginv = Dd::ONE / g;
                Ok(SourceStateDd {
                    z: [s * ginv + t0, c * ginv + z0, Dd::ZERO, Dd::ZERO],
                    zdot: [c, s, Dd::ZERO, Dd::ZERO],
                })
            }
            Worldline::Uniform { u, x0 } => Ok(SourceStateDd {
                z: [
                    Dd::from_prod(u[0], tau_src) + x0[0],
                    Dd::from_prod(u[1], tau_src) + x0[1],
                    Dd::from_prod(u[2], tau_src) + x0[2],
                    Dd::from_prod(u[3], tau_src) + x0[3],
                ],
                zdot: [
                    Dd::from_f64(u[0]),
                    Dd::from_f64(u[1]),
                    Dd::from_f64(u[2]),
                    Dd::from_f64(u[3]),
                ],
            }),
            Worldline::Static { x0 } => Ok(SourceStateDd {
                z: [
                    Dd::from_f64(tau_src) + x0[0],
                    Dd::from_f64(x0[1]),
                    Dd::from_f64(x0[2]),
                    Dd::from_f64(x0[3]),
                ],
                zdot: [Dd::ONE, Dd::ZERO, Dd::ZERO, Dd::ZERO],
            }),
        }
    }
}

/// z, ż, z̈, z⃛ at τ′ (free-function form of [`Worldline::state`]).
pub fn worldline_state(w: &Worldline, tau_src: f64) -> Result<WorldlineState, CoreError> {
    w.state(tau_src)
}

/// Kernel data at one source parameter value.
///
/// `grad_r` holds ∂^αR with respect to the observation point: the spacetime
/// components carry the 4D-raised index, −2σ₅(x−z(τ′))^μ, and the fifth slot
/// is the plain τ-derivative ∂R/∂τ = −2(τ−τ′).
#[derive(Clone, Copy, Debug)]
pub struct KernelState {
    pub tau_src: f64,
    pub r: f64,
    pub rdot: f64,
    pub rddot: f64,
    pub grad_r: [f64; 5],
}

/// Compensated kernel values at one τ′.
#[derive(Clone, Copy, Debug)]
pub struct KernelDd {
    pub r: Dd,
    pub rdot: Dd,
    pub rddot: f64,
}

/// Source kinematics at one τ′ in double-double precision (4D parts; the
/// fifth components are z⁵ = τ′ and ż⁵ = 1 identically).
#[derive(Clone, Copy, Debug)]
pub struct SourceStateDd {
    pub z: [Dd; 4],
    pub zdot: [Dd; 4],
}

/// Reduced per-observation representation of R(τ′).
#[derive(Clone, Copy, Debug)]
enum CurveForm {
    /// S(τ′) = a4 − bm·e^{gτ′} + bp·e^{−gτ′}, R = σ₅S − (τ−τ′)², where
    /// S = (x−z)² with the (+,−,−,−)-style overall sign (S = dt²−|dx⃗|²).
    Hyperbolic { g: f64, a4: Dd, bm: Dd, bp: Dd },
    /// R(τ′) = c0 + c1·τ′ + c2·τ′² exactly (uniform and static worldlines;
    /// c2 = 0 when σ₅ = +1 and the 4-velocity is normalized).
    Poly { c0: Dd, c1: Dd, c2: Dd },
}

/// R(τ′) and its derivatives for one observation point: precomputes the
/// double-double coefficient reduction once, then evaluates per τ′.
pub struct KernelCurve {
    pub obs: FiveVector,
    pub w: Worldline,
    pub sig: Signature,
    form: CurveForm,
}

impl KernelCurve {
    pub fn new(obs: FiveVector, w: &Worldline, sig: Signature) -> KernelCurve {
        let s5 = sig.sigma5();
        let form = match *w {
            Worldline::Hyperbolic { g, z0, t0 } => {
                let tt = Dd::from_f64(obs.t) - t0;
                let xt = Dd::from_f64(obs.x) - z0;
                let rho2 = Dd::from_prod(obs.y, obs.y) + Dd::from_prod(obs.z, obs.z);
                let ginv = Dd::ONE / g;
                // S = (t̃² − x̃² − ρ² − 1/g²) − ((t̃−x̃)/g)e^{gτ′} + ((t̃+x̃)/g)e^{−gτ′}
                let a4 = tt.sqr() - xt.sqr() - rho2 - ginv.sqr();
                let bm = (tt - xt) * ginv;
                let bp = (tt + xt) * ginv;
                CurveForm::Hyperbolic { g, a4, bm, bp }
            }
            Worldline::Uniform { u, x0 } => poly_form(&obs, &u, &x0, s5),
            Worldline::Static { x0 } => poly_form(&obs, &[1.0, 0.0, 0.0, 0.0], &x0, s5),
        };
        KernelCurve {
            obs,
            w: *w,
            sig,
            form,
        }
    }

    /// R, Ṙ (double-double) and R̈ (f64) at τ′.
    pub fn eval_dd(&self, tp: f64) -> Result<KernelDd, CoreError> {
        let s5 = self.sig.sigma5();
        match self.form {
            CurveForm::Hyperbolic { g, a4, bm, bp } => {
                let u = Dd::from_prod(g, tp);
                if u.hi.abs() > EXP_ARG_MAX {
                    return Err(CoreError::RangeExceeded {
                        arg: u.hi.abs(),
                        max: EXP_ARG_MAX,
                    });
                }
                let e = Dd::exp(u);
                let ei = e.recip();
                let dt = Dd::from_f64(self.obs.tau) - tp;
                let s = a4 - bm * e + bp * ei;
                let sdot = (bm * e + bp * ei) * (-g);
                let sddot = (bm * e - bp * ei) * (-g * g);
                Ok(KernelDd {
                    r: s * s5 - dt.sqr(),
                    rdot: sdot * s5 + dt * 2.0,
                    rddot: (sddot * s5).to_f64() - 2.0,
                })
            }
            CurveForm::Poly { c0, c1, c2 } => {
                let t = Dd::from_f64(tp);
                Ok(KernelDd {
                    r: (c2 * t + c1) * t + c0,
                    rdot: c2 * t * 2.0 + c1,
                    rddot: 2.0 * c2.to_f64(),
                })
            }
        }
    }

    /// Kernel values together with the source kinematics, sharing one
    /// exponential evaluation (the hot path of integrand assembly).
    pub fn eval_with_source(&self, tp: f64) -> Result<(KernelDd, SourceStateDd), CoreError> {
        let k = self.eval_dd(tp)?;
        let src = self.w.state_dd(tp)?;
        Ok((k, src))
    }

    /// Magnitude scale of R at τ′: the sum of the absolute values of its
    /// constituent terms.  Root residuals and shock thresholds are relative
    /// to this.
    pub fn scale(&self, tp: f64) -> f64 {
        let dt2 = {
            let d = self.obs.tau - tp;
            d * d
        };
        match self.form {
            CurveForm::Hyperbolic { g, a4, bm, bp } => {
                let u = g * tp;
                // ln-space guard: treat overflowing terms as f64::MAX.
                let em = if u.abs() > EXP_ARG_MAX {
                    f64::MAX
                } else {
                    u.exp()
                };
                let ep = if u.abs() > EXP_ARG_MAX { f64::MAX } else { (-u).exp() };
                a4.hi.abs() + (bm.hi * em).abs() + (bp.hi * ep).abs() + dt2
            }
            CurveForm::Poly { c0, c1, c2 } => {
                c0.hi.abs() + (c1.hi * tp).abs() + (c2.hi * tp * tp).abs()
            }
        }
    }

    /// Certified lower tail: Some((t_lo, sign)) such that R carries the
    /// constant sign `sign` on (−∞, t_lo], established by making one term
    /// dominate the sum of all others by at least `dominance`.  Returns None
    /// when certification would need exponential arguments beyond the
    /// representable range (e.g. a nonzero but absurdly small e^{−gτ′}
    /// coefficient), which callers must surface as an inconclusive scan
    /// rather than guess.
    pub fn tail_certificate(&self, dominance: f64, hi: f64) -> Option<(f64, f64)> {
        let s5 = self.sig.sigma5();
        let tau = self.obs.tau;
        let anchor = hi.min(0.0);
        match self.form {
            CurveForm::Hyperbolic { g, a4, bm, bp } => {
                if bp.hi == 0.0 {
                    // Exactly absent growing coefficient (null-line
                    // observation): −(τ−τ′)² dominates quadratically.
                    let mut dist = 1.0;
                    for _ in 0..200 {
                        let t = anchor - dist;
                        if g * t.abs() > EXP_ARG_MAX {
                            return None;
                        }
                        let quad = (tau - t) * (tau - t);
                        let rest = a4.hi.abs() + (bm.hi * (g * t).exp()).abs();
                        if quad >= dominance * rest {
                            return Some((t, -1.0));
                        }
                        dist *= 2.0;
                    }
                    None
                } else {
                    // ln-space dominance test for |bp|e^{−gτ′} against the
                    // decaying, constant and quadratic terms.
                    let lbp = bp.hi.abs().ln();
                    let mut dist = 1.0;
                    for _ in 0..200 {
                        let t = anchor - dist;
                        if g * t.abs() > EXP_ARG_MAX {
                            return None;
                        }
                        let rest =
                            a4.hi.abs() + (bm.hi * (g * t).exp()).abs() + (tau - t) * (tau - t);
                        if lbp - g * t >= (dominance * rest).ln() {
                            return Some((t, (s5 * bp.hi).signum()));
                        }
                        dist *= 2.0;
                    }
                    None
                }
            }
            CurveForm::Poly { c0, c1, c2 } => {
                let (c0, c1, c2) = (c0.hi, c1.hi, c2.hi);
                if c2 != 0.0 {
                    let mut dist = 1.0;
                    for _ in 0..300 {
                        let t = anchor - dist;
                        if c2.abs() * t * t >= dominance * (c0.abs() + (c1 * t).abs()) {
                            return Some((t, c2.signum()));
                        }
                        dist *= 2.0;
                    }
                    None
                } else if c1 != 0.0 {
                    // R ~ c1·τ′: sign −sign(c1) for τ′ → −∞.
                    let t = (anchor - dominance * c0.abs() / c1.abs()) - 1.0;
                    Some((t, -c1.signum()))
                } else if c0 != 0.0 {
                    Some((hi, c0.signum()))
                } else {
                    None // R ≡ 0: the whole line sits on the cone.
                }
            }
        }
    }
}

/// Exact polynomial reduction of R(τ′) for inertial worldlines:
/// R = σ₅·[−d·d + 2τ′(u·d) + τ′²(−u·u)] − (τ−τ′)²  with d = x − x0.
fn poly_form(obs: &FiveVector, u: &[f64; 4], x0: &[f64; 4], s5: f64) -> CurveForm {
    let d = [
        Dd::from_f64(obs.t) - x0[0],
        Dd::from_f64(obs.x) - x0[1],
        Dd::from_f64(obs.y) - x0[2],
        Dd::from_f64(obs.z) - x0[3],
    ];
    // Minkowski dots in dd (η = diag(−,+,+,+)).
    let ddot = -d[0].sqr() + d[1].sqr() + d[2].sqr() + d[3].sqr();
    let udot_d = -(d[0] * u[0]) + d[1] * u[1] + d[2] * u[2] + d[3] * u[3];
    let uu = Dd::from_prod(-u[0], u[0])
        + Dd::from_prod(u[1], u[1])
        + Dd::from_prod(u[2], u[2])
        + Dd::from_prod(u[3], u[3]);
    let tau = Dd::from_f64(obs.tau);
    // R = σ₅(−d·d) − τ²  +  τ′·(2σ₅ u·d + 2τ)  +  τ′²·(−σ₅ u·u − 1)
    let c0 = -ddot * s5 - tau.sqr();
    let c1 = udot_d * (2.0 * s5) + tau * 2.0;
    let c2 = -uu * s5 - 1.0;
    CurveForm::Poly { c0, c1, c2 }
}

/// R(τ′), Ṙ, R̈ and ∂^αR at one source parameter value.
pub fn kernel_state(
    obs: FiveVector,
    w: &Worldline,
    tau_src: f64,
    sig: Signature,
) -> Result<KernelState, CoreError> {
    let curve = KernelCurve::new(obs, w, sig);
    curve.kernel_state(tau_src)
}

impl KernelCurve {
    /// f64 [`KernelState`] view (rounded from the compensated evaluation).
    pub fn kernel_state(&self, tau_src: f64) -> Result<KernelState, CoreError> {
        let k = self.eval_dd(tau_src)?;
        let st = self.w.state(tau_src)?;
        let s5 = self.sig.sigma5();
        let grad_r = [
            -2.0 * s5 * (self.obs.t - st.z[0]),
            -2.0 * s5 * (self.obs.x - st.z[1]),
            -2.0 * s5 * (self.obs.y - st.z[2]),
            -2.0 * s5 * (self.obs.z - st.z[3]),
            -2.0 * (self.obs.tau - tau_src),
        ];
        Ok(KernelState {
            tau_src,
            r: k.r.to_f64(),
            rdot: k.rdot.to_f64(),
            rddot: k.rddot,
            grad_r,
        })
    }
}

/// Central-finite-difference validation of the analytic kernel derivatives.
///
/// Returns the largest absolute discrepancy for Ṙ (against a τ′ derivative of
/// R) and over the five ∂^αR components (against observation-point
/// derivatives, with the 4D index raising ∂^t = −∂_t, ∂^{x,y,z} = +∂,
/// τ-slot plain).
pub fn kernel_consistency_check(
    obs: FiveVector,
    w: &Worldline,
    tau_src: f64,
    sig: Signature,
    step: f64,
) -> Result<(f64, f64), CoreError> {
    let ks = kernel_state(obs, w, tau_src, sig)?;
    let r_at = |o: FiveVector, tp: f64| -> Result<f64, CoreError> {
        Ok(KernelCurve::new(o, w, sig).eval_dd(tp)?.r.to_f64())
    };
    let rdot_fd = (r_at(obs, tau_src + step)? - r_at(obs, tau_src - step)?) / (2.0 * step);
    let err_rdot = (rdot_fd - ks.rdot).abs();

    let mut err_grad: f64 = 0.0;
    for i in 0..5 {
        let mut plus = obs;
        let mut minus = obs;
        let (sign, fp, fm): (f64, &mut f64, &mut f64) = match i {
            0 => (-1.0, &mut plus.t, &mut minus.t),
            1 => (1.0, &mut plus.x, &mut minus.x),
            2 => (1.0, &mut plus.y, &mut minus.y),
            3 => (1.0, &mut plus.z, &mut minus.z),
            _ => (1.0, &mut plus.tau, &mut minus.tau),
        };
        *fp += step;
        *fm -= step;
        let fd = sign * (r_at(plus, tau_src)? - r_at(minus, tau_src)?) / (2.0 * step);
        err_grad = err_grad.max((fd - ks.grad_r[i]).abs());
    }
    Ok((err_rdot, err_grad))
}
