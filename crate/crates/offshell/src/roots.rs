//! Retarded root location for the principal-part kernel R(τ′), singularity
//! classification, and the segment plan that drives every field evaluation.
//!
//! The support of the worldline integrals is {τ′ ≤ τ : R(τ′) ≥ 0}; its
//! boundary points are the cone roots R(τ′₀) = 0, where the integrands
//! diverge like R^{−λ} and the finite-part machinery takes over.  This
//! module finds every root below the observation's τ, classifies the ones
//! where Ṙ is also small (rigid wavefronts — "shocks" — where
//! regularization by parts fails), and emits the ordered list of
//! R-positive segments with per-endpoint flags.
//!
//! Strategy: certify a finite scan window from the curve's tail asymptotics
//! (outside it the sign of R is constant by term dominance), sample a
//! uniform grid, insert the interior extrema of R located via sign changes
//! of Ṙ (this catches root *pairs* hiding between adjacent samples), and
//! refine every bracket with a safeguarded Newton iteration on the
//! double-double kernel.  The generic scanner works over any `ScanCurve`,
//! which the Maxwell comparison module reuses for the 4D light-cone
//! condition.

use crate::core::{CoreError, FiveVector, KernelCurve, KernelState, Signature, Worldline};
use crate::dd::Dd;
use rayon::prelude::*;
use thiserror::Error;

/// Anything the scanner can search for roots: R with two derivatives, a
/// refinement view, a magnitude scale, and a certified constant-sign tail.
pub trait ScanCurve: Sync {
    /// (R, Ṙ, R̈) at τ′.
    fn eval3(&self, tp: f64) -> Result<(f64, f64, f64), CoreError>;
    /// R in double-double plus Ṙ in f64 for root refinement.
    fn eval_refine(&self, tp: f64) -> Result<(Dd, f64), CoreError>;
    /// Positive magnitude of the terms entering R at τ′ (relative-tolerance
    /// anchor).
    fn scale(&self, tp: f64) -> f64;
    /// Some((t_lo, sign)): R has that constant sign on (−∞, t_lo].
    fn tail_certificate(&self, dominance: f64, hi: f64) -> Option<(f64, f64)>;
}

impl ScanCurve for KernelCurve {
    fn eval3(&self, tp: f64) -> Result<(f64, f64, f64), CoreError> {
        let k = self.eval_dd(tp)?;
        Ok((k.r.to_f64(), k.rdot.to_f64(), k.rddot))
    }

    fn eval_refine(&self, tp: f64) -> Result<(Dd, f64), CoreError> {
        let k = self.eval_dd(tp)?;
        Ok((k.r, k.rdot.to_f64()))
    }

    fn scale(&self, tp: f64) -> f64 {
        KernelCurve::scale(self, tp)
    }

    fn tail_certificate(&self, dominance: f64, hi: f64) -> Option<(f64, f64)> {
        KernelCurve::tail_certificate(self, dominance, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootKind {
    /// Ṙ(τ′₀) well away from zero: regularizable by parts.
    Simple,
    /// Ṙ(τ′₀) ≈ 0 as well: a common root of R and Ṙ (wavefront shock).
    Common,
    /// R̈ also vanishes: higher-order contact.
    Degenerate,
}

#[derive(Clone, Copy, Debug)]
pub struct RootRecord {
    pub tau_root: f64,
    pub rdot_at_root: f64,
    pub kind: RootKind,
    /// Final refinement bracket containing the root.
    pub bracket: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndFlag {
    /// R > 0 at this endpoint (or the endpoint is at infinity / at τ).
    Interior,
    /// R vanishes here; the adjacent integrand needs the finite part.
    ConeRoot,
}

/// One maximal interval with R ≥ 0 in its interior.  `lo` may be −∞.
#[derive(Clone, Copy, Debug)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub lo_flag: EndFlag,
    pub hi_flag: EndFlag,
}

#[derive(Clone, Debug, Default)]
pub struct SegmentPlan {
    /// Disjoint, sorted; empty when the support is empty.
    pub segments: Vec<Segment>,
    pub n_roots: usize,
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Uniform samples across the certified window.
    pub n_grid: usize,
    /// Root residual tolerance, relative to the kernel's term-sum scale.
    pub tol_root: f64,
    /// |Ṙ| below this (relative) is a common root.
    pub shock_tol: f64,
    /// |Ṙ| below this (relative) is flagged as shock-adjacent.
    pub near_shock_tol: f64,
    /// Tail term-dominance factor for sign certification.
    pub tail_dominance: f64,
}

impl Default for ScanOptions {
    fn default() -> ScanOptions {
        ScanOptions {
            n_grid: 512,
            tol_root: 1e-12,
            shock_tol: 1e-8,
            near_shock_tol: 1e-3,
            tail_dominance: 1e3,
        }
    }
}

#[derive(Debug, Error)]
pub enum RootsError {
    #[error("root scan inconclusive: {reason}")]
    ScanInconclusive { reason: String },
}

fn inconclusive<T>(reason: impl Into<String>) -> Result<T, RootsError> {
    Err(RootsError::ScanInconclusive {
        reason: reason.into(),
    })
}

fn core_stopped<T>(e: CoreError) -> Result<T, RootsError> {
    inconclusive(format!("kernel evaluation stopped: {e}"))
}

/// All roots of R(τ′) = 0 with τ′ ≤ obs.tau, sorted ascending.
pub fn find_roots(
    obs: FiveVector,
    w: &Worldline,
    sig: Signature,
    opts: &ScanOptions,
) -> Result<Vec<RootRecord>, RootsError> {
    let curve = KernelCurve::new(obs, w, sig);
    scan_roots(&curve, obs.tau, opts)
}

/// Generic scan below `hi` over any curve.
pub fn scan_roots<C: ScanCurve>(
    curve: &C,
    hi: f64,
    opts: &ScanOptions,
) -> Result<Vec<RootRecord>, RootsError> {
    let (t_lo, tail_sign) = match curve.tail_certificate(opts.tail_dominance, hi) {
        Some(c) => c,
        None => {
            return inconclusive(
                "tail dominance not certifiable within the representable exponential range",
            )
        }
    };
    if t_lo >= hi {
        // Constant sign over the whole retarded line.
        return Ok(Vec::new());
    }

    // Uniform samples; an exactly-zero sample is nudged off the node.
    let n = opts.n_grid.max(16);
    let span = hi - t_lo;
    let mut pts: Vec<(f64, f64, f64)> = Vec::with_capacity(n + 1); // (τ′, R, Ṙ)
    for i in 0..=n {
        let mut tp = t_lo + span * (i as f64) / (n as f64);
        let (mut r, mut rdot, _) = match curve.eval3(tp) {
            Ok(v) => v,
            Err(e) => return core_stopped(e),
        };
        if r == 0.0 {
            tp += 1e-9 * span / (n as f64);
            match curve.eval3(tp) {
                Ok(v) => {
                    r = v.0;
                    rdot = v.1;
                }
                Err(e) => return core_stopped(e),
            }
        }
        pts.push((tp, r, rdot));
    }
    if pts[0].1.signum() != tail_sign {
        return inconclusive(format!(
            "sample at the window edge τ′ = {t_lo} contradicts the certified tail sign"
        ));
    }

    // Interior extrema (sign changes of Ṙ): evaluate R there so that root
    // pairs between adjacent samples become visible sign changes.
    let mut checkpoints: Vec<(f64, f64)> = Vec::with_capacity(pts.len() + 8);
    for i in 0..pts.len() - 1 {
        let (a, ra, da) = pts[i];
        let (b, _, db) = pts[i + 1];
        checkpoints.push((a, ra));
        if da == 0.0 || da.signum() == db.signum() {
            continue;
        }
        let ext = match bisect_rdot(curve, a, b, da) {
            Ok(t) => t,
            Err(e) => return core_stopped(e),
        };
        let (re, _, _) = match curve.eval3(ext) {
            Ok(v) => v,
            Err(e) => return core_stopped(e),
        };
        checkpoints.push((ext, re));
    }
    let last = pts[pts.len() - 1];
    checkpoints.push((last.0, last.1));

    let mut roots = Vec::new();
    for win in checkpoints.windows(2) {
        let (a, ra) = win[0];
        let (b, rb) = win[1];
        if ra == 0.0 || rb == 0.0 {
            // Tangency checkpoint sitting exactly on the cone: record once,
            // at the left end of the pair.
            if ra == 0.0 {
                match make_record(curve, a, (a, b), opts) {
                    Ok(rec) => roots.push(rec),
                    Err(e) => return core_stopped(e),
                }
            }
            continue;
        }
        if ra.signum() != rb.signum() {
            match refine_bracket(curve, a, b, ra, opts) {
                Ok(rec) => roots.push(rec),
                Err(e) => return core_stopped(e),
            }
        } else {
            // Tangent contact at an extremum checkpoint: |R| below the root
            // tolerance without a sign change.
            let scale = curve.scale(b).max(f64::MIN_POSITIVE);
            if rb.abs() <= opts.tol_root * scale && b < hi {
                match make_record(curve, b, (a, b), opts) {
                    Ok(rec) => roots.push(rec),
                    Err(e) => return core_stopped(e),
                }
            }
        }
    }
    roots.sort_by(|p, q| p.tau_root.total_cmp(&q.tau_root));
    roots.dedup_by(|p, q| (p.tau_root - q.tau_root).abs() < 1e-12 * (1.0 + q.tau_root.abs()));
    Ok(roots)
}

/// Bisection for the zero of Ṙ inside (a, b), given Ṙ(a) = da ≠ 0 with the
/// opposite sign at b.
fn bisect_rdot<C: ScanCurve>(curve: &C, mut a: f64, mut b: f64, da: f64) -> Result<f64, CoreError> {
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let (_, dm, _) = curve.eval3(m)?;
        if dm == 0.0 {
            return Ok(m);
        }
        if dm.signum() == da.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Safeguarded Newton on the double-double R inside a sign-change bracket.
fn refine_bracket<C: ScanCurve>(
    curve: &C,
    mut a: f64,
    mut b: f64,
    ra: f64,
    opts: &ScanOptions,
) -> Result<RootRecord, CoreError> {
    let sign_a = ra.signum();
    let mut x = 0.5 * (a + b);
    for _ in 0..120 {
        let (r_dd, rdot) = curve.eval_refine(x)?;
        let r = r_dd.to_f64();
        let scale = curve.scale(x).max(f64::MIN_POSITIVE);
        if r.abs() <= opts.tol_root * scale {
            break;
        }
        if r.signum() == sign_a {
            a = x;
        } else {
            b = x;
        }
        let newton = x - r / rdot;
        x = if rdot != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if b - a < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    make_record(curve, x, (a, b), opts)
}

fn make_record<C: ScanCurve>(
    curve: &C,
    x: f64,
    bracket: (f64, f64),
    opts: &ScanOptions,
) -> Result<RootRecord, CoreError> {
    let (_, rdot, rddot) = curve.eval3(x)?;
    let scale = curve.scale(x).max(f64::MIN_POSITIVE);
    let kind = if rdot.abs() <= opts.shock_tol * scale {
        // R̈ threshold is looser: it carries one fewer power of the local
        // length scale.
        if rddot.abs() <= 1e-6 * scale {
            RootKind::Degenerate
        } else {
            RootKind::Common
        }
    } else {
        RootKind::Simple
    };
    Ok(RootRecord {
        tau_root: x,
        rdot_at_root: rdot,
        kind,
        bracket,
    })
}

/// Ordered R-positive segments delimited by the roots, the lower tail and τ.
pub fn plan_segments(
    roots: &[RootRecord],
    obs: FiveVector,
    w: &Worldline,
    sig: Signature,
    opts: &ScanOptions,
) -> Result<SegmentPlan, RootsError> {
    let curve = KernelCurve::new(obs, w, sig);
    plan_segments_curve(&curve, roots, obs.tau, opts)
}

/// Generic segment planner over any curve.
pub fn plan_segments_curve<C: ScanCurve>(
    curve: &C,
    roots: &[RootRecord],
    hi: f64,
    opts: &ScanOptions,
) -> Result<SegmentPlan, RootsError> {
    let (_, tail_sign) = match curve.tail_certificate(opts.tail_dominance, hi) {
        Some(c) => c,
        None => {
            return inconclusive(
                "tail dominance not certifiable within the representable exponential range",
            )
        }
    };
    let sign_at = |tp: f64| -> Result<f64, RootsError> {
        match curve.eval3(tp) {
            Ok((r, _, _)) => Ok(r.signum()),
            Err(e) => core_stopped(e),
        }
    };

    let mut segments = Vec::new();
    if roots.is_empty() {
        if tail_sign > 0.0 {
            segments.push(Segment {
                lo: f64::NEG_INFINITY,
                hi,
                lo_flag: EndFlag::Interior,
                hi_flag: EndFlag::Interior,
            });
        }
        return Ok(SegmentPlan {
            segments,
            n_roots: 0,
        });
    }

    // Region below the first root: constant tail sign (the scan found no
    // crossing there).
    if tail_sign > 0.0 {
        segments.push(Segment {
            lo: f64::NEG_INFINITY,
            hi: roots[0].tau_root,
            lo_flag: EndFlag::Interior,
            hi_flag: EndFlag::ConeRoot,
        });
    }
    // Interior regions between consecutive roots: midpoint sign.
    for pair in roots.windows(2) {
        let (lo, hi_r) = (pair[0].tau_root, pair[1].tau_root);
        if sign_at(0.5 * (lo + hi_r))? > 0.0 {
            segments.push(Segment {
                lo,
                hi: hi_r,
                lo_flag: EndFlag::ConeRoot,
                hi_flag: EndFlag::ConeRoot,
            });
        }
    }
    // Region between the last root and τ.
    let last = roots[roots.len() - 1].tau_root;
    if last < hi && sign_at(0.5 * (last + hi))? > 0.0 {
        segments.push(Segment {
            lo: last,
            hi,
            lo_flag: EndFlag::ConeRoot,
            hi_flag: EndFlag::Interior,
        });
    }
    Ok(SegmentPlan {
        segments,
        n_roots: roots.len(),
    })
}

/// Wavefront classification of one root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SingularityClass {
    Regular,
    /// |Ṙ| within the diagnostic band but not a certified common root.
    NearShock { rdot_abs: f64 },
    /// Common root of R and Ṙ: carries the separation invariants of the
    /// front, σ·σ and ż·σ with σ = x − z(τ′₀).
    Shock { sigma_sq: f64, zdot_sigma: f64 },
}

/// Classify a certified root from the kernel state at τ′₀.  All invariants
/// are reconstructed from the stored gradient: σ^μ = −σ₅ ∂^μR / 2 on the
/// spacetime slots and ∂R/∂τ = −2(τ−τ′); the Ṙ scale is the sum of its two
/// constituent terms |2σ₅ż·σ| + |2(τ−τ′)|.
pub fn classify_singularity(
    root: &RootRecord,
    kernel: &KernelState,
    sig: Signature,
    opts: &ScanOptions,
) -> SingularityClass {
    let g = &kernel.grad_r;
    let s5 = sig.sigma5();
    let term_source = (kernel.rdot + g[4]).abs(); // 2σ₅ ż·(x−z)
    let term_tau = g[4].abs(); // 2(τ−τ′)
    let scale = term_source + term_tau;
    let s = kernel.rdot.abs();
    if s <= opts.shock_tol * scale || scale == 0.0 {
        let sigma_sq = 0.25 * (-g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
        let zdot_sigma = 0.5 * s5 * (kernel.rdot + g[4]);
        SingularityClass::Shock {
            sigma_sq,
            zdot_sigma,
        }
    } else if s <= opts.near_shock_tol * scale {
        SingularityClass::NearShock {
            rdot_abs: root.rdot_at_root.abs(),
        }
    } else {
        SingularityClass::Regular
    }
}

/// Rectangular (x, t) mesh swept at fixed transverse distance ρ and fixed τ,
/// possibly for several (ρ, τ) slices.
#[derive(Clone, Debug)]
pub struct MeshSpec {
    /// (lo, hi, n) — n ≥ 1 points, endpoints inclusive.
    pub x: (f64, f64, usize),
    pub t: (f64, f64, usize),
    pub rho_values: Vec<f64>,
    pub tau_values: Vec<f64>,
}

fn linspace((lo, hi, n): (f64, f64, usize)) -> Vec<f64> {
    assert!(n >= 1, "mesh axis needs at least one point");
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * (i as f64) / ((n - 1) as f64))
        .collect()
}

impl MeshSpec {
    pub fn x_values(&self) -> Vec<f64> {
        linspace(self.x)
    }

    pub fn t_values(&self) -> Vec<f64> {
        linspace(self.t)
    }
}

/// Root counts on one (ρ, τ) slice; −1 marks an inconclusive scan.
#[derive(Clone, Debug)]
pub struct RootCountGrid {
    pub rho: f64,
    pub tau: f64,
    pub nx: usize,
    pub nt: usize,
    /// Row-major, x fastest: counts[it * nx + ix].
    pub counts: Vec<i32>,
}

/// Per-point root counts over the mesh; inconclusive points are −1 rather
/// than an error so one bad pixel cannot kill a whole sweep.
pub fn root_count_map(
    mesh: &MeshSpec,
    w: &Worldline,
    sig: Signature,
    opts: &ScanOptions,
) -> Vec<RootCountGrid> {
    let xs = mesh.x_values();
    let ts = mesh.t_values();
    let mut grids = Vec::with_capacity(mesh.rho_values.len() * mesh.tau_values.len());
    for &rho in &mesh.rho_values {
        for &tau in &mesh.tau_values {
            let counts: Vec<i32> = (0..xs.len() * ts.len())
                .into_par_iter()
                .map(|k| {
                    let (it, ix) = (k / xs.len(), k % xs.len());
                    let obs = FiveVector::axisym(ts[it], xs[ix], rho, tau);
                    match find_roots(obs, w, sig, opts) {
                        Ok(r) => r.len() as i32,
                        Err(RootsError::ScanInconclusive { .. }) => -1,
                    }
                })
                .collect();
            grids.push(RootCountGrid {
                rho,
                tau,
                nx: xs.len(),
                nt: ts.len(),
                counts,
            });
        }
    }
    grids
}
