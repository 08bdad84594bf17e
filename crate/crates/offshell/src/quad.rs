//! Adaptive one-dimensional quadrature on a 15-point Kronrod / 7-point Gauss
//! pair, with inverse-square-root endpoint weights and a semi-infinite
//! transform.
//!
//! The regularized worldline integrands behave like R^{−1/2}·(smooth) next to
//! a cone root and decay exponentially (hyperbolic worldlines) or
//! algebraically (inertial ones) toward τ′ → −∞; the two substitutions here
//! reduce both to smooth finite-interval problems:
//!
//! - `InvSqrtLeft`/`InvSqrtRight`: x = a + u² (resp. b − u²) turns an
//!   x^{−1/2} endpoint factor into a bounded integrand 2u·f.
//! - semi-infinite: τ′ = b − (1−v)/v maps (−∞, b] to v ∈ (0, 1].
//!
//! Node/weight constants are the classical QUADPACK qk15 values; the error
//! rescaling is QUADPACK's, giving estimates that are deliberately
//! conservative.  Worst-error-first subdivision with a budget, plus a width
//! floor below which intervals are frozen instead of split — the kernel
//! brackets carry a tiny but nonzero roundoff jitter which must not trigger
//! runaway subdivision.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Abscissae of the 15-point Kronrod rule (positive half; x = 0 implied).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Weights of the embedded 7-point Gauss rule.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Weights of the 15-point Kronrod rule.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Integration result with a conservative absolute error estimate.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err_estimate: f64,
    pub n_evals: u64,
}

/// Endpoint weight handling for integrands with an x^{−1/2} factor at one end.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndpointWeight {
    None,
    InvSqrtLeft,
    InvSqrtRight,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub tol_rel: f64,
    pub tol_abs: f64,
    pub max_subdivisions: u32,
}

impl Default for QuadOptions {
    fn default() -> QuadOptions {
        QuadOptions {
            tol_rel: 1e-9,
            tol_abs: 1e-12,
            max_subdivisions: 10_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature did not converge: value ≈ {:.6e}, error estimate {:.3e} after {} evaluations", estimate.value, estimate.abs_err_estimate, estimate.n_evals)]
    NotConverged { estimate: QuadResult },
}

/// One evaluated subinterval, max-heap ordered by error estimate.
struct Interval {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Interval {
    fn eq(&self, o: &Interval) -> bool {
        self.err == o.err
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, o: &Interval) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Interval {
    fn cmp(&self, o: &Interval) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// QUADPACK's error damping: the raw |K15 − G7| difference is sharpened to
/// (200·err/resasc)^{3/2}·resasc when that is smaller, and floored at
/// 50·ε·resabs.
fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 {
            result_asc * scale
        } else {
            result_asc
        };
    }
    let min_val = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if result_abs > min_val {
        err = err.max(50.0 * f64::EPSILON * result_abs);
    }
    err
}

/// 15-point Kronrod / 7-point Gauss evaluation on [a, b].
fn qk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Interval {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let dhlgth = hlgth.abs();

    let fc = f(centr);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];

    // Gauss points sit at the odd Kronrod abscissae.
    for j in 0..3 {
        let jtw = 2 * j + 1;
        let absc = hlgth * XGK[jtw];
        let f1 = f(centr - absc);
        let f2 = f(centr + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        let fsum = f1 + f2;
        resg += WG[j] * fsum;
        resk += WGK[jtw] * fsum;
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let absc = hlgth * XGK[jtwm1];
        let f1 = f(centr - absc);
        let f2 = f(centr + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        let fsum = f1 + f2;
        resk += WGK[jtwm1] * fsum;
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let result = resk * hlgth;
    let resabs = resabs * dhlgth;
    let resasc = resasc * dhlgth;
    let err = rescale_error((resk - resg) * hlgth, resabs, resasc);

    Interval {
        a,
        b,
        val: result,
        err,
    }
}

/// Adaptive driver: worst-interval-first bisection under a budget.  Intervals
/// narrower than ~1e-13 of the original width are frozen (kept in the totals,
/// never split again) so evaluation noise cannot consume the budget.
fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult, QuadError> {
    let width0 = b - a;
    let width_floor = 1e-13 * width0;
    let mut n_evals: u64 = 15;
    let mut heap = BinaryHeap::new();
    heap.push(qk15(&f, a, b));

    let mut frozen_val = 0.0f64;
    let mut frozen_err = 0.0f64;
    let mut heap_val: f64 = heap.peek().map(|i| i.val).unwrap_or(0.0);
    let mut heap_err: f64 = heap.peek().map(|i| i.err).unwrap_or(0.0);

    let mut iters: u32 = 0;
    loop {
        // Periodic exact resync of the running sums (drift control).
        if iters % 256 == 255 {
            heap_val = heap.iter().map(|i| i.val).sum();
            heap_err = heap.iter().map(|i| i.err).sum();
        }
        let value = heap_val + frozen_val;
        let err = heap_err + frozen_err;
        let tol = opts.tol_abs.max(opts.tol_rel * value.abs());
        let estimate = QuadResult {
            value,
            abs_err_estimate: err,
            n_evals,
        };
        if err <= tol {
            return Ok(estimate);
        }
        if iters >= opts.max_subdivisions {
            return Err(QuadError::NotConverged { estimate });
        }
        let worst = match heap.pop() {
            Some(w) => w,
            // Everything frozen and still above tolerance.
            None => return Err(QuadError::NotConverged { estimate }),
        };
        heap_val -= worst.val;
        heap_err -= worst.err;
        if worst.b - worst.a < width_floor {
            frozen_val += worst.val;
            frozen_err += worst.err;
            iters += 1;
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = qk15(&f, worst.a, mid);
        let right = qk15(&f, mid, worst.b);
        n_evals += 30;
        heap_val += left.val + right.val;
        heap_err += left.err + right.err;
        heap.push(left);
        heap.push(right);
        iters += 1;
    }
}

/// ∫_a^b f(x) dx with an optional x^{−1/2} endpoint weight absorbed by the
/// substitution u² = x − a (or b − x), which the Kronrod nodes never evaluate
/// at the singular endpoint itself.
pub fn integrate_finite(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    opts: &QuadOptions,
    weight: EndpointWeight,
) -> Result<QuadResult, QuadError> {
    assert!(a < b, "integrate_finite requires a < b (got {a}, {b})");
    match weight {
        EndpointWeight::None => adaptive(f, a, b, opts),
        EndpointWeight::InvSqrtLeft => {
            let umax = (b - a).sqrt();
            adaptive(move |u| 2.0 * u * f(a + u * u), 0.0, umax, opts)
        }
        EndpointWeight::InvSqrtRight => {
            let umax = (b - a).sqrt();
            adaptive(move |u| 2.0 * u * f(b - u * u), 0.0, umax, opts)
        }
    }
}

/// ∫_{−∞}^{b} f(x) dx via x = b − (1−v)/v with v = u², u ∈ (0, 1].  The
/// squared parametrization keeps tails that decay only algebraically
/// (f ~ |x|^{−3/2}, the slowest the solver produces) bounded at the mapped
/// endpoint, where the plain v-map would leave a v^{−1/2} singularity.
/// The caller is responsible for certifying at least that much decay.
pub fn integrate_semi_infinite(
    f: impl Fn(f64) -> f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError> {
    adaptive(
        move |u| {
            let v = u * u;
            let x = b - (1.0 - v) / v;
            f(x) * 2.0 / (u * v)
        },
        0.0,
        1.0,
        opts,
    )
}
