//! Acceptance gate: one integration test per shipped guarantee (AC-1 … AC-9).
//! Each test prints a single `AC-k PASS: …` line on success (shown with
//! `cargo test --test acceptance -- --nocapture`) and panics with a matching
//! `AC-k FAIL: …` message otherwise.  Stated runtime budgets are asserted
//! where a hard number is part of the guarantee.

use offshell::core::{
    boost_shift, worldline_state, FiveVector, KernelCurve, KernelDd, Signature, Worldline,
};
use offshell::dd::Dd;
use offshell::greens::{gf_denominator, laplacian_descent_residual};
use offshell::maxwell::{hphi_hyperbolic, ld_radiation_reaction};
use offshell::quad::QuadOptions;
use offshell::regfp::{
    default_eps_list, finite_part_segment, hadamard_oracle, FpIntegrand, FpSegment, Lambda,
    RegParams,
};
use offshell::roots::{root_count_map, MeshSpec, ScanOptions};
use offshell::solver::{
    field_from_potential_check, field_tensor, self_force, zero_mode, FieldTensor, SolverParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

const S41: Signature = Signature::OFourOne;

// ---------------------------------------------------------------------------
// AC-1: closed-form normalization of the kernel family.
// ---------------------------------------------------------------------------

/// The inverse normalization 2π^{m/2−1} sin(πp/2) Γ((4−m)/2) of the m = 5
/// retarded kernel equals −4π² on the p = 1 branch and +4π² on p = 3.
#[test]
fn ac1_kernel_normalization_denominators() {
    let four_pi2 = 4.0 * PI * PI;
    let d1 = gf_denominator(5, 1).unwrap();
    let d3 = gf_denominator(5, 3).unwrap();
    assert!(
        (d1 + four_pi2).abs() <= 1e-12 * four_pi2,
        "AC-1 FAIL: denominator(m=5, p=1) = {d1:.15e}, want −4π²"
    );
    assert!(
        (d3 - four_pi2).abs() <= 1e-12 * four_pi2,
        "AC-1 FAIL: denominator(m=5, p=3) = {d3:.15e}, want +4π²"
    );
    println!("AC-1 PASS: kernel denominators ∓4π² to 1e-12 relative");
}

// ---------------------------------------------------------------------------
// AC-2: finite part against the analytic value and the ε-peeling oracle.
// ---------------------------------------------------------------------------

/// Synthetic integrand with an exact polynomial kernel: R(τ′) = dir·(c₁u +
/// c₂u² + c₃u³) and φ(τ′) = p₀ + p₁u + p₂u² in u = τ′ − root.  `dir` = +1
/// puts the support above the root, −1 below.
struct SynthKernel {
    root: f64,
    dir: f64,
    c: [f64; 3],
    p: [f64; 3],
}

impl FpIntegrand for SynthKernel {
    fn kernel_dd(&self, tp: f64) -> KernelDd {
        let u = Dd::from_f64(tp) - self.root;
        let r = (u * self.c[0] + u.sqr() * self.c[1] + u.sqr() * u * self.c[2]) * self.dir;
        let rdot = (Dd::from_f64(self.c[0]) + u * (2.0 * self.c[1]) + u.sqr() * (3.0 * self.c[2]))
            * self.dir;
        let uf = tp - self.root;
        KernelDd {
            r,
            rdot,
            rddot: self.dir * (2.0 * self.c[1] + 6.0 * self.c[2] * uf),
        }
    }

    fn phi_dd(&self, tp: f64) -> Dd {
        let u = Dd::from_f64(tp) - self.root;
        Dd::from_f64(self.p[0]) + u * self.p[1] + u.sqr() * self.p[2]
    }

    fn phi_dot(&self, tp: f64) -> f64 {
        self.p[1] + 2.0 * self.p[2] * (tp - self.root)
    }
}

/// Analytic check on R = x, φ ≡ 1 over [0, 1]: FP ∫ x^{−5/2} dx = −2/3 and
/// FP ∫ x^{−3/2} dx = −2; then production-vs-oracle agreement on 20
/// randomized kernels at both exponents.
#[test]
fn ac2_finite_part_analytic_values_and_oracle_agreement() {
    let t0 = Instant::now();
    let quad = QuadOptions::default();

    let pure = SynthKernel {
        root: 0.0,
        dir: 1.0,
        c: [1.0, 0.0, 0.0],
        p: [1.0, 0.0, 0.0],
    };
    let seg01 = FpSegment::root_at_lower(0.0, 1.0);
    for (lambda, want) in [(Lambda::FiveHalves, -2.0 / 3.0), (Lambda::ThreeHalves, -2.0)] {
        let pr = RegParams {
            lambda,
            ..RegParams::default()
        };
        let fp = finite_part_segment(&pure, &seg01, &pr, &quad).unwrap();
        assert!(
            (fp.value - want).abs() <= 1e-9 * want.abs(),
            "AC-2 FAIL: FP[x^−{}] on [0,1] = {:.12e}, want {want:.12e}",
            lambda.exponent(),
            fp.value
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x2026_0814);
    let eps = default_eps_list();
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let c1 = rng.gen_range(0.5..2.0);
        let g = SynthKernel {
            root: rng.gen_range(-1.0..1.0),
            dir: if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
            c: [
                c1,
                c1 * rng.gen_range(-0.15..0.15),
                c1 * rng.gen_range(-0.15..0.15),
            ],
            p: {
                let p0: f64 = if rng.gen_bool(0.5) {
                    rng.gen_range(0.2..1.0)
                } else {
                    rng.gen_range(-1.0..-0.2)
                };
                [p0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
            },
        };
        let seg = if g.dir > 0.0 {
            FpSegment::root_at_lower(g.root, g.root + 1.0)
        } else {
            FpSegment::root_at_upper(g.root - 1.0, g.root)
        };
        for lambda in [Lambda::FiveHalves, Lambda::ThreeHalves] {
            let pr = RegParams {
                lambda,
                ..RegParams::default()
            };
            let fp = finite_part_segment(&g, &seg, &pr, &quad).unwrap();
            let or = hadamard_oracle(&g, &seg, lambda, &eps).unwrap();
            let rel = (fp.value - or).abs() / fp.value.abs().max(1e-3);
            assert!(
                rel <= 1e-6,
                "AC-2 FAIL: trial {trial} λ={}: fp {:.9e} vs oracle {or:.9e} (rel {rel:.2e})",
                lambda.exponent(),
                fp.value
            );
            worst = worst.max(rel);
        }
    }
    let dt = t0.elapsed();
    assert!(
        dt.as_secs_f64() < 10.0,
        "AC-2 FAIL: runtime {dt:.2?} exceeds the 10 s budget"
    );
    println!(
        "AC-2 PASS: analytic finite parts to 1e-9; oracle agreement ≤ {worst:.1e} rel \
         on 20 random kernels × both exponents [{dt:.2?}]"
    );
}

// ---------------------------------------------------------------------------
// AC-3: invariance of field values under the regularization offset h.
// ---------------------------------------------------------------------------

/// At 10 smooth observation points of the g = 1 hyperbolic configuration
/// (ρ = 1, τ = −1.5), every field component moves by < 1e-4 relative as the
/// offset h sweeps {0.05, 0.1, 0.2}.
#[test]
fn ac3_field_invariant_under_offset_choice() {
    let t0 = Instant::now();
    let w = Worldline::hyperbolic_unit();
    let pts = [
        (0.6, -0.3),
        (1.0, -0.3),
        (1.4, -0.3),
        (0.6, 0.3),
        (1.0, 0.3),
        (1.4, 0.3),
        (2.0, 0.0),
        (1.0, -0.9),
        (1.8, -0.6),
        (2.2, 0.8),
    ];
    let mut worst = 0.0f64;
    for (t, x) in pts {
        let obs = FiveVector::axisym(t, x, 1.0, -1.5);
        let mut comps = Vec::new();
        for h in [0.05, 0.1, 0.2] {
            let p = SolverParams {
                reg: RegParams {
                    h,
                    ..RegParams::default()
                },
                ..SolverParams::default()
            };
            let (f, rep) = field_tensor(obs, &w, S41, &p).unwrap();
            assert!(
                !rep.flags.singular && !rep.flags.truncated,
                "AC-3 FAIL: ({t},{x}) h={h} flagged {:?}",
                rep.flags
            );
            comps.push(f.components());
        }
        let scale = comps[1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..6 {
            let lo = comps.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min);
            let hi = comps.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max);
            let rel = (hi - lo) / scale;
            assert!(
                rel < 1e-4,
                "AC-3 FAIL: ({t},{x}) component {i} drifts {rel:.2e} relative across h"
            );
            worst = worst.max(rel);
        }
    }
    let dt = t0.elapsed();
    assert!(
        dt.as_secs_f64() < 60.0,
        "AC-3 FAIL: runtime {dt:.2?} exceeds the 1 min budget"
    );
    println!("AC-3 PASS: h-sweep drift ≤ {worst:.1e} relative at 10 smooth points [{dt:.2?}]");
}

// ---------------------------------------------------------------------------
// AC-4: the τ-integrated (zero-mode) field reproduces the Maxwell reference.
// ---------------------------------------------------------------------------

/// The τ-integral of the azimuthal field component equals the analytic
/// uniformly-accelerated Maxwell magnetic field H_φ times the normalization
/// ratio of the two source conventions, (1/4π²)·(π/2) = 1/(8π).  Checked at
/// 5 active points chosen in the single-retarded-root region (x + t > 0 and
/// x − t < 0), with the window-truncation residual < 1e-3 of the interior
/// peak; at 3 points with x + t < 0 the support is empty at every τ and the
/// zero mode must be below 1e-3 of the active-region scale.
#[test]
fn ac4_zero_mode_reproduces_maxwell_field() {
    let t0 = Instant::now();
    let w = Worldline::hyperbolic_unit();
    let p = SolverParams::default();
    // lo is set by the e^{−|τ|/2} left tail, hi by the ~τ^{−1.7} right tail
    // of a^μ(τ): both ends must fall below 1e-3 of the interior peak.
    let window = (-14.0, 32.0);
    const ZM_OVER_MAXWELL: f64 = 1.0 / (8.0 * PI);

    let active = [
        (1.0, 0.0, 1.0),
        (1.5, 0.5, 1.0),
        (0.8, 0.3, 1.2),
        (2.0, 1.0, 1.5),
        (1.2, 0.4, 1.3),
    ];
    let mut max_rel = 0.0f64;
    let mut min_ref = f64::INFINITY;
    for (t, x, rho) in active {
        let zm = zero_mode([t, x, rho, 0.0], &w, S41, window, 256, &p)
            .unwrap_or_else(|e| panic!("AC-4 FAIL: zero mode at ({t},{x},{rho}): {e}"));
        let reference = hphi_hyperbolic(t, x, rho, 1.0, 1.0).h_phi * ZM_OVER_MAXWELL;
        let rel = (zm.f_xrho - reference).abs() / reference.abs();
        assert!(
            rel <= 0.10,
            "AC-4 FAIL: ({t},{x},{rho}) F^xρ = {:.6e} vs H_φ/(8π) = {reference:.6e} (rel {rel:.2e})",
            zm.f_xrho
        );
        assert!(
            !zm.truncated,
            "AC-4 FAIL: ({t},{x},{rho}) truncated: endpoint ratio {:.2e} ≥ 1e-3 of peak",
            zm.endpoint_ratio
        );
        max_rel = max_rel.max(rel);
        min_ref = min_ref.min(reference.abs());
    }

    let gated = [(0.5, -1.0, 1.0), (0.0, -3.0, 0.5), (-1.0, -1.8, 2.0)];
    let bound = 1e-3 * min_ref;
    let mut max_gated = 0.0f64;
    for (t, x, rho) in gated {
        let zm = zero_mode([t, x, rho, 0.0], &w, S41, window, 256, &p)
            .unwrap_or_else(|e| panic!("AC-4 FAIL: zero mode at gated ({t},{x},{rho}): {e}"));
        let worst = zm.f_xt.abs().max(zm.f_xrho.abs()).max(zm.f_trho.abs());
        assert!(
            worst <= bound,
            "AC-4 FAIL: gated ({t},{x},{rho}) zero mode {worst:.2e} exceeds {bound:.2e}"
        );
        max_gated = max_gated.max(worst);
    }
    println!(
        "AC-4 PASS: F^xρ within {max_rel:.1e} of H_φ/(8π) at 5 active points (≤ 10%); \
         gated residual ≤ {max_gated:.1e} (bound {bound:.1e}) [{:.1?}]",
        t0.elapsed()
    );
}

// ---------------------------------------------------------------------------
// AC-5: self-force dichotomy between inertial and accelerated motion.
// ---------------------------------------------------------------------------

/// The history self-force vanishes identically for unaccelerated worldlines
/// (< 1e-12 with the dd-cancelled integrand) and is nonzero with a
/// δ-stable sign for the g = 1 hyperbola.
#[test]
fn ac5_self_force_vanishes_inertially_nonzero_hyperbolically() {
    let t0 = Instant::now();
    let p = SolverParams::default();
    for w in [
        Worldline::Static { x0: [0.0; 4] },
        Worldline::Uniform {
            u: [1.25, 0.75, 0.0, 0.0],
            x0: [0.1, 0.0, 0.2, 0.0],
        },
    ] {
        let sf = self_force(&w, 0.7, S41, &p).unwrap();
        for (i, c) in sf.force.iter().enumerate() {
            assert!(
                c.abs() < 1e-12,
                "AC-5 FAIL: inertial worldline {w:?} component {i} = {c:.3e}"
            );
        }
    }

    let w = Worldline::hyperbolic_unit();
    let mut magnitudes = Vec::new();
    for delta in [0.05, 0.1, 0.2, 0.4] {
        let pd = SolverParams {
            self_delta: delta,
            ..SolverParams::default()
        };
        let s = self_force(&w, 0.0, S41, &pd).unwrap();
        assert!(
            s.force[1] < 0.0 && s.force[1].abs() > 1e-6,
            "AC-5 FAIL: hyperbolic δ={delta}: F^x = {:.6e} not negative-definite",
            s.force[1]
        );
        magnitudes.push(s.force[1]);
    }
    let dt = t0.elapsed();
    assert!(
        dt.as_secs_f64() < 60.0,
        "AC-5 FAIL: runtime {dt:.2?} exceeds the 1 min budget"
    );
    println!(
        "AC-5 PASS: inertial self-force < 1e-12; hyperbolic F^x < 0 across δ ∈ [0.05, 0.4] \
         (values {magnitudes:.3e?}) [{dt:.2?}]"
    );
}

// ---------------------------------------------------------------------------
// AC-6: the Lorentz–Dirac radiation-reaction combination on the hyperbola.
// ---------------------------------------------------------------------------

/// (2e²/3)(ẍ̇^μ − ẋ^μ ẍ·ẍ) vanishes identically along uniformly accelerated
/// motion: componentwise < 1e-12 over a τ sweep.
#[test]
fn ac6_radiation_reaction_vanishes_on_hyperbola() {
    let w = Worldline::hyperbolic_unit();
    for k in 0..=8 {
        let tau = -2.0 + 0.5 * f64::from(k);
        let f = ld_radiation_reaction(&w, tau, 1.0).unwrap();
        for (i, c) in f.iter().enumerate() {
            assert!(
                c.abs() < 1e-12,
                "AC-6 FAIL: τ={tau} component {i} = {c:.3e}"
            );
        }
    }
    println!("AC-6 PASS: radiation-reaction combination < 1e-12 along the hyperbola");
}

// ---------------------------------------------------------------------------
// AC-7: root topography on the (x, t) mesh against a dense-sampling oracle.
// ---------------------------------------------------------------------------

/// Raw difference-of-squares kernel R(τ′) plus the cancellation noise floor
/// of that formula, evaluated through the plain worldline kinematics only.
fn naive_r(obs: &FiveVector, w: &Worldline, sig: Signature, tp: f64) -> (f64, f64) {
    let st = worldline_state(w, tp).expect("oracle window in range");
    let d = [
        obs.t - st.z[0],
        obs.x - st.z[1],
        obs.y - st.z[2],
        obs.z - st.z[3],
    ];
    let x2 = -d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3];
    let dt = obs.tau - tp;
    let s5 = sig.sigma5();
    let mag = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3] + dt * dt;
    (-s5 * (x2 + s5 * dt * dt), 1e3 * f64::EPSILON * mag)
}

/// Sign changes of R over [lo, obs.tau] on a dense uniform grid; samples
/// inside the noise floor are skipped so roundoff cannot fabricate
/// crossings.  Independent of the production scanner.
fn dense_root_count(obs: &FiveVector, w: &Worldline, sig: Signature, lo: f64, n: usize) -> i32 {
    let hi = obs.tau;
    let mut count = 0;
    let mut prev = 0.0f64;
    for i in 0..=n {
        let tp = lo + (hi - lo) * (i as f64) / (n as f64);
        let (r, floor) = naive_r(obs, w, sig, tp);
        if r.abs() <= floor {
            continue;
        }
        if prev != 0.0 && r.signum() != prev.signum() {
            count += 1;
        }
        prev = r;
    }
    count
}

/// 50×50 (x, t) mesh at τ = −0.5, ρ = 1 (offset off the x = ±t lines): the
/// scanned root counts match the dense-sampling oracle at every point, and
/// the count bifurcates from 1 to 2 when crossing x = −t from the below-cone
/// wedge (t < −|x|) into the right wedge (x > |t|, "quadrant I" in
/// characteristic coordinates), with the 2-root band hugging that line.
#[test]
fn ac7_root_topography_matches_oracle_with_bifurcation_band() {
    let t0 = Instant::now();
    let w = Worldline::hyperbolic_unit();
    let mesh = MeshSpec {
        x: (-2.95, 3.05, 50),
        t: (-2.9, 3.1, 50),
        rho_values: vec![1.0],
        tau_values: vec![-0.5],
    };
    let grids = root_count_map(&mesh, &w, S41, &ScanOptions::default());
    let g = &grids[0];
    let xs = mesh.x_values();
    let ts = mesh.t_values();

    let mut seen = [false; 3];
    for it in 0..g.nt {
        for ix in 0..g.nx {
            let c = g.counts[it * g.nx + ix];
            assert!(
                (0..=2).contains(&c),
                "AC-7 FAIL: count {c} at x={:+.3} t={:+.3} (−1 = inconclusive scan)",
                xs[ix],
                ts[it]
            );
            seen[c as usize] = true;

            let obs = FiveVector::axisym(ts[it], xs[ix], 1.0, -0.5);
            let oracle = dense_root_count(&obs, &w, S41, -45.0, 8192);
            assert!(
                oracle == c,
                "AC-7 FAIL: x={:+.3} t={:+.3}: scanned {c} vs oracle {oracle}",
                xs[ix],
                ts[it]
            );
        }
    }
    assert!(
        seen == [true; 3],
        "AC-7 FAIL: mesh misses a count class (0/1/2 present: {seen:?})"
    );

    // Bifurcation: for every row below the trailing-front end of the x = −t
    // gate line, the first pixel across x = −t carries 2 roots and its
    // neighbour on the t < −|x| side carries 1.
    let mut rows = 0;
    for it in 0..g.nt {
        if ts[it] > -1.75 {
            continue;
        }
        let ix = xs
            .iter()
            .position(|&x| x + ts[it] > 0.0)
            .expect("mesh spans the x = −t line");
        let (hi, lo) = (g.counts[it * g.nx + ix], g.counts[it * g.nx + ix - 1]);
        assert!(
            hi == 2 && lo == 1,
            "AC-7 FAIL: row t={:+.3}: counts across x=−t are {lo}→{hi}, want 1→2",
            ts[it]
        );
        rows += 1;
    }
    assert!(
        rows >= 5,
        "AC-7 FAIL: only {rows} rows probe the bifurcation band"
    );

    // The band stays local to the crossing: every 2-count pixel sits on the
    // active side of x = −t, below t = 0, within one unit of the line.
    for it in 0..g.nt {
        for ix in 0..g.nx {
            if g.counts[it * g.nx + ix] == 2 {
                let (x, t) = (xs[ix], ts[it]);
                assert!(
                    t < 0.0 && x > 1.0 && x + t > 0.0 && x + t < 1.0,
                    "AC-7 FAIL: 2-root pixel off the band at x={x:+.3} t={t:+.3}"
                );
            }
        }
    }
    let dt = t0.elapsed();
    assert!(
        dt.as_secs_f64() < 120.0,
        "AC-7 FAIL: runtime {dt:.2?} exceeds the 2 min budget"
    );
    println!(
        "AC-7 PASS: 2500/2500 counts match the dense oracle; 1→2 band across x=−t \
         verified on {rows} rows [{dt:.2?}]"
    );
}

// ---------------------------------------------------------------------------
// AC-8: structural invariances of the evaluation.
// ---------------------------------------------------------------------------

/// Boost-shift relabeling leaves the kernel exactly invariant; transverse
/// rotation leaves the axisymmetric fields invariant at quadrature
/// tolerance; the assembled tensor is antisymmetric by construction; and the
/// tensor agrees with finite differences of the potential at second order.
#[test]
fn ac8_structural_invariances() {
    let t0 = Instant::now();
    let w = Worldline::hyperbolic_unit();
    let p = SolverParams::default();
    let obs = FiveVector::axisym(1.0, -0.3, 1.0, -1.5);

    // (a) kernel invariance under the boost-shift relabeling, exact.
    let c1 = KernelCurve::new(obs, &w, S41);
    for alpha in [-0.8, 0.25, 0.6] {
        let c2 = KernelCurve::new(boost_shift(obs, alpha, 1.0), &w, S41);
        for k in 0..=40 {
            let tp = -4.0 + 8.0 * f64::from(k) / 40.0;
            let r1 = c1.eval_dd(tp).unwrap().r.to_f64();
            let r2 = c2.eval_dd(tp - alpha).unwrap().r.to_f64();
            let scale = c1.scale(tp).max(1.0);
            assert!(
                (r1 - r2).abs() <= 1e-12 * scale,
                "AC-8 FAIL: boost α={alpha} τ′={tp}: R {r1:.15e} vs {r2:.15e}"
            );
        }
    }

    // (b) axisymmetry: a transverse rotation changes nothing.
    let (f0, _) = field_tensor(obs, &w, S41, &p).unwrap();
    let scale_f = f0.components().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for theta in [0.7f64, 2.3] {
        let rot = FiveVector::new(1.0, -0.3, theta.cos(), theta.sin(), -1.5);
        let (f, _) = field_tensor(rot, &w, S41, &p).unwrap();
        for (i, (&v, &v0)) in f.components().iter().zip(f0.components().iter()).enumerate() {
            assert!(
                (v - v0).abs() <= 1e-8 * scale_f,
                "AC-8 FAIL: rotation θ={theta} component {i}: {v:.9e} vs {v0:.9e}"
            );
        }
    }

    // (c) antisymmetry of the assembled matrix, structural (exact).
    for f in [
        f0,
        FieldTensor {
            f_xt: 0.7,
            f_xrho: -0.4,
            f_trho: 0.2,
            f_ttau: 1.1,
            f_rhotau: -0.6,
            f_xtau: 0.9,
        },
    ] {
        let m = f.as_matrix();
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    m[i][j] == -m[j][i],
                    "AC-8 FAIL: as_matrix not antisymmetric at ({i},{j})"
                );
            }
        }
    }

    // (d) tensor = antisymmetrized potential gradient, at second FD order.
    let e1 = field_from_potential_check(obs, &w, S41, &p, 0.02).unwrap();
    let e2 = field_from_potential_check(obs, &w, S41, &p, 0.01).unwrap();
    let ratio = e1 / e2;
    assert!(
        e2 < 5e-3 && (2.5..8.0).contains(&ratio),
        "AC-8 FAIL: FD consistency e(0.02)={e1:.3e} e(0.01)={e2:.3e} ratio {ratio:.2} not second order"
    );

    let dt = t0.elapsed();
    assert!(
        dt.as_secs_f64() < 120.0,
        "AC-8 FAIL: runtime {dt:.2?} exceeds the 2 min budget"
    );
    println!(
        "AC-8 PASS: boost-shift exact; axisymmetry ≤ 1e-8; antisymmetry structural; \
         potential-consistency ratio {ratio:.2} (second order) [{dt:.2?}]"
    );
}

// ---------------------------------------------------------------------------
// AC-9: descent identity of the kernel family under the 5D wave operator.
// ---------------------------------------------------------------------------

/// The finite-difference 5D wave operator applied to the α-kernel equals
/// −(α−2)-kernel to second order in the step, at 10 points strictly inside
/// the retarded cone, for α ∈ {4, 6}.
#[test]
fn ac9_wave_operator_descends_the_kernel_family() {
    let pts: [[f64; 5]; 10] = [
        [3.0, 0.4, -0.2, 0.3, 0.8],
        [2.8, -0.5, 0.1, 0.0, 0.6],
        [3.5, 0.7, 0.4, -0.3, 1.1],
        [2.6, 0.0, 0.0, 0.5, 0.4],
        [4.0, -0.8, 0.6, 0.2, 1.2],
        [3.2, 0.3, -0.6, -0.4, 0.9],
        [2.9, -0.2, 0.2, 0.7, 0.5],
        [3.8, 0.5, 0.5, 0.5, 1.0],
        [2.7, -0.4, -0.3, 0.1, 0.7],
        [3.3, 0.6, 0.0, -0.6, 0.35],
    ];
    for alpha in [4.0, 6.0] {
        for (k, p5) in pts.iter().enumerate() {
            let x5 = FiveVector::new(p5[0], p5[1], p5[2], p5[3], p5[4]);
            let r1 = laplacian_descent_residual(alpha, x5, S41, 0.05).unwrap();
            let r2 = laplacian_descent_residual(alpha, x5, S41, 0.025).unwrap();
            let ratio = r1 / r2;
            assert!(
                r2 < 1e-6 && (2.5..6.0).contains(&ratio),
                "AC-9 FAIL: α={alpha} point {k}: residuals {r1:.3e} → {r2:.3e} (ratio {ratio:.2})"
            );
        }
    }
    println!("AC-9 PASS: wave-operator descent second order at 10 interior points, α ∈ {{4, 6}}");
}
