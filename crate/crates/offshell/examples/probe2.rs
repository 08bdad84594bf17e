use offshell::core::{FiveVector, Signature, Worldline};
use offshell::greens::laplacian_descent_residual;
use offshell::regfp::RegParams;
use offshell::solver::{field_from_potential_check, field_tensor, SolverParams};
use std::time::Instant;

fn main() {
    let w = Worldline::hyperbolic_unit();
    let sig = Signature::OFourOne;

    // AC-3 candidates: smooth points, h-spread.
    let pts = [
        (0.6, -0.3), (1.0, -0.3), (1.4, -0.3), (0.6, 0.3), (1.0, 0.3),
        (1.4, 0.3), (2.0, 0.0), (1.0, -0.9), (1.8, -0.6), (2.2, 0.8),
    ];
    let t0 = Instant::now();
    for (t, x) in pts {
        let obs = FiveVector::axisym(t, x, 1.0, -1.5);
        let mut comps = Vec::new();
        let mut flagged = false;
        for h in [0.05, 0.1, 0.2] {
            let p = SolverParams {
                reg: RegParams { h, ..RegParams::default() },
                ..SolverParams::default()
            };
            let (f, r) = field_tensor(obs, &w, sig, &p).unwrap();
            flagged |= r.flags.singular || r.flags.truncated;
            comps.push(f.components());
        }
        let scale = comps[1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..6 {
            let lo = comps.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min);
            let hi = comps.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max((hi - lo) / scale);
        }
        println!("AC3 ({t},{x}): spread {worst:.2e} flagged {flagged} scale {scale:.2e}");
    }
    println!("AC3 total {:.2?}", t0.elapsed());

    // AC-8(d): FD consistency second-order ratio.
    for (t, x) in [(1.0, -0.3), (0.7, 0.4)] {
        let obs = FiveVector::axisym(t, x, 1.0, -1.5);
        let p = SolverParams::default();
        let e1 = field_from_potential_check(obs, &w, sig, &p, 0.02).unwrap();
        let e2 = field_from_potential_check(obs, &w, sig, &p, 0.01).unwrap();
        println!("AC8d ({t},{x}): e(0.02) {e1:.3e} e(0.01) {e2:.3e} ratio {:.2}", e1 / e2);
    }

    // AC-9: descent residual ratios at 10 interior-cone points.
    let pts9: [[f64; 5]; 10] = [
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
    for a in [4.0, 6.0] {
        for (k, p5) in pts9.iter().enumerate() {
            let x5 = FiveVector::new(p5[0], p5[1], p5[2], p5[3], p5[4]);
            let r1 = laplacian_descent_residual(a, x5, sig, 0.05).unwrap();
            let r2 = laplacian_descent_residual(a, x5, sig, 0.025).unwrap();
            println!("AC9 a={a} pt{k}: r(0.05) {r1:.3e} r(0.025) {r2:.3e} ratio {:.2}", r1 / r2);
        }
    }
}
