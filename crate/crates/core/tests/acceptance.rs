//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs as a plain binary so the lines always show under
//! `cargo test`.

use std::time::Instant;

use lame_susy::elliptic::{jacobi_complex, jacobi_sn_cn_dn, lattice_from_modulus, ModulusParams};
use lame_susy::lame::{
    auxiliary_points, fit_ansatz, product_ode_residual, BlochBasis, FitOutcome, LameModel, ProductEquation,
};
use lame_susy::spectral::{band_structure, isospectral_compare, schrodinger_residual};
use lame_susy::susy::{defect_bound_state, PartnerPotential, SeedSpec};
use lame_susy::{Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn period_grid(model: &LameModel, n: usize) -> Vec<f64> {
    let t = model.period();
    (0..n).map(|i| t * (i as f64 + 0.5) / n as f64).collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn c1_band_edges_11() -> Outcome {
    let start = Instant::now();
    let model = LameModel::new(1, 1, 0.99).unwrap();
    let analytic = model.band_edges().unwrap();
    let v = |x: f64| model.potential(x);
    let grid = linspace(analytic[0] - 1.0, analytic[2] + 3.0, 400);
    let bs = band_structure(&v, model.period(), &grid).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    if bs.edges.len() != 3 {
        return outcome(false, format!("found {} edges: {:?}", bs.edges.len(), bs.edges));
    }
    let dev = analytic.iter().zip(&bs.edges).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        dev < 1e-6 && elapsed < 5.0,
        format!("edges {:?}, max deviation {dev:.2e} (tol 1e-6), {elapsed:.2} s (limit 5 s)", bs.edges),
    )
}

fn c2_band_edges_21() -> Outcome {
    let model = LameModel::new(2, 1, 0.95).unwrap();
    let analytic = model.band_edges().unwrap();
    let v = |x: f64| model.potential(x);
    let grid = linspace(analytic[0] - 1.0, analytic[4] + 3.0, 2000);
    let bs = band_structure(&v, model.period(), &grid).unwrap();
    if bs.edges.len() != 5 {
        return outcome(false, format!("found {} edges: {:?}", bs.edges.len(), bs.edges));
    }
    let dev = analytic.iter().zip(&bs.edges).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let e0_ok = (analytic[0] - 3.8).abs() < 1e-14;
    outcome(
        dev < 1e-5 && e0_ok && bs.finite_bands() == 2 && bs.finite_gaps() == 2,
        format!(
            "E0 = {:.12}, max deviation {dev:.2e} (tol 1e-5), {} finite bands, {} finite gaps",
            analytic[0],
            bs.finite_bands(),
            bs.finite_gaps()
        ),
    )
}

fn c3_reference_roots() -> Outcome {
    let m11 = LameModel::new(1, 1, 0.99).unwrap();
    let a = auxiliary_points(&m11, 2.4).unwrap().points;
    let m21 = LameModel::new(2, 1, 0.95).unwrap();
    let b = auxiliary_points(&m21, 3.5).unwrap().points;
    let expect_a = [Complex64::new(-1.089, 0.0), Complex64::new(2.607, 0.0)];
    let expect_b = [Complex64::new(-2.392, 0.0), Complex64::new(1.26, 0.614), Complex64::new(1.26, -0.614)];
    let dev_a = a.iter().zip(&expect_a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let dev_b = b.iter().zip(&expect_b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let conj = (b[2] - b[1].conj()).norm();
    outcome(
        a.len() == 2 && b.len() == 3 && dev_a < 2e-3 && dev_b < 2e-3 && conj < 1e-10,
        format!(
            "a = [{:.4}, {:.4}], b = [{:.4}, {:.4}{:+.4}i, conj], deviations {dev_a:.1e} / {dev_b:.1e} (tol 2e-3)",
            a[0].re, a[1].re, b[0].re, b[1].re, b[1].im
        ),
    )
}

fn c4_solution_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_res: f64 = 0.0;
    let mut worst_w: f64 = 0.0;
    let mut count = 0;
    for &(m, ell) in &[(1, 1), (2, 1), (1, 0), (2, 0)] {
        let model = LameModel::new(m, ell, 0.8).unwrap();
        let xs = period_grid(&model, 24);
        let h = 5e-3 * model.period();
        let v = |x: f64| model.potential(x);
        for _ in 0..100 {
            let e: f64 = rng.gen_range(0.0..12.0);
            let basis = BlochBasis::new(&model, e).unwrap();
            for sol in [&basis.first, &basis.second] {
                let r = schrodinger_residual(&|x| sol.value(x), &v, e, &xs, h);
                worst_res = worst_res.max(r);
            }
            let w: Vec<Complex64> = xs.iter().map(|&x| basis.pair(x).unwrap().wronskian).collect();
            let var = w.iter().map(|wi| (wi - w[0]).norm()).fold(0.0, f64::max) / w[0].norm();
            worst_w = worst_w.max(var);
            count += 1;
        }
    }
    outcome(
        worst_res < 1e-8 && worst_w < 1e-8,
        format!("{count} energies, worst residual {worst_res:.2e}, worst Wronskian variation {worst_w:.2e} (tol 1e-8)"),
    )
}

fn c5_closed_form_partner() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for &(m, ell, k2) in &[(1, 1, 0.99), (2, 1, 0.95)] {
        let model = LameModel::new(m, ell, k2).unwrap();
        let e0 = model.ground_energy().unwrap();
        let xs = period_grid(&model, 64);
        for eps in [e0 - 1.5, e0 - 0.3, e0] {
            for lambda in [0.0, f64::INFINITY] {
                let seed = SeedSpec::new(&model, eps, lambda, false).unwrap();
                let p = PartnerPotential::new(seed, (0.0, model.period())).unwrap();
                for &x in &xs {
                    let closed = p.closed_form(x).unwrap().unwrap();
                    worst = worst.max((closed - p.value(x).unwrap()).abs());
                }
                cases += 1;
            }
        }
    }
    outcome(worst < 1e-8, format!("{cases} seeds, sup |closed - identity| = {worst:.2e} (tol 1e-8)"))
}

fn c6_isospectrality() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for &(m, ell, k2) in &[(1, 1, 0.99), (2, 1, 0.95)] {
        let model = LameModel::new(m, ell, k2).unwrap();
        let edges = model.band_edges().unwrap();
        let grid = linspace(edges[0] - 2.0, edges[edges.len() - 1] + 2.0, 200);
        let v = |x: f64| model.potential(x);
        for lambda in [0.0, f64::INFINITY] {
            let seed = SeedSpec::new(&model, edges[0] - 0.5, lambda, false).unwrap();
            let p = PartnerPotential::new(seed, (0.0, model.period())).unwrap();
            let vt = |x: f64| p.closed_form(x).unwrap().unwrap_or(f64::NAN);
            let d = isospectral_compare(&v, &vt, model.period(), &grid).unwrap();
            notes.push(format!("({m},{ell}) {d:.1e}"));
            worst = worst.max(d);
        }
    }
    outcome(worst < 1e-6, format!("max |D_V - D_partner| {} (tol 1e-6)", notes.join(", ")))
}

fn c7_defect_state() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for &(m, ell, k2, eps, lambda) in &[(1, 1, 0.99, 2.4, 1.5), (2, 1, 0.95, 3.5, 1.0)] {
        let model = LameModel::new(m, ell, k2).unwrap();
        let k = model.modulus.big_k;
        let seed = SeedSpec::new(&model, eps, lambda, false).unwrap();
        let state = defect_bound_state(&seed, (-4.0 * k, 4.0 * k)).unwrap();
        let p = PartnerPotential::new(seed, (-4.0 * k, 4.0 * k)).unwrap();
        let xs = linspace(-4.0 * k, 4.0 * k, 81);
        let res = p.bound_state_residual(&xs).unwrap();
        let rel = (state.decay_rate - state.floquet_rate).abs() / state.floquet_rate;
        ok &= res < 1e-6 && state.norm_squared.is_finite() && state.norm_squared > 0.0 && rel < 0.01;
        notes.push(format!(
            "({m},{ell}) residual {res:.1e}, norm^2 {:.4}, decay {:.5} vs Floquet {:.5}",
            state.norm_squared, state.decay_rate, state.floquet_rate
        ));
        match SeedSpec::new(&model, eps, -lambda, false) {
            Err(Error::NodalSeed(x)) => notes.push(format!("node at {x:.6}")),
            other => {
                ok = false;
                notes.push(format!("negative lambda not rejected: {:?}", other.err()));
            }
        }
    }
    outcome(ok, notes.join("; "))
}

fn c8_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = [0.0f64; 6];
    for &k2 in &[0.1, 0.5, 0.75, 0.95, 0.99] {
        let lat = lattice_from_modulus(k2).unwrap();
        let modulus = ModulusParams::new(k2).unwrap();
        let legendre = (lat.omegap() * lat.eta - lat.eta_p * lat.omega
            - Complex64::new(0.0, std::f64::consts::FRAC_PI_2))
        .norm();
        worst[2] = worst[2].max(legendre);
        let mut n = 0;
        while n < 200 {
            let z = Complex64::new(
                rng.gen_range(-lat.omega..lat.omega),
                rng.gen_range(-lat.omegap_im..lat.omegap_im),
            );
            if lat.distance_to_lattice(z) < 0.1 || lat.distance_to_lattice(z - Complex64::new(0.0, lat.omegap_im)) < 0.05 {
                continue;
            }
            let x = z.re * 3.0;
            let (sn, cn, dn) = jacobi_sn_cn_dn(x, k2).unwrap();
            worst[0] = worst[0].max((sn * sn + cn * cn - 1.0).abs());
            worst[1] = worst[1].max((dn * dn + k2 * sn * sn - 1.0).abs());
            if let Ok((s, c, d)) = jacobi_complex(z, &modulus, 1e-8) {
                let scale = 1.0 + s.norm_sqr() + c.norm_sqr() + d.norm_sqr();
                worst[0] = worst[0].max((s * s + c * c - 1.0).norm() / scale);
                worst[1] = worst[1].max((d * d + s * s * k2 - 1.0).norm() / scale);
            }
            let (p, dp) = lat.wp_and_prime(z).unwrap();
            let rhs = p * p * p * 4.0 - p * lat.g2 - lat.g3;
            let scale = dp.norm_sqr() + rhs.norm() + 1.0;
            worst[3] = worst[3].max((dp * dp - rhs).norm() / scale);
            let two_w = Complex64::new(2.0 * lat.omega, 0.0);
            let zs = lat.zeta(z + two_w).unwrap() - lat.zeta(z).unwrap() - 2.0 * lat.eta;
            worst[4] = worst[4].max(zs.norm() / (1.0 + lat.zeta(z).unwrap().norm()));
            let expect = -lat.sigma(z) * (Complex64::new(2.0 * lat.eta, 0.0) * (z + lat.omega)).exp();
            let got = lat.sigma(z + two_w);
            worst[5] = worst[5].max((got - expect).norm() / expect.norm());
            n += 1;
        }
    }
    let names = ["sn^2+cn^2", "dn^2+k^2 sn^2", "Legendre", "wp'^2 cubic", "zeta shift", "sigma shift"];
    let max = worst.iter().copied().fold(0.0, f64::max);
    let detail: Vec<String> = names.iter().zip(&worst).map(|(n, w)| format!("{n} {w:.1e}")).collect();
    outcome(max < 1e-11, format!("{} (tol 1e-11)", detail.join(", ")))
}

fn c9_fitter() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let lat = lattice_from_modulus(0.83).unwrap();
    let eb = lat.ebar_product();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let et: f64 = rng.gen_range(-3.0..6.0);
        let FitOutcome::Solved(a) = fit_ansatz(1, 1, &lat, et, -1, 1).unwrap() else {
            return outcome(false, format!("(1,1) infeasible at {et}"));
        };
        worst = worst.max((a.coefficient(0) - (et + lat.e1)).abs()).max((a.coefficient(-1) - eb).abs());
        let FitOutcome::Solved(c) = fit_ansatz(2, 1, &lat, et, -1, 2).unwrap() else {
            return outcome(false, format!("(2,1) infeasible at {et}"));
        };
        let b1 = 2.0 * lat.e1 + et / 3.0;
        worst = worst
            .max((c.coefficient(1) - b1).abs())
            .max((c.coefficient(0) - (et / 3.0 - lat.e1) * b1).abs())
            .max((c.coefficient(-1) - eb * b1 / 3.0).abs());
    }
    let et32 = 1.7;
    let res32 = match fit_ansatz(3, 2, &lat, et32, -2, 3).unwrap() {
        FitOutcome::Solved(c) => {
            let eq = ProductEquation::new(3, 2, &lat, et32);
            product_ode_residual(&eq, &c, &eq.default_samples()).unwrap()
        }
        FitOutcome::Infeasible { .. } => f64::INFINITY,
    };
    outcome(
        worst < 1e-10 && res32 < 1e-8,
        format!("closed-form coefficients to {worst:.1e} (tol 1e-10), (3,2) residual {res32:.1e} (tol 1e-8)"),
    )
}

fn c10_involution() -> Outcome {
    let model = LameModel::new(1, 1, 0.99).unwrap();
    let k = model.modulus.big_k;
    let seed = SeedSpec::new(&model, 2.4, 1.5, false).unwrap();
    let p = PartnerPotential::new(seed, (-4.0 * k, 4.0 * k)).unwrap();
    let worst = linspace(-4.0 * k, 4.0 * k, 201)
        .into_iter()
        .map(|x| (p.involution(x).unwrap() - model.potential(x)).abs())
        .fold(0.0, f64::max);
    outcome(worst < 1e-9, format!("sup |V_back - V| = {worst:.2e} (tol 1e-9)"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("band edges (1,1)", c1_band_edges_11),
        ("band edges (2,1)", c2_band_edges_21),
        ("reference figure roots", c3_reference_roots),
        ("solution exactness", c4_solution_exactness),
        ("closed-form partner", c5_closed_form_partner),
        ("isospectrality", c6_isospectrality),
        ("defect bound state", c7_defect_state),
        ("special-function identities", c8_identities),
        ("ansatz fitter", c9_fitter),
        ("involution", c10_involution),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {} [{:.2} s]", i + 1, out.detail, start.elapsed().as_secs_f64());
        if !out.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
