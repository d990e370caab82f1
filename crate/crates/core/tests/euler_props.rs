use gdblow_core::dsl::{Domain, Profile};
use gdblow_core::euler::*;
use gdblow_core::gas::GasParams;

const TWO_PI: &str = "6.283185307179586";

fn gp() -> GasParams {
    GasParams::new(1.4).unwrap()
}

fn periodic(v0: &str, rho0: &str, p0: &str) -> Profile {
    let s = |e: &str| e.replace("TP", TWO_PI);
    Profile::parse(&s(v0), &s(rho0), &s(p0), Domain::new(0.0, 1.0).unwrap()).unwrap()
}

fn max_rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn periodic_run_conserves_mass_and_momentum() {
    let pr = periodic("0.5 + 0.1*sin(TP*x)", "1 + 0.2*exp(-40*(x-0.5)^2)", "1 + 0.1*cos(TP*x)");
    let opts = SimOptions {
        cells: 256,
        t_end: 0.3,
        ..SimOptions::default()
    };
    let r = simulate(&pr, &gp(), &opts).unwrap();
    assert_eq!(r.outcome, SimOutcome::Completed);
    assert!(r.steps >= 50);
    assert!(max_rel(r.last.mass(), r.initial_mass) <= 1e-12);
    assert!(max_rel(r.last.momentum(), r.initial_momentum) <= 1e-10);
}

#[test]
fn galilean_shift() {
    // Run B starts from run A's data with v + c; with c 10 dt = h the
    // exact solution of B is A shifted by one cell.
    let n = 256;
    let c = 0.5;
    let base = ("1e-3*sin(TP*x)", "1 + 1e-3*cos(TP*x)", "1 + 1e-3*sin(2*TP*x)");
    let a = init_grid(&periodic(base.0, base.1, base.2), &gp(), n).unwrap();
    let vb = format!("{c} + {}", base.0);
    let b = init_grid(&periodic(&vb, base.1, base.2), &gp(), n).unwrap();
    let dt = a.h / (10.0 * c);
    assert!(dt * b.max_wave_speed() / b.h <= 0.5);
    let (mut a, mut b) = (a, b);
    for _ in 0..10 {
        a = a.step_dt(dt, Boundary::Periodic).unwrap();
        b = b.step_dt(dt, Boundary::Periodic).unwrap();
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let (_, va, _) = a.primitive(i);
        let (_, vb, _) = b.primitive((i + 1) % n);
        worst = worst.max((vb - c - va).abs());
    }
    assert!(worst <= 1e-6, "{worst}");
}

fn block_average(fine: &GridState, n: usize) -> Vec<f64> {
    let k = fine.cells() / n;
    (0..n)
        .map(|i| (0..k).map(|j| fine.u[i * k + j][0]).sum::<f64>() / k as f64)
        .collect()
}

#[test]
fn second_order_on_smooth_pulse() {
    let pr = periodic("0", "1 + 0.1*exp(-100*(x-0.5)^2)", "(1 + 0.1*exp(-100*(x-0.5)^2))^1.4");
    let run = |cells| {
        let opts = SimOptions {
            cells,
            t_end: 0.1,
            cfl: 0.4,
            ..SimOptions::default()
        };
        simulate(&pr, &gp(), &opts).unwrap().last
    };
    let reference = run(4096);
    let errs: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| {
            let g = run(n);
            let r = block_average(&reference, n);
            g.u.iter().zip(&r).map(|(u, r)| (u[0] - r).abs()).sum::<f64>() * g.h
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{errs:?}");
    }
}

#[test]
fn entropy_range_is_transported() {
    // Minmod clips the extrema of the advected entropy, so the range loss
    // shrinks with refinement (roughly h^1.3).
    let pr = periodic("0.3", "1 + 0.1*sin(TP*x)", "1");
    let range = |s: &[f64]| {
        s.iter().cloned().fold(f64::MIN, f64::max) - s.iter().cloned().fold(f64::MAX, f64::min)
    };
    let loss = |cells| {
        let opts = SimOptions {
            cells,
            t_end: 0.2,
            ..SimOptions::default()
        };
        let r = simulate(&pr, &gp(), &opts).unwrap();
        (range(&r.snapshots[0].s) - range(&r.snapshots.last().unwrap().s)).abs()
    };
    let (coarse, fine) = (loss(1024), loss(2048));
    assert!(fine < coarse);
    assert!(fine <= 1e-4, "{fine}");
}
