use mima::analysis::lp_norm;
use mima::dynamics::{advance, AdvanceOptions, TimeGrid};
use mima::grid::GridSpec;
use mima::state::{make_initial, InitialKind, ModelParams};

fn drift_l4(nx: usize, nz: usize, u0: f64, amp: f64, nsteps: usize, dt: f64) -> (f64, f64) {
    let g = GridSpec::new(1.0, nx, nx, nz).unwrap();
    let p = ModelParams::new(1.0, u0).unwrap();
    let s0 = make_initial(
        &InitialKind::RandomBandlimited { amplitude: amp, cutoff: 3, mean_profile: None },
        g,
        &p,
        6,
    )
    .unwrap();
    let tg = TimeGrid::new(0.0, dt, nsteps).unwrap();
    let traj = advance(&s0, &p, &tg, &mut AdvanceOptions::default()).unwrap();
    let n0 = lp_norm(&s0.theta, 4.0).unwrap();
    let n1 = lp_norm(&traj.final_state().theta, 4.0).unwrap();
    let l2_0 = lp_norm(&s0.theta, 2.0).unwrap();
    let l2_1 = lp_norm(&traj.final_state().theta, 2.0).unwrap();
    ((n1 - n0).abs() / n0, (l2_1 - l2_0).abs() / l2_0)
}

#[test]
#[ignore]
fn l4_drift_source() {
    // Vertical only (u = 0 since theta = eta? no - random state has omega != 0).
    // Scan: U0 on/off, resolution effect, time dependence, amplitude effect.
    for (label, nx, nz, u0, amp, nsteps, dt) in [
        ("base 32x16  t=0.2", 32, 16, 1.0, 0.5, 100, 2e-3),
        ("half time   t=0.1", 32, 16, 1.0, 0.5, 50, 2e-3),
        ("U0 = 0      t=0.2", 32, 16, 0.0, 0.5, 100, 2e-3),
        ("amp/4       t=0.2", 32, 16, 1.0, 0.125, 100, 2e-3),
        ("res 64x32   t=0.2", 64, 32, 1.0, 0.5, 100, 2e-3),
        ("res 48x24   t=0.2", 48, 24, 1.0, 0.5, 100, 2e-3),
        ("dt/2        t=0.2", 32, 16, 1.0, 0.5, 200, 1e-3),
    ] {
        let (d4, d2) = drift_l4(nx, nz, u0, amp, nsteps, dt);
        println!("{label}: L4 drift {d4:.3e}  L2 drift {d2:.3e}");
    }
}
