use std::sync::Arc;

use morawetz_core::stepper::step_by;
use morawetz_core::{evolve, sample_data, DataFamily, Grid, Ledger, ModelParams, RadialState, StepperConfig, WeightKind};
use proptest::prelude::*;

fn params(p: f64) -> ModelParams {
    ModelParams::new(p, 0.5, WeightKind::PowR).unwrap()
}

fn gaussian(amplitude: f64, scale: f64, n: usize) -> RadialState {
    let grid = Arc::new(Grid::new(16.0, n).unwrap());
    let family = DataFamily::GaussianBump { amplitude, scale };
    sample_data(&family, grid, &params(4.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampled_u_recovers_the_profile(amplitude in 0.1f64..3.0, scale in 0.5f64..2.0) {
        let s = gaussian(amplitude, scale, 321);
        let u = s.u();
        for (j, &r) in s.grid().nodes().iter().enumerate().take(s.len() - 1).skip(1) {
            let exact = amplitude * (-(r / scale).powi(2)).exp();
            prop_assert!((u[j] - exact).abs() <= 1e-12 * amplitude.max(1.0));
        }
    }

    #[test]
    fn a_step_and_its_reverse_cancel(
        amplitude in 0.1f64..3.0,
        scale in 0.5f64..2.0,
        p in 3.1f64..4.9,
        lambda in 0.1f64..1.0,
    ) {
        let s = gaussian(amplitude, scale, 321);
        let cfg = StepperConfig::new(lambda).unwrap();
        let dt = cfg.dt(s.grid().dr());
        let fwd = step_by(&s, dt, &cfg, &params(p)).unwrap();
        let back = step_by(&fwd, -dt, &cfg, &params(p)).unwrap();
        for (a, b) in back.w.iter().zip(&s.w).chain(back.v.iter().zip(&s.v)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn ledger_integrals_only_grow(amplitude in 0.1f64..2.0, p in 3.1f64..4.9) {
        let s = gaussian(amplitude, 1.0, 161);
        let pr = params(p);
        let mut ledger = Ledger::new(&[1.0, 2.0], 4.0, &pr).unwrap();
        let mut last = 0.0;
        let mut ok = true;
        let mut watch = |st: &RadialState, dt: f64| {
            ledger.accumulate(st, dt);
            ok &= ledger.l2p2() >= last;
            last = ledger.l2p2();
            Ok(())
        };
        evolve(&s, 4.0, &StepperConfig::default(), &pr, &mut [&mut watch]).unwrap();
        prop_assert!(ok);
        prop_assert!(last > 0.0);
    }
}
