use dimer::scenarios::{preset, Preset};
use dimer::zeno::{analytic_survival, run_zeno, ZenoProtocol};
use dimer::{Error, NamedState, PureState, SystemParams};
use proptest::prelude::*;

fn free(j: f64, gamma: f64) -> SystemParams {
    SystemParams::free(1.5e11, j, gamma)
}

#[test]
fn hundred_measurements_near_gaussian_law() {
    let proto = ZenoProtocol::over(1e-11, 1e-9, free(4e9, 0.0)).unwrap();
    let last = run_zeno(&proto).unwrap().last().unwrap().survival;
    let exact_product: f64 = (0..100).map(|_| (4e9f64 * 1e-11).cos().powi(2)).product();
    assert!((last - exact_product).abs() < 1e-9);
    assert!((last - 0.852).abs() / 0.852 < 0.01, "{last}");
}

#[test]
fn other_entangled_targets() {
    // |s⟩ and |a⟩ are eigenstates of the exchange term, so they survive
    // without dephasing.
    for n in [NamedState::S, NamedState::A] {
        let proto = ZenoProtocol::with_target(1e-11, 20, PureState::named(n), free(4e9, 0.0)).unwrap();
        for p in run_zeno(&proto).unwrap() {
            assert!((p.survival - 1.0).abs() < 1e-12, "{n}");
        }
    }
}

#[test]
fn extinguished_chain_is_an_error() {
    // |p⟩ picks up relative phase 2ω₀τ, so ω₀τ = π/2 rotates it fully into |q⟩.
    let params = free(4e9, 0.0);
    let tau = std::f64::consts::FRAC_PI_2 / params.omega0;
    let proto = ZenoProtocol::with_target(tau, 3, PureState::named(NamedState::P), params).unwrap();
    match run_zeno(&proto) {
        Err(Error::ZenoExtinguished { k, probability }) => {
            assert_eq!(k, 1);
            assert!(probability <= 1e-15);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn dephasing_helps_past_quarter_turn() {
    // For Jτ > π/4 a single interval leaves cos²(Jτ) < 1/2 and dephasing pulls
    // the overlap back toward 1/2.
    let (j, tau) = (4e9, 0.9 / 4e9);
    let clean = run_zeno(&ZenoProtocol::new(tau, 1, free(j, 0.0)).unwrap()).unwrap()[0].survival;
    let noisy = run_zeno(&ZenoProtocol::new(tau, 1, free(j, 1e11)).unwrap()).unwrap()[0].survival;
    assert!(clean < 0.5 && noisy > clean, "{clean} {noisy}");
}

#[test]
fn sweep_preset_orders_survival() {
    let Preset::Zeno(sweep) = preset::<f64>("zeno_sweep").unwrap() else { panic!("zeno_sweep is not a Zeno preset") };
    let series = sweep.run().unwrap();
    let finals: Vec<f64> = series.iter().map(|s| s.coherent.last().unwrap().survival).collect();
    assert!(finals.windows(2).all(|w| w[0] < w[1]), "{finals:?}");
    for s in &series {
        let table = s.table();
        assert_eq!(table.len(), s.coherent.len());
        for (d, c) in s.dephased.iter().zip(&s.coherent) {
            assert!(d.survival <= c.survival + 1e-15);
        }
    }
}

proptest! {
    #[test]
    fn matches_exact_product(j in 1e8f64..6e9, tau_frac in 0.001f64..0.9, n in 1usize..300) {
        let tau = tau_frac / j;
        let proto = ZenoProtocol::new(tau, n, free(j, 0.0)).unwrap();
        for p in run_zeno(&proto).unwrap() {
            prop_assert!((p.survival - analytic_survival(j, tau, p.k).exact).abs() <= 1e-9);
        }
    }

    #[test]
    fn survival_non_increasing_in_k(j in 1e8f64..6e9, tau_frac in 0.001f64..0.9, gamma in 0.0f64..1e10) {
        let tau = tau_frac / j;
        let curve = run_zeno(&ZenoProtocol::new(tau, 60, free(j, gamma)).unwrap()).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[1].survival <= w[0].survival));
    }

    #[test]
    fn finer_measurement_preserves_better(j in 1e8f64..6e9, n in 2usize..200, total_frac in 0.1f64..3.0) {
        let total = total_frac / j;
        let coarse = ZenoProtocol::new(total / n as f64, n, free(j, 0.0));
        let fine = ZenoProtocol::new(total / (n + 1) as f64, n + 1, free(j, 0.0));
        if let (Ok(c), Ok(f)) = (coarse, fine) {
            let sc = run_zeno(&c).unwrap().last().unwrap().survival;
            let sf = run_zeno(&f).unwrap().last().unwrap().survival;
            prop_assert!(sf >= sc - 1e-12, "{} < {}", sf, sc);
        }
    }

    #[test]
    fn dephasing_never_helps(j in 1e8f64..6e9, tau_frac in 0.001f64..std::f64::consts::FRAC_PI_4, gamma in 0.0f64..1e10) {
        let tau = tau_frac / j;
        let clean = run_zeno(&ZenoProtocol::new(tau, 40, free(j, 0.0)).unwrap()).unwrap();
        let noisy = run_zeno(&ZenoProtocol::new(tau, 40, free(j, gamma)).unwrap()).unwrap();
        for (a, b) in clean.iter().zip(&noisy) {
            prop_assert!(b.survival <= a.survival + 1e-12);
        }
    }

    #[test]
    fn gaussian_limit(j in 1e8f64..6e9, tau_frac in 1e-4f64..0.02, total_frac in 0.1f64..2.0) {
        let tau = tau_frac / j;
        let n = ((total_frac / j) / tau).round().max(1.0) as usize;
        let a = analytic_survival(j, tau, n);
        prop_assert!((a.exact - a.gaussian).abs() / a.exact < 0.01);
    }
}
