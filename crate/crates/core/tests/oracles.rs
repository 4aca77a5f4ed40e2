//! Values frozen from an independent dense implementation (separate
//! superoperator assembly, SVD kernel and simplex maximization of the phase
//! distribution), plus hand-evaluated rates and caption numbers.

use maser_core::analysis::analyze_point;
use maser_core::figures::caption_params;
use maser_core::model::{bose_occupation, derive_bath_occupations, DensityMatrix, MaserModel, MaserParams};
use maser_core::steady_state::{analytic_steady_state, numeric_steady_state, printed_closed_forms};
use maser_core::sync::smax_numeric;
use maser_core::thermo::{analytic_currents, ThermoCurrents};
use maser_core::SolverChoice;
use num_complex::Complex64;

struct Frozen {
    delta: f64,
    n_h2: f64,
    p: f64,
    rho11: f64,
    rho22: f64,
    rho33: f64,
    rho12: Complex64,
    rho23: Complex64,
    power: f64,
    q_inc: f64,
    q_coh: f64,
    q_cold: f64,
    s_max: f64,
}

#[rustfmt::skip]
const FROZEN: [Frozen; 4] = [
    Frozen {
        delta: 0.0, n_h2: 0.5, p: 0.5,
        rho11: 6.676263746637089e-02, rho22: 1.843819323169868e-01, rho33: 1.843819323169868e-01,
        rho12: Complex64::new(0.0, -1.699155142304243e-02),
        rho23: Complex64::new(-3.775900316231614e-03, 0.0),
        power: -6.796620569216973e-03, q_inc: 6.796620569217005e-03,
        q_coh: 3.398310284608453e-03, q_cold: -3.398310284608487e-03,
        s_max: 1.912893446780345e-04,
    },
    Frozen {
        delta: 0.05, n_h2: 0.5, p: 0.5,
        rho11: 6.67669369633956e-02, rho22: 1.848796313028819e-01, rho33: 1.81698894179058e-01,
        rho12: Complex64::new(-1.96217891555373e-03, -1.717493356186613e-02),
        rho23: Complex64::new(-3.470729293399345e-03, -1.230101120348625e-03),
        power: -6.793177862940855e-03, q_inc: 7.013167617310249e-03,
        q_coh: 3.13564562648448e-03, q_cold: -3.355635380853742e-03,
        s_max: 1.965327580602083e-04,
    },
    Frozen {
        delta: 0.05, n_h2: 0.05, p: 0.5,
        rho11: 7.195830145567039e-02, rho22: 4.197977402144955e-02, rho33: 4.024292079399277e-02,
        rho12: Complex64::new(6.062487721029911e-04, 5.16218308831146e-03),
        rho23: Complex64::new(1.514745577553012e-03, 6.622074627710869e-04),
        power: 2.199574280935495e-03, q_inc: -2.324063359207571e-03,
        q_coh: -9.610646760581987e-04, q_cold: 1.08555375433026e-03,
        s_max: 7.833724284512025e-05,
    },
    Frozen {
        delta: 0.05, n_h2: 0.5, p: -0.99,
        rho11: 6.348976800683757e-02, rho22: 1.461923032762324e-01, rho33: 1.411960795125656e-01,
        rho12: Complex64::new(1.022960103409732e-03, -5.213148706202052e-03),
        rho23: Complex64::new(-6.976246421959888e-02, -1.131551283838311e-02),
        power: -1.993823810173826e-03, q_inc: 1.277730012017541e-01,
        q_coh: -1.247938654141631e-01, q_cold: -9.853119774169779e-04,
        s_max: 4.579543862814362e-04,
    },
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn frozen_steady_states_and_observables() {
    for f in &FROZEN {
        let params = MaserParams {
            delta: f.delta,
            n_h2: f.n_h2,
            p: f.p,
            ..MaserParams::default()
        };
        let a = analyze_point(params, SolverChoice::Auto).unwrap();
        let rho = &a.solution.rho;
        let tag = format!("delta {} n_h2 {} p {}", f.delta, f.n_h2, f.p);
        assert!((rho.population(1) - f.rho11).abs() < 1e-11, "{tag}");
        assert!((rho.population(2) - f.rho22).abs() < 1e-11, "{tag}");
        assert!((rho.population(3) - f.rho33).abs() < 1e-11, "{tag}");
        assert!((rho.get(1, 2) - f.rho12).norm() < 1e-11, "{tag}");
        assert!((rho.get(2, 3) - f.rho23).norm() < 1e-11, "{tag}");
        let c = a.currents;
        assert!(rel(c.power, f.power) < 1e-9, "{tag}");
        assert!(rel(c.q_hot_inc, f.q_inc) < 1e-9, "{tag}");
        assert!(rel(c.q_hot_coh, f.q_coh) < 1e-9, "{tag}");
        assert!(rel(c.q_cold, f.q_cold) < 1e-9, "{tag}");
        assert!(
            rel(a.sync.s_max_numeric, f.s_max) < 1e-8,
            "{tag}: {}",
            a.sync.s_max_numeric
        );
    }
}

#[test]
fn bath_inversion() {
    let b = derive_bath_occupations(&MaserParams {
        n_c: 0.1,
        ..MaserParams::default()
    });
    assert!((b.t_c - 1.0 / 11f64.ln()).abs() < 1e-15);
    assert!((bose_occupation(1.0, b.t_c) - 0.1).abs() < 1e-14);
    let flat = derive_bath_occupations(&MaserParams {
        delta: 0.0,
        ..MaserParams::default()
    });
    assert_eq!(flat.n_h3, 0.5);
}

#[test]
fn hand_evaluated_rates_on_ground_state() {
    let params = caption_params(5.0, 0.5, 0.0);
    let model = MaserModel::new(params).unwrap();
    let g = *DensityMatrix::ground().matrix();
    let cold = model.cold_dissipator(&g);
    assert!((cold[(1, 1)].re - 0.02).abs() < 1e-15);
    assert!((cold[(0, 0)].re + 0.02).abs() < 1e-15);
    let hot = model.hot_dissipator(&g);
    assert!((hot[(2, 2)].re - 0.1).abs() < 1e-15);
    assert!((hot[(3, 3)].re - 0.1).abs() < 1e-15);
    assert!((hot[(2, 3)].re - 0.05).abs() < 1e-15);
    assert!((model.rhs(&g)[(0, 0)].re + 0.22).abs() < 1e-15);
}

#[test]
fn printed_population_two_is_off_unless_gamma_c_is_one() {
    // ρ22 solved from the reduced system against the printed numerator, whose
    // λ² bracket lacks a factor γc.
    let params = caption_params(5.0, 0.5, 0.0);
    let rho = analytic_steady_state(&MaserModel::new(params).unwrap()).unwrap().rho;
    let printed = printed_closed_forms(&params);
    assert!((printed.rho11 - rho.population(1)).abs() < 1e-14);
    assert!((printed.rho12 - rho.get(1, 2)).norm() < 1e-14);
    assert!((printed.rho23 - rho.get(2, 3).re).abs() < 1e-14);
    assert!((printed.rho22 - rho.population(2)).abs() > 1e-6);

    let MaserParams {
        lambda_drive: lam,
        gamma_h: gh,
        gamma_c: gc,
        n_c: nc,
        n_h2: nh,
        p,
        ..
    } = params;
    let (xc, xh) = (gc * (1.0 + nc), gh * (1.0 + nh));
    let corrected = (lam * lam * (gc * (nh + nc + 2.0 * nh * nc) + 2.0 * xh * nh * (1.0 + p))
        + xc * xh * (1.0 + p) * nh * (xc + xh * (1.0 + p)))
        / printed.denominator;
    assert!((corrected - rho.population(2)).abs() < 1e-14);
}

#[test]
fn closed_form_currents_carry_four_lambda_squared() {
    let params = caption_params(5.0, 0.5, 0.0);
    let model = MaserModel::new(params).unwrap();
    let rho = numeric_steady_state(&model).unwrap().rho;
    let observed = ThermoCurrents::from_state(&model, &rho);
    let closed = analytic_currents(&params).unwrap();
    assert!(rel(closed.power, observed.power) < 1e-9);
    // Halving the prefactor (2λ² instead of 4λ²) misses by a factor two.
    assert!(rel(0.5 * closed.power, observed.power) > 0.4);
}

#[test]
fn caption_efficiency_and_cop() {
    let engine = analyze_point(caption_params(5.0, 0.5, 0.0), SolverChoice::Analytic).unwrap();
    assert!((engine.merit.eta.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    let fridge = analyze_point(caption_params(0.5, 0.5, 0.0), SolverChoice::Analytic).unwrap();
    assert!((fridge.merit.chi.unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn smax_matches_frozen_on_conjugated_state() {
    let f = &FROZEN[1];
    let params = MaserParams {
        delta: f.delta,
        n_h2: f.n_h2,
        p: f.p,
        ..MaserParams::default()
    };
    let rho = numeric_steady_state(&MaserModel::new(params).unwrap()).unwrap().rho;
    assert!(rel(smax_numeric(&rho.conjugate()).s_max, f.s_max) < 1e-8);
}
