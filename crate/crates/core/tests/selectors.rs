mod common;

use common::{brute_force_sluf, noise_matrix, random_instance, ridge_toy};
use featmask::models::{fit, ModelKind, ModelSpec};
use featmask::selectors::{finalize_selection, flbmo, gbmo, sluf, FlbmoConfig, GbmoConfig, StopReason};
use featmask::{Dataset, Error, LossKind, Mask, Predictor, Task};
use ndarray::Array1;
use proptest::prelude::*;

const MSE: LossKind = LossKind::MeanSquaredError;

#[test]
fn zero_weight_feature_is_least_useful() {
    let x = noise_matrix(50, 2, 1);
    let y = x.column(0).mapv(|v| 3.0 * v);
    let model = fit(
        &ModelSpec::new(ModelKind::Ridge, 0).with("alpha", 0.0),
        x.view(),
        y.view(),
        Task::Regression,
    )
    .unwrap();
    let xv = noise_matrix(20, 2, 2);
    let yv = xv.column(0).mapv(|v| 3.0 * v);
    let r = sluf(&Mask::ones(2), xv.view(), yv.view(), &model, MSE).unwrap();
    assert_eq!(r.j_star, 1);
    assert!(r.loss_min < 1e-12);
}

#[test]
fn singleton_support_returns_its_index() {
    let inst = random_instance(3);
    let m = inst.mask.len();
    let mask = Mask::from_support(m, &[m - 1]).unwrap();
    let r = sluf(&mask, inst.val.features(), inst.val.targets(), &inst.model, inst.loss).unwrap();
    assert_eq!(r.j_star, m - 1);
    let (_, l) = brute_force_sluf(&mask, inst.val.features(), inst.val.targets(), &inst.model, inst.loss);
    assert_eq!(r.loss_min, l);
}

#[test]
fn sluf_errors() {
    let inst = random_instance(4);
    let m = inst.mask.len();
    let err = sluf(
        &Mask::zeros(m),
        inst.val.features(),
        inst.val.targets(),
        &inst.model,
        inst.loss,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Selection(_)));
    let wide = noise_matrix(5, m + 1, 0);
    let err = sluf(
        &Mask::ones(m + 1),
        wide.view(),
        Array1::zeros(5).view(),
        &inst.model,
        inst.loss,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Dimension(_)));
}

#[test]
fn gbmo_keeps_the_signal_feature() {
    let (train, val, model) = ridge_toy(5);
    let (mask, trace) = gbmo(&train, &val, &model, MSE, &GbmoConfig::new(0.01)).unwrap();
    assert_eq!(mask.support(), vec![0]);
    assert_eq!(trace.stop, StopReason::FeatureFloor);
    assert_eq!(trace.eliminated_indices(), vec![1]);
    trace.check_structure().unwrap();
}

#[test]
fn gbmo_stops_when_slack_is_exceeded() {
    let make = |seed: u64| {
        let x = noise_matrix(50, 3, seed);
        let y = x.column(0).to_owned() + &x.column(1).mapv(|v| 0.5 * v);
        Dataset::new(x, y, Task::Regression).unwrap()
    };
    let (train, val) = (make(11), make(12));
    let model = fit(
        &ModelSpec::new(ModelKind::Ridge, 0).with("alpha", 0.0),
        train.features(),
        train.targets(),
        Task::Regression,
    )
    .unwrap();
    let (mask, trace) = gbmo(&train, &val, &model, MSE, &GbmoConfig::new(0.01)).unwrap();
    assert_eq!(mask.support(), vec![0, 1]);
    assert_eq!(trace.stop, StopReason::SlackExceeded);
    let stop = trace.stop_record();
    assert_eq!(stop.remaining, 2);
    assert!(stop.loss_min > 0.05);
}

#[test]
fn flbmo_eta_one_keeps_signal_and_full_eta_keeps_all() {
    let (train, val, model) = ridge_toy(6);
    let (mask, trace) = flbmo(&train, &val, &model, MSE, &FlbmoConfig { eta: 1 }).unwrap();
    assert_eq!(mask.support(), vec![0]);
    assert_eq!(trace.records.len(), 2);
    let (mask, trace) = flbmo(&train, &val, &model, MSE, &FlbmoConfig { eta: 2 }).unwrap();
    assert_eq!(mask, Mask::ones(2));
    assert_eq!(trace.eliminations().count(), 0);
    assert_eq!(trace.stop, StopReason::TargetReached);
    let err = flbmo(&train, &val, &model, MSE, &FlbmoConfig { eta: 3 }).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn gbmo_config_is_checked() {
    let (train, val, model) = ridge_toy(7);
    for config in [
        GbmoConfig {
            mu: -0.1,
            min_features: 1,
        },
        GbmoConfig {
            mu: f64::NAN,
            min_features: 1,
        },
        GbmoConfig {
            mu: 0.1,
            min_features: 0,
        },
        GbmoConfig {
            mu: 0.1,
            min_features: 3,
        },
    ] {
        assert!(
            matches!(gbmo(&train, &val, &model, MSE, &config), Err(Error::Config(_))),
            "{config:?}"
        );
    }
}

#[test]
fn huge_slack_runs_down_to_the_floor() {
    let (train, val, model) = ridge_toy(8);
    let (mask, trace) = gbmo(&train, &val, &model, MSE, &GbmoConfig::new(1e9)).unwrap();
    assert_eq!(mask.count_ones(), 1);
    assert_eq!(trace.stop, StopReason::FeatureFloor);
    trace.check_structure().unwrap();
}

#[test]
fn selection_never_refits_the_model() {
    let (train, val, model) = ridge_toy(9);
    let before = model.fingerprint();
    gbmo(&train, &val, &model, MSE, &GbmoConfig::new(0.01)).unwrap();
    flbmo(&train, &val, &model, MSE, &FlbmoConfig { eta: 1 }).unwrap();
    assert_eq!(before, model.fingerprint());
}

#[test]
fn finalize_refits_on_kept_columns() {
    let x = noise_matrix(30, 3, 10);
    let y = x.column(0).to_owned() + x.column(2);
    let train = Dataset::new(x, y, Task::Regression).unwrap();
    let spec = ModelSpec::new(ModelKind::Ridge, 0);
    let (cols, model) = finalize_selection(&train, &Mask::from_bits(&[1, 0, 1]).unwrap(), &spec).unwrap();
    assert_eq!(cols, vec![0, 2]);
    assert_eq!(model.input_width(), 2);
    let (cols, model) = finalize_selection(&train, &Mask::ones(3), &spec).unwrap();
    assert_eq!(cols, vec![0, 1, 2]);
    let fresh = fit(&spec, train.features(), train.targets(), Task::Regression).unwrap();
    assert_eq!(model.fingerprint(), fresh.fingerprint());
    let err = finalize_selection(&train, &Mask::zeros(3), &spec).unwrap_err();
    assert!(matches!(err, Error::Selection(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sluf_matches_exhaustive_search(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let got = sluf(&inst.mask, inst.val.features(), inst.val.targets(), &inst.model, inst.loss).unwrap();
        let (j, l) = brute_force_sluf(&inst.mask, inst.val.features(), inst.val.targets(), &inst.model, inst.loss);
        prop_assert_eq!(got.j_star, j);
        prop_assert_eq!(got.loss_min.to_bits(), l.to_bits());
        prop_assert!(inst.mask.is_set(got.j_star));
    }

    #[test]
    fn traces_are_well_formed_and_stops_sound(seed in any::<u64>(), mu in 0.0f64..0.2, eta_frac in 0.0f64..1.0) {
        let inst = random_instance(seed);
        let m = inst.mask.len();
        let train = inst.val.clone();
        let (mask, trace) = gbmo(&train, &inst.val, &inst.model, inst.loss, &GbmoConfig::new(mu)).unwrap();
        trace.check_structure().unwrap();
        prop_assert_eq!(trace.eliminations().count(), m - mask.count_ones());
        let mut prev = f64::INFINITY;
        for r in trace.eliminations() {
            prop_assert!(r.loss_min <= prev * (1.0 + mu));
            prev = r.loss_min;
        }
        match trace.stop {
            StopReason::SlackExceeded => prop_assert!(trace.stop_record().loss_min > prev * (1.0 + mu)),
            StopReason::FeatureFloor => prop_assert_eq!(mask.count_ones(), 1),
            StopReason::TargetReached => prop_assert!(false, "gbmo never targets a size"),
        }

        let eta = 1 + ((m - 1) as f64 * eta_frac) as usize;
        let (mask, trace) = flbmo(&train, &inst.val, &inst.model, inst.loss, &FlbmoConfig { eta }).unwrap();
        trace.check_structure().unwrap();
        prop_assert_eq!(mask.count_ones(), eta);
    }

    #[test]
    fn larger_slack_never_stops_earlier(seed in any::<u64>(), mu in 0.0f64..0.1, extra in 0.0f64..0.2) {
        let inst = random_instance(seed);
        let train = inst.val.clone();
        let (m1, t1) = gbmo(&train, &inst.val, &inst.model, inst.loss, &GbmoConfig::new(mu)).unwrap();
        let (m2, t2) = gbmo(&train, &inst.val, &inst.model, inst.loss, &GbmoConfig::new(mu + extra)).unwrap();
        prop_assert!(t2.records.len() >= t1.records.len());
        prop_assert!(m2.count_ones() <= m1.count_ones());
        let shared = t1.eliminations().count();
        prop_assert_eq!(&t1.eliminated_indices()[..], &t2.eliminated_indices()[..shared]);
    }
}
