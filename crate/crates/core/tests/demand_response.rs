use ries_core::demand_response::*;
use ries_core::error::StorageError;
use ries_core::model::{TimeProfile, TouPriceSchedule, Unit, SLOTS};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn store(eta: f64) -> StorageParams {
    StorageParams {
        capacity: 100.0,
        eta_ch: eta,
        eta_dis: eta,
        p_ch_max: 20.0,
        p_dis_max: 20.0,
        q0: 50.0,
    }
}

fn comfort() -> ComfortParams {
    ComfortParams {
        t_skin: 33.5,
        metabolic: 80.0,
        i_cl: 0.155,
        kf: 60.0,
        alpha_air: 1.005,
        rho_air: 1.29,
        volume: 1.5e6,
        t_set: 20.0,
        pmv_night: 0.9,
        pmv_day_max: 0.5,
        pmv_day_min: -0.9,
    }
}

#[test]
fn storage_points() {
    let p = store(0.9);
    assert_eq!(storage_step(50.0, 0.0, 0.0, &p).unwrap(), 50.0);
    assert_relative_eq!(storage_step(50.0, 10.0, 0.0, &p).unwrap(), 59.0);
    assert_relative_eq!(storage_step(50.0, 0.0, 9.0, &p).unwrap(), 40.0);
    assert!(matches!(
        storage_step(50.0, 1.0, 1.0, &p),
        Err(StorageError::SimultaneousChargeDischarge { .. })
    ));
    assert!(matches!(
        storage_step(99.0, 10.0, 0.0, &p),
        Err(StorageError::StateOfCharge { .. })
    ));
    assert!(matches!(
        storage_step(50.0, 30.0, 0.0, &p),
        Err(StorageError::PowerLimit { what: "charge", .. })
    ));
}

fn flat(v: f64) -> TimeProfile {
    TimeProfile::constant(v, Unit::YuanPerKwh).unwrap()
}

#[test]
fn pbdr_points() {
    let load = TimeProfile::constant(100.0, Unit::Kilowatt).unwrap();
    let e = ElasticityMatrix::by_period(&TouPriceSchedule::table_default(), -0.2, 0.03).unwrap();
    let zero = pbdr_adjustment(&load, &flat(0.5), &flat(0.5), &e);
    assert!(zero.iter().all(|&d| d == 0.0));

    let diag = ElasticityMatrix::by_period(&TouPriceSchedule::table_default(), -0.2, 0.0).unwrap();
    let mut raised = [0.5; SLOTS];
    raised[10] = 0.55;
    let new = TimeProfile::new(&raised, Unit::YuanPerKwh).unwrap();
    let d = pbdr_adjustment(&load, &flat(0.5), &new, &diag);
    assert_relative_eq!(d[10], -2.0, max_relative = 1e-12);
    assert!(d.iter().enumerate().all(|(t, &v)| t == 10 || v == 0.0));
}

#[test]
fn pbdr_conserves_energy_with_balanced_columns() {
    // With a uniform load, zero column sums of e imply zero net change.
    let load = TimeProfile::constant(80.0, Unit::Kilowatt).unwrap();
    let rows: Vec<[f64; SLOTS]> = (0..SLOTS)
        .map(|i| {
            let mut r = [0.05 / 23.0 * 4.0; SLOTS];
            r[i] = -0.2;
            r
        })
        .collect();
    let e = ElasticityMatrix::new(rows).unwrap();
    let prices: Vec<f64> = (0..SLOTS).map(|t| 0.3 + 0.02 * t as f64).collect();
    let new = TimeProfile::new(&prices, Unit::YuanPerKwh).unwrap();
    let d = pbdr_adjustment(&load, &flat(0.5), &new, &e);
    assert!(d.iter().sum::<f64>().abs() < 1e-9);
}

#[test]
fn elasticity_sign_checks() {
    let mut rows = vec![[0.0; SLOTS]; SLOTS];
    rows[0][0] = 0.1;
    assert!(ElasticityMatrix::new(rows.clone()).is_err());
    rows[0][0] = -0.1;
    rows[0][1] = -0.1;
    assert!(ElasticityMatrix::new(rows).is_err());
    let text: String = (0..SLOTS)
        .map(|i| {
            (0..SLOTS)
                .map(|j| if i == j { "-0.2" } else { "0.01" })
                .collect::<Vec<_>>()
                .join(",")
                + "\n"
        })
        .collect();
    let e = ElasticityMatrix::from_csv_str(&text).unwrap();
    assert_eq!(e.get(3, 3), -0.2);
    assert_eq!(e.get(3, 4), 0.01);
}

fn two_tier() -> IbdrOffer {
    IbdrOffer {
        contract: 0.0,
        tiers: vec![
            IbdrTier {
                price: 0.5,
                max_up: 10.0,
                max_down: 10.0,
            },
            IbdrTier {
                price: 0.8,
                max_up: 10.0,
                max_down: 10.0,
            },
        ],
    }
}

#[test]
fn ibdr_points() {
    let o = two_tier();
    let r = ibdr_response(0.0, &o);
    assert_eq!((r.delivered(), r.compensation), (0.0, 0.0));
    let r = ibdr_response(-15.0, &o);
    assert_relative_eq!(r.delivered(), 15.0);
    assert_relative_eq!(r.compensation, 9.0);
    assert_relative_eq!(r.net_adjustment(&o), -15.0);
    let r = ibdr_response(-100.0, &o);
    assert_relative_eq!(r.delivered(), 20.0);
    assert_relative_eq!(r.compensation, 13.0);
}

#[test]
fn pmv_points() {
    let c = comfort();
    assert_relative_eq!(pmv(c.t_skin, &c), 2.43);
    let hand = ComfortParams {
        t_skin: 33.0,
        metabolic: 1.0,
        i_cl: 0.9,
        ..comfort()
    };
    assert_relative_eq!(pmv(21.0, &hand), -42.69, max_relative = 1e-12);
    for lambda in [-0.9, 0.0, 0.5, 0.9] {
        assert_relative_eq!(pmv(temperature_at_pmv(lambda, &c), &c), lambda, epsilon = 1e-12);
    }
}

#[test]
fn comfort_band_endpoints() {
    let c = comfort();
    let (lo, hi) = comfort_band(2, &c);
    assert_relative_eq!(pmv(lo, &c), -0.9, epsilon = 1e-12);
    assert_relative_eq!(pmv(hi, &c), 0.9, epsilon = 1e-12);
    let (lo, hi) = comfort_band(12, &c);
    assert_relative_eq!(pmv(hi, &c), 0.5, epsilon = 1e-12);
    assert_relative_eq!(pmv(lo, &c), -0.9, epsilon = 1e-12);
    assert!(!is_day_slot(6) && is_day_slot(7) && is_day_slot(18) && !is_day_slot(19));
}

#[test]
fn room_temperature_points() {
    let c = comfort();
    let eq = room_temperature_step(20.0, 0.0, 20.0 * c.kf, &c);
    assert_relative_eq!(eq, 20.0, epsilon = 1e-12);
    assert!(room_temperature_step(20.0, 0.0, 0.0, &c) < 20.0);
}

#[test]
fn thermal_dr_points() {
    let b = ThermalDrBounds {
        shift_min: vec![-5.0; 4],
        shift_max: vec![5.0; 4],
        curtail_max: vec![2.0; 4],
    };
    assert!(thermal_dr_feasible(&[0.0; 4], &[0.0; 4], &b, 1e-9).is_ok());
    assert_eq!(
        thermal_dr_feasible(&[5.0, 0.0, 0.0, 0.0], &[0.0; 4], &b, 1e-9),
        Err(ThermalDrViolation::NonZeroShiftSum { sum: 5.0 })
    );
    assert!(thermal_dr_feasible(&[5.0, -5.0, 5.0, -5.0], &[2.0; 4], &b, 1e-9).is_ok());
    assert!(matches!(
        thermal_dr_feasible(&[6.0, -6.0, 0.0, 0.0], &[0.0; 4], &b, 1e-9),
        Err(ThermalDrViolation::ShiftAboveMax { slot: 0, .. })
    ));
}

#[test]
fn shares_must_sum_to_one() {
    let s = DrShares {
        fixed: 0.4,
        transferable: 0.35,
        reducible: 0.2,
        replaceable: 0.04,
    };
    assert!(s.validate().unwrap_err().contains("sum to 1"));
}

proptest! {
    #[test]
    fn ibdr_compensation_monotone(a in 0.0f64..50.0, b in 0.0f64..50.0, up in any::<bool>()) {
        let o = two_tier();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s = if up { 1.0 } else { -1.0 };
        prop_assert!(ibdr_response(s * lo, &o).compensation <= ibdr_response(s * hi, &o).compensation);
    }

    #[test]
    fn zero_thermal_dr_always_feasible(caps in proptest::collection::vec(0.0f64..100.0, 1..30)) {
        let b = ThermalDrBounds {
            shift_min: caps.iter().map(|c| -c).collect(),
            shift_max: caps.clone(),
            curtail_max: caps.clone(),
        };
        let z = vec![0.0; caps.len()];
        prop_assert!(thermal_dr_feasible(&z, &z, &b, 0.0).is_ok());
    }

    #[test]
    fn storage_round_trip_never_gains(p in 0.1f64..20.0, eta in 0.5f64..1.0) {
        let s = store(eta);
        let up = storage_step(50.0, p, 0.0, &s).unwrap();
        let back = storage_step(up, 0.0, p * eta * eta, &s).unwrap();
        prop_assert!(back <= 50.0 + 1e-9);
    }
}
