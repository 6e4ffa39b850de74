use ries_core::model::*;
use ries_core::error::ProfileError;

#[test]
fn rejects_wrong_length_and_negative_power() {
    assert!(matches!(
        TimeProfile::new(&[1.0; 23], Unit::Kilowatt),
        Err(ProfileError::Length(23))
    ));
    let mut v = [1.0; SLOTS];
    v[5] = -0.1;
    assert!(matches!(
        TimeProfile::new(&v, Unit::Kilowatt),
        Err(ProfileError::Negative { slot: 5, .. })
    ));
    // temperatures may go below zero
    assert!(TimeProfile::new(&v, Unit::Celsius).is_ok());
    v[5] = f64::NAN;
    assert!(matches!(
        TimeProfile::new(&v, Unit::Celsius),
        Err(ProfileError::NonFinite { slot: 5 })
    ));
}

#[test]
fn csv_round_trip() {
    let v: Vec<f64> = (0..SLOTS).map(|i| i as f64 * 1.25 + 0.1).collect();
    let p = TimeProfile::new(&v, Unit::Kilowatt).unwrap();
    let text = p.to_csv_string();
    let back = TimeProfile::from_csv_reader(text.as_bytes(), Unit::Kilowatt).unwrap();
    assert_eq!(p, back);
}

#[test]
fn csv_schema_errors() {
    let bad_header = "hour,value\n0,1\n";
    assert!(matches!(
        TimeProfile::from_csv_reader(bad_header.as_bytes(), Unit::Kilowatt),
        Err(ProfileError::Header(_))
    ));
    let mut short = String::from("slot,value\n");
    for i in 0..23 {
        short.push_str(&format!("{i},1\n"));
    }
    assert!(matches!(
        TimeProfile::from_csv_reader(short.as_bytes(), Unit::Kilowatt),
        Err(ProfileError::Length(23))
    ));
    let swapped = "slot,value\n1,1\n0,1\n";
    assert!(matches!(
        TimeProfile::from_csv_reader(swapped.as_bytes(), Unit::Kilowatt),
        Err(ProfileError::SlotOrder { row: 0, slot: 1 })
    ));
}
