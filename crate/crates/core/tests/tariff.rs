use ries_core::model::*;

#[test]
fn table_periods() {
    let s = TouPriceSchedule::table_default();
    assert_eq!(period_of(3, &s), Period::Valley);
    assert_eq!(period_of(12, &s), Period::Peak);
    assert_eq!(period_of(8, &s), Period::Flat);
    assert_eq!(period_of(23, &s), Period::Valley);
    assert_eq!(period_of(18, &s), Period::Peak);
    assert_eq!(period_of(21, &s), Period::Flat);
    assert_eq!(s.valley_price, 0.2988);
    assert_eq!(s.price_profile()[19], 0.8882);
}

#[test]
fn rejects_unordered_prices() {
    assert!(TouPriceSchedule::new(0.6, 0.5, 0.9, DEFAULT_PERIOD_MAP).is_err());
    assert!(TouPriceSchedule::new(0.2, 0.5, 0.9, "VVV").is_err());
    assert!(TouPriceSchedule::new(0.2, 0.5, 0.9, &"X".repeat(24)).is_err());
}
