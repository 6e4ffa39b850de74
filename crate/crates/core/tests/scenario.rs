use ries_core::model::*;

#[test]
fn flags_biject_onto_scenarios() {
    let mut seen = std::collections::HashSet::new();
    for s in Scenario::ALL {
        assert!(seen.insert(s.flags()));
        assert_eq!(Scenario::from_flags(s.flags()), s);
        assert_eq!(Scenario::from_number(s.number()), Some(s));
    }
    assert_eq!(seen.len(), 4);
    assert_eq!(Scenario::from_number(5), None);
}
