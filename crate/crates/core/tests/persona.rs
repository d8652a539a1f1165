use std::collections::BTreeSet;

use privjourney::fixtures::replay_demo_session;
use privjourney::persona::{filter_personas, validate_persona, Catalogs, DimensionId, PersonaLibrary};

#[test]
fn replayed_library_is_valid_and_diverse() {
    let lib = replay_demo_session().unwrap().library;
    let catalogs = Catalogs::builtin();
    assert_eq!(lib.personas.len(), 20);
    assert_eq!(lib.types.len(), 20);
    for p in &lib.personas {
        assert!(validate_persona(p, &catalogs, &lib.types).is_empty(), "{}", p.persona_id);
    }
    assert!(lib.validate(&catalogs).is_empty());
    assert!(lib.dimension_span().len() >= 3);
    let ids: BTreeSet<_> = lib.personas.iter().map(|p| &p.persona_id).collect();
    assert_eq!(ids.len(), 20);
}

#[test]
fn eva_protects_listening_activity() {
    let lib = replay_demo_session().unwrap().library;
    let eva = lib.persona("eva").unwrap();
    assert_eq!(eva.age, 16);
    assert!(eva.protects("Listening Activity"));
    assert!(lib.dimensions_of(eva).contains(&DimensionId::IntersectionalIdentity));
}

#[test]
fn filters_return_subsets_in_library_order() {
    let lib = replay_demo_session().unwrap().library;
    let located = filter_personas(&lib, None, Some("location"));
    assert!(!located.is_empty() && located.len() < lib.personas.len());
    assert!(located.iter().all(|p| p.protects("location")));
    let emergency = filter_personas(&lib, Some(DimensionId::EmergencyCapacity), None);
    assert!(emergency.iter().all(|p| lib.dimensions_of(p).contains(&DimensionId::EmergencyCapacity)));
    let both = filter_personas(&lib, Some(DimensionId::EmergencyCapacity), Some("location"));
    assert!(both.len() <= emergency.len().min(located.len()));
    let order: Vec<usize> =
        located.iter().map(|p| lib.personas.iter().position(|q| q.persona_id == p.persona_id).unwrap()).collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn library_save_load_round_trip() {
    let lib = replay_demo_session().unwrap().library;
    let dir = tempfile::tempdir().unwrap();
    lib.save(dir.path()).unwrap();
    assert_eq!(PersonaLibrary::load(dir.path()).unwrap(), lib);
}
