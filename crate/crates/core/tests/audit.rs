use toylocal::spacetime::*;

fn log(json: &str) -> WorldLog {
    serde_json::from_str(json).unwrap()
}

fn first_violation(json: &str) -> LocalityViolation {
    audit_locality(&log(json)).unwrap().violation.unwrap().1
}

#[test]
fn superluminal_message() {
    let v = first_violation(
        r#"[
        {"tick":0,"actor":"alice","kind":"msg_send","payload":{"message":0,"origin":0,"destination":10,"content":"2"}},
        {"tick":3,"actor":"channel","kind":"msg_recv","payload":{"message":0,"location":10,"content":"2"}}
    ]"#,
    );
    assert!(matches!(
        v,
        LocalityViolation::SuperluminalMessage { distance: 10, .. }
    ));
}

#[test]
fn teleporting_particle() {
    let v = first_violation(
        r#"[
        {"tick":1,"actor":"bob","kind":"move","payload":{"particle":1,"from":0,"to":1}},
        {"tick":2,"actor":"bob","kind":"move","payload":{"particle":1,"from":1,"to":4}}
    ]"#,
    );
    assert!(matches!(
        v,
        LocalityViolation::SuperluminalParticle { particle: 1, .. }
    ));

    // a particle measured where it never travelled
    let v = first_violation(
        r#"[
        {"tick":1,"actor":"bob","kind":"move","payload":{"particle":1,"from":0,"to":1}},
        {"tick":2,"actor":"bob","kind":"joint_measure","payload":{"particles":[1],"locations":[7],"outcome":0}}
    ]"#,
    );
    assert!(matches!(
        v,
        LocalityViolation::Discontinuity {
            expected: 1,
            found: 7,
            ..
        }
    ));
}

#[test]
fn non_colocated_joint_measurement() {
    let v = first_violation(
        r#"[
        {"tick":0,"actor":"alice","kind":"joint_measure","payload":{"particles":[1,2],"locations":[0,5],"outcome":1}}
    ]"#,
    );
    assert!(matches!(v, LocalityViolation::NotColocated { .. }));
}

#[test]
fn well_formed_logs_pass_and_audit_is_pure() {
    let mut w = World::new();
    w.spawn(1, 0, toylocal::theory::ParticleState::new(2).unwrap())
        .unwrap();
    w.move_particle("bob", 1, 3).unwrap();
    let t = w.send_message("bob", "hi", 3, 0);
    w.await_message(&t);
    let a = audit_locality(w.log()).unwrap();
    assert!(a.passed());
    assert_eq!(a, audit_locality(w.log()).unwrap());
    let round: WorldLog = serde_json::from_str(&serde_json::to_string(w.log()).unwrap()).unwrap();
    assert_eq!(&round, w.log());
}

#[test]
fn malformed_logs_are_errors() {
    let bad = log(r#"[
        {"tick":5,"actor":"a","kind":"move","payload":{"particle":1,"from":0,"to":1}},
        {"tick":4,"actor":"a","kind":"move","payload":{"particle":1,"from":1,"to":2}}
    ]"#);
    assert!(matches!(
        audit_locality(&bad),
        Err(AuditError::NonMonotoneTicks { .. })
    ));
}
