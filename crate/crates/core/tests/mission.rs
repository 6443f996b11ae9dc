use facade_inspect::mission::{
    is_legal_transition, run_mission, MissionOutput, MissionParams, MissionPhase, MissionScope,
};
use facade_inspect::scenes::{default_building, default_scene};
use facade_inspect::world::{Face, FaultDecal, Scene};

fn fly(scene: &Scene, seed: u64) -> MissionOutput {
    run_mission(scene, &MissionParams::default(), seed, MissionScope::Full).expect("mission completes")
}

fn phase_sequence(out: &MissionOutput) -> Vec<MissionPhase> {
    let mut seq = vec![MissionPhase::Idle];
    seq.extend(out.phases.iter().map(|(_, p)| *p).filter(|p| *p != MissionPhase::Idle));
    seq
}

#[test]
fn default_mission_walks_legal_phases_to_done() {
    let out = fly(&default_scene(), 3);
    let seq = phase_sequence(&out);
    for w in seq.windows(2) {
        assert!(is_legal_transition(w[0], w[1]), "{} -> {}", w[0], w[1]);
    }
    assert_eq!(seq[1], MissionPhase::Inspecting);
    assert_eq!(*seq.last().unwrap(), MissionPhase::Done);
    assert!(out.phases.windows(2).all(|w| w[0].0 <= w[1].0));
    assert_eq!(out.report.faults.len(), 4);
    assert_eq!(out.legs.len(), 4);
}

#[test]
fn clean_facade_skips_detection() {
    let out = fly(&Scene::new(default_building()), 0);
    assert!(out.report.faults.is_empty());
    assert!(out.legs.is_empty());
    assert!(phase_sequence(&out).iter().all(|p| !matches!(p, MissionPhase::Detecting(_) | MissionPhase::Holding)));
    assert_eq!(*phase_sequence(&out).last().unwrap(), MissionPhase::Done);
    assert!(out.captures.iter().all(|c| c.visible_decals.is_empty()));
}

#[test]
fn two_decals_are_revisited_in_capture_order() {
    let scene = Scene::new(default_building())
        .with_decal(FaultDecal { id: 7, face: Face::West, center_uv: [0.0, 1.5], extent_uv: [0.3, 0.3] })
        .with_decal(FaultDecal { id: 9, face: Face::East, center_uv: [0.0, 1.5], extent_uv: [0.3, 0.3] });
    let out = fly(&scene, 1);
    assert_eq!(out.report.faults.len(), 2);
    assert_eq!(out.legs.len(), 2);
    // the ring runs counter-clockwise from the south side, so east comes before west
    let first = &out.captures.iter().find(|c| c.image_id == out.report.faults[0].image_id).unwrap();
    assert_eq!(first.visible_decals, vec![9]);
    assert!(out.report.faults[0].capture_time < out.report.faults[1].capture_time);
    for (i, leg) in out.legs.iter().enumerate() {
        assert_eq!(leg.fault, i);
        assert!(leg.start_time <= leg.arrival_time && leg.arrival_time <= leg.end_time);
    }
    assert!(out.legs[0].end_time <= out.legs[1].start_time);
    let detecting: Vec<MissionPhase> =
        phase_sequence(&out).into_iter().filter(|p| matches!(p, MissionPhase::Detecting(_))).collect();
    assert_eq!(detecting, vec![MissionPhase::Detecting(0), MissionPhase::Detecting(1)]);
}

#[test]
fn same_seed_same_flight() {
    let a = fly(&default_scene(), 11);
    let b = fly(&default_scene(), 11);
    assert_eq!(a.captures, b.captures);
    assert_eq!(a.trajectory_csv(), b.trajectory_csv());
    assert_eq!(format!("{:?}", a.report), format!("{:?}", b.report));
    let c = fly(&default_scene(), 12);
    assert_ne!(a.trajectory_csv(), c.trajectory_csv());
}

#[test]
fn inspection_scope_stops_after_the_ring() {
    let out = run_mission(&default_scene(), &MissionParams::default(), 0, MissionScope::InspectionOnly).unwrap();
    assert!(out.legs.is_empty());
    assert_eq!(out.report.faults.len(), 4);
    assert!(phase_sequence(&out).iter().all(|p| !matches!(p, MissionPhase::Detecting(_))));
}
