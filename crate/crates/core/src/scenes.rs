//! Ready-made scenes.

use crate::world::{BuildingSpec, Face, FaultDecal, Obstacle, Scene};

/// 20 x 10 x 9 m block centered on the origin.
pub fn default_building() -> BuildingSpec {
    BuildingSpec { length: 20.0, width: 10.0, height: 9.0, center_xy: [0.0, 0.0] }
}

/// One 0.6 m square decal at the middle of each face, 1.5 m up.
/// Ids follow [`Face::ALL`]: north 1, south 2, east 3, west 4.
pub fn default_scene() -> Scene {
    Face::ALL.iter().enumerate().fold(Scene::new(default_building()), |scene, (i, face)| {
        scene.with_decal(FaultDecal { id: i as u32 + 1, face: *face, center_uv: [0.0, 1.5], extent_uv: [0.3, 0.3] })
    })
}

/// The default scene plus two 4 m posts flanking the approach from the
/// default home pad, 3 m either side of the corridor.
pub fn obstacle_course_scene() -> Scene {
    default_scene()
        .with_obstacle(Obstacle { id: 1, center_xy: [3.0, -17.0], radius: 0.5, height: 4.0 })
        .with_obstacle(Obstacle { id: 2, center_xy: [-3.0, -12.0], radius: 0.5, height: 4.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        default_scene().validate().unwrap();
        obstacle_course_scene().validate().unwrap();
        assert_eq!(default_scene().decals.len(), 4);
        assert_eq!(obstacle_course_scene().obstacles.len(), 2);
    }
}
