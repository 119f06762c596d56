//! The timber27 fixture: a 27-component gable-wall design with one window
//! opening, authored to exercise the whole pipeline.
//!
//! The inventory is a stand-in authored from conventional framing names
//! (plates, studs, king studs, trimmers, header layers, sill, cripples,
//! diagonal braces), not ground truth from any particular build. Member
//! masses come from a fixture override table clamped to [1.5, 13.86] kg.

use std::collections::BTreeMap;

use crate::dxf::{
    emit_outlines_dxf, parse_design, reconstruct_rectangles, recover_scale, PairingConfig,
    RectCandidate,
};
use crate::geom::Point2;
use crate::ontology::{
    classify_components, derive_rules, ClassifyConfig, ComponentArray, ComponentKind,
    ComponentRecord, ConstructionConstants,
};

/// Drawing units per inch used when emitting the fixture DXF.
pub const TIMBER27_UNITS_PER_INCH: f64 = 2.0;

/// The fixture design as shipped in the repository. Regenerate with the
/// `gen_fixtures` example after touching the inventory.
pub const TIMBER27_DXF: &str = include_str!("../fixtures/timber27.dxf");
pub const TIMBER27_SCM: &str = include_str!("../fixtures/timber27.scm.json");

const THICKNESS: f64 = 1.5;

/// Authored inventory: (id, kind, center-x, center-y, length, angle), all in
/// inches; every member is 1.5 in wide.
fn inventory() -> Vec<(&'static str, ComponentKind, f64, f64, f64, f64)> {
    use ComponentKind::*;
    vec![
        ("bottom_plate", BottomPlate, 48.0, 0.75, 96.0, 0.0),
        ("top_plate_layer_1", TopPlate, 48.0, 47.25, 96.0, 0.0),
        ("top_plate_layer_2", TopPlate, 48.0, 47.25, 96.0, 0.0),
        ("stud_1", Stud, 0.75, 24.0, 45.0, 90.0),
        ("stud_2", Stud, 9.0, 24.0, 45.0, 90.0),
        ("stud_3", Stud, 18.0, 24.0, 45.0, 90.0),
        ("stud_4", Stud, 27.0, 24.0, 45.0, 90.0),
        ("stud_5", Stud, 69.0, 24.0, 45.0, 90.0),
        ("stud_6", Stud, 78.0, 24.0, 45.0, 90.0),
        ("stud_7", Stud, 87.0, 24.0, 45.0, 90.0),
        ("stud_8", Stud, 95.25, 24.0, 45.0, 90.0),
        ("window_1_king_stud_left", KingStud, 35.25, 24.0, 45.0, 90.0),
        (
            "window_1_king_stud_right",
            KingStud,
            60.75,
            24.0,
            45.0,
            90.0,
        ),
        ("window_1_header_layer_1", Header, 48.0, 36.75, 24.0, 0.0),
        ("window_1_header_layer_2", Header, 48.0, 36.75, 24.0, 0.0),
        ("window_1_sill_plate", SillPlate, 48.0, 15.75, 24.0, 0.0),
        (
            "window_1_trimmer_left_up",
            Trimmer,
            36.75,
            26.25,
            19.5,
            90.0,
        ),
        (
            "window_1_trimmer_right_up",
            Trimmer,
            59.25,
            26.25,
            19.5,
            90.0,
        ),
        (
            "window_1_trimmer_left_down",
            Trimmer,
            36.75,
            8.25,
            13.5,
            90.0,
        ),
        (
            "window_1_trimmer_right_down",
            Trimmer,
            59.25,
            8.25,
            13.5,
            90.0,
        ),
        ("window_1_cripple_up_1", Cripple, 40.5, 42.0, 9.0, 90.0),
        ("window_1_cripple_up_2", Cripple, 48.0, 42.0, 9.0, 90.0),
        ("window_1_cripple_up_3", Cripple, 55.5, 42.0, 9.0, 90.0),
        ("window_1_cripple_down_1", Cripple, 44.0, 8.25, 13.5, 90.0),
        ("window_1_cripple_down_2", Cripple, 52.0, 8.25, 13.5, 90.0),
        ("diagonal_brace_1", DiagonalBrace, 16.5, 16.25, 42.0, 45.0),
        ("diagonal_brace_2", DiagonalBrace, 79.5, 16.25, 42.0, 135.0),
    ]
}

/// Fixture mass table in kg, clamped to the study's endpoints.
pub fn timber27_mass_table() -> BTreeMap<String, f64> {
    let mut table = BTreeMap::new();
    for (id, kind, ..) in inventory() {
        let mass = match kind {
            ComponentKind::BottomPlate => 13.86,
            ComponentKind::TopPlate => 12.0,
            ComponentKind::Header => 7.0,
            ComponentKind::Stud | ComponentKind::KingStud => 6.5,
            ComponentKind::Trimmer => 3.0,
            ComponentKind::SillPlate => 2.0,
            ComponentKind::Cripple => 1.5,
            ComponentKind::DiagonalBrace => 2.5,
        };
        table.insert(id.to_string(), mass);
    }
    table
}

/// Rectangles in authoring order plus the authored role of each id.
pub fn timber27_rects_with_roles() -> (Vec<RectCandidate>, BTreeMap<String, ComponentKind>) {
    let mut rects = Vec::new();
    let mut roles = BTreeMap::new();
    for (id, kind, cx, cy, length, angle) in inventory() {
        rects.push(RectCandidate::new(
            Point2::new(cx, cy),
            length,
            THICKNESS,
            angle,
        ));
        roles.insert(id.to_string(), kind);
    }
    (rects, roles)
}

/// The fixture design as DXF text: one closed LWPOLYLINE outline per member,
/// at 2 drawing units per inch. The board-end edges of the outlines are the
/// shortest segments and anchor scale recovery.
pub fn timber27_dxf() -> String {
    let (rects, _) = timber27_rects_with_roles();
    emit_outlines_dxf(&rects, TIMBER27_UNITS_PER_INCH)
}

pub fn timber27_classify_config() -> ClassifyConfig {
    ClassifyConfig {
        mass_overrides: timber27_mass_table(),
        mass_clamp_kg: Some((1.5, 13.86)),
        ..ClassifyConfig::default()
    }
}

/// Run the ingest pipeline on the fixture DXF and return the classified
/// records together with the authored roles.
pub fn timber27_classified_with_roles() -> (Vec<ComponentRecord>, BTreeMap<String, ComponentKind>) {
    let dxf = timber27_dxf();
    let parsed = parse_design(dxf.as_bytes()).expect("fixture parses");
    let scale = recover_scale(&parsed.segments, THICKNESS).expect("fixture has segments");
    let recon = reconstruct_rectangles(&parsed.segments, scale, PairingConfig::default());
    let records =
        classify_components(&recon.rects, &timber27_classify_config()).expect("fixture classifies");
    let (_, roles) = timber27_rects_with_roles();
    (records, roles)
}

/// The complete fixture ontology, built through the full pipeline.
pub fn timber27_array() -> ComponentArray {
    let (mut components, _) = timber27_classified_with_roles();
    let rules = derive_rules(&mut components).expect("fixture rules are acyclic");
    let array = ComponentArray {
        frame_id: "frame_1".to_string(),
        wall_name: "gable_wall_27".to_string(),
        construction_constants: ConstructionConstants::default(),
        components,
        rules,
    };
    array.validate().expect("fixture array is valid");
    array
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_reconstructs_27_rects_with_end_edge_leftovers() {
        let dxf = timber27_dxf();
        let parsed = parse_design(dxf.as_bytes()).unwrap();
        assert_eq!(parsed.segments.len(), 27 * 4);
        let scale = recover_scale(&parsed.segments, THICKNESS).unwrap();
        assert!((scale.units_per_inch - TIMBER27_UNITS_PER_INCH).abs() < 1e-12);
        let recon = reconstruct_rectangles(&parsed.segments, scale, PairingConfig::default());
        assert_eq!(recon.rects.len(), 27);
        assert_eq!(recon.leftovers.len(), 27 * 2);
    }

    #[test]
    fn fixture_geometry_round_trips_exactly() {
        let (authored, _) = timber27_rects_with_roles();
        let dxf = timber27_dxf();
        let parsed = parse_design(dxf.as_bytes()).unwrap();
        let scale = recover_scale(&parsed.segments, THICKNESS).unwrap();
        let recon = reconstruct_rectangles(&parsed.segments, scale, PairingConfig::default());
        assert_eq!(recon.rects.len(), authored.len());
        for rect in &recon.rects {
            let twin_count = authored
                .iter()
                .filter(|a| {
                    a.center.distance(&rect.center) <= 1e-6
                        && (a.length_in - rect.length_in).abs() <= 1e-6
                        && (a.width_in - rect.width_in).abs() <= 1e-6
                        && crate::geom::angle_diff_deg(a.angle_deg, rect.angle_deg) <= 1e-6
                })
                .count();
            let recovered_twins = recon
                .rects
                .iter()
                .filter(|r| r.center.distance(&rect.center) <= 1e-6)
                .count();
            assert_eq!(twin_count, recovered_twins, "at center {:?}", rect.center);
        }
    }

    #[test]
    fn fixture_array_is_valid_and_complete() {
        let array = timber27_array();
        assert_eq!(array.components.len(), 27);
        assert!(array
            .components
            .iter()
            .all(|c| (1.5..=13.86).contains(&c.mass_kg)));
    }

    #[test]
    fn shipped_fixture_files_match_the_generator() {
        assert_eq!(TIMBER27_DXF, timber27_dxf());
        assert_eq!(TIMBER27_SCM, crate::scm::serialize_scm(&timber27_array()));
    }
}
