//! Serialized contextual metadata: the JSON dump of the component array
//! with a global metadata block and one entry per component.
//!
//! Key order is deterministic (struct field order) and `parse_scm` inverts
//! `serialize_scm` byte-for-byte on documents this module emits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dxf::RectCandidate;
use crate::geom::{Bbox, Point2};
use crate::ontology::{
    AssemblyRule, ComponentArray, ComponentKind, ComponentRecord, ConstructionConstants, LayerRef,
    RuleKind,
};

#[derive(Debug, Error)]
pub enum ScmError {
    #[error("malformed SCM document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("invalid SCM content: {0}")]
    Invalid(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct ScmDocument {
    frame_id: String,
    wall_name: String,
    construction_constants: ConstructionConstants,
    components: Vec<ScmComponent>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScmComponent {
    component_id: String,
    #[serde(rename = "type")]
    kind: ComponentKind,
    geometry: ScmGeometry,
    dxf_entity_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    layer_group: Option<LayerRef>,
    topology: ScmTopology,
    mass_kg: f64,
    rules: Vec<ScmRule>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScmGeometry {
    center_in: [f64; 2],
    length_in: f64,
    width_in: f64,
    angle_deg: f64,
    bounding_box_in: ScmBbox,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScmBbox {
    min: [f64; 2],
    max: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct ScmTopology {
    connected_to: Vec<String>,
    predecessors: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScmRule {
    rule_id: String,
    kind: RuleKind,
    required: Vec<String>,
}

/// Serialize the array as a pretty-printed JSON document.
pub fn serialize_scm(array: &ComponentArray) -> String {
    let components = array
        .components
        .iter()
        .map(|c| ScmComponent {
            component_id: c.id.clone(),
            kind: c.kind,
            geometry: ScmGeometry {
                center_in: [c.geometry.center.x, c.geometry.center.y],
                length_in: c.geometry.length_in,
                width_in: c.geometry.width_in,
                angle_deg: c.geometry.angle_deg,
                bounding_box_in: ScmBbox {
                    min: [c.geometry.bbox.min.x, c.geometry.bbox.min.y],
                    max: [c.geometry.bbox.max.x, c.geometry.bbox.max.y],
                },
            },
            dxf_entity_id: c.dxf_entity_id.clone(),
            layer_group: c.layer_group.clone(),
            topology: ScmTopology {
                connected_to: c.adjacency.iter().cloned().collect(),
                predecessors: c.prerequisites.iter().cloned().collect(),
            },
            mass_kg: c.mass_kg,
            rules: array
                .rules
                .iter()
                .filter(|r| r.subject == c.id)
                .map(|r| ScmRule {
                    rule_id: r.rule_id.clone(),
                    kind: r.kind,
                    required: r.required.iter().cloned().collect(),
                })
                .collect(),
        })
        .collect();
    let doc = ScmDocument {
        frame_id: array.frame_id.clone(),
        wall_name: array.wall_name.clone(),
        construction_constants: array.construction_constants.clone(),
        components,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("SCM serialization");
    text.push('\n');
    text
}

/// Parse an SCM document back into a component array.
pub fn parse_scm(text: &str) -> Result<ComponentArray, ScmError> {
    let doc: ScmDocument = serde_json::from_str(text)?;
    let mut components = Vec::with_capacity(doc.components.len());
    let mut rules: Vec<AssemblyRule> = Vec::new();
    for entry in doc.components {
        let geometry = RectCandidate {
            center: Point2::new(entry.geometry.center_in[0], entry.geometry.center_in[1]),
            length_in: entry.geometry.length_in,
            width_in: entry.geometry.width_in,
            angle_deg: entry.geometry.angle_deg,
            bbox: Bbox {
                min: Point2::new(
                    entry.geometry.bounding_box_in.min[0],
                    entry.geometry.bounding_box_in.min[1],
                ),
                max: Point2::new(
                    entry.geometry.bounding_box_in.max[0],
                    entry.geometry.bounding_box_in.max[1],
                ),
            },
        };
        let mut rule_ids = Vec::with_capacity(entry.rules.len());
        for rule in entry.rules {
            rule_ids.push(rule.rule_id.clone());
            rules.push(AssemblyRule {
                rule_id: rule.rule_id,
                kind: rule.kind,
                subject: entry.component_id.clone(),
                required: rule.required.into_iter().collect(),
            });
        }
        components.push(ComponentRecord {
            id: entry.component_id,
            dxf_entity_id: entry.dxf_entity_id,
            kind: entry.kind,
            geometry,
            layer_group: entry.layer_group,
            adjacency: entry.topology.connected_to.into_iter().collect(),
            prerequisites: entry.topology.predecessors.into_iter().collect(),
            mass_kg: entry.mass_kg,
            rules: rule_ids,
        });
    }
    let array = ComponentArray {
        frame_id: doc.frame_id,
        wall_name: doc.wall_name,
        construction_constants: doc.construction_constants,
        components,
        rules,
    };
    array
        .validate()
        .map_err(|e| ScmError::Invalid(e.to_string()))?;
    Ok(array)
}
