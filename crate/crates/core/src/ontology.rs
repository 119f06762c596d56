//! The component array: classification of rectangle footprints into
//! construction roles, prerequisite-rule derivation, and mass estimation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dxf::RectCandidate;
use crate::geom::angle_diff_deg;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("unclassifiable rectangle {entity_id}: {reason}")]
    Unclassifiable { entity_id: String, reason: String },
    #[error("prerequisite cycle: {0}")]
    PrerequisiteCycle(String),
    #[error("invalid component array: {0}")]
    Invalid(String),
    #[error("non-positive dimension in mass computation: {0}")]
    NonPositiveDimension(f64),
}

/// Construction role of a member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    #[serde(rename = "Top Plate")]
    TopPlate,
    #[serde(rename = "Bottom Plate")]
    BottomPlate,
    #[serde(rename = "Stud")]
    Stud,
    #[serde(rename = "King Stud")]
    KingStud,
    #[serde(rename = "Trimmer")]
    Trimmer,
    #[serde(rename = "Header")]
    Header,
    #[serde(rename = "Sill Plate")]
    SillPlate,
    #[serde(rename = "Cripple")]
    Cripple,
    #[serde(rename = "Diagonal Brace")]
    DiagonalBrace,
}

impl ComponentKind {
    pub fn is_vertical_member(self) -> bool {
        matches!(
            self,
            ComponentKind::Stud
                | ComponentKind::KingStud
                | ComponentKind::Trimmer
                | ComponentKind::Cripple
        )
    }
}

/// Membership of a component in a stacked multi-layer group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRef {
    pub group_id: String,
    pub layer_index: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    SupportDependency,
    ConsistencyConstraint,
    AdjacencyPattern,
}

/// One assembly rule over component ids. All kinds share the state predicate
/// "subject installed implies required installed"; they differ in how
/// reconciliation repairs a violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyRule {
    pub rule_id: String,
    pub kind: RuleKind,
    pub subject: String,
    pub required: BTreeSet<String>,
}

/// One row of the component array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub id: String,
    pub dxf_entity_id: String,
    pub kind: ComponentKind,
    pub geometry: RectCandidate,
    pub layer_group: Option<LayerRef>,
    pub adjacency: BTreeSet<String>,
    pub prerequisites: BTreeSet<String>,
    pub mass_kg: f64,
    /// Ids of the rules whose subject is this component.
    pub rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionConstants {
    pub nominal_thickness_in: f64,
    pub material_density_kg_m3: f64,
    pub units: String,
}

impl Default for ConstructionConstants {
    fn default() -> Self {
        Self {
            nominal_thickness_in: 1.5,
            material_density_kg_m3: 450.0,
            units: "inches".to_string(),
        }
    }
}

/// The full design ontology: global metadata, component rows, and the
/// assembly rules they reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentArray {
    pub frame_id: String,
    pub wall_name: String,
    pub construction_constants: ConstructionConstants,
    pub components: Vec<ComponentRecord>,
    pub rules: Vec<AssemblyRule>,
}

impl ComponentArray {
    pub fn component_ids(&self) -> BTreeSet<String> {
        self.components.iter().map(|c| c.id.clone()).collect()
    }

    pub fn component(&self, id: &str) -> Option<&ComponentRecord> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn prerequisites(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.components
            .iter()
            .map(|c| (c.id.clone(), c.prerequisites.clone()))
            .collect()
    }

    /// Check the structural invariants: unique ids, references resolve,
    /// acyclic prerequisites, positive masses.
    pub fn validate(&self) -> Result<(), OntologyError> {
        let ids = self.component_ids();
        if ids.len() != self.components.len() {
            return Err(OntologyError::Invalid("duplicate component ids".into()));
        }
        for c in &self.components {
            if c.mass_kg <= 0.0 {
                return Err(OntologyError::Invalid(format!(
                    "{}: non-positive mass",
                    c.id
                )));
            }
            if c.prerequisites.contains(&c.id) {
                return Err(OntologyError::Invalid(format!(
                    "{}: self-prerequisite",
                    c.id
                )));
            }
            for dep in c.prerequisites.iter().chain(c.adjacency.iter()) {
                if !ids.contains(dep) {
                    return Err(OntologyError::Invalid(format!(
                        "{}: reference to unknown id {dep}",
                        c.id
                    )));
                }
            }
        }
        check_acyclic(&self.prerequisites())?;
        Ok(())
    }
}

/// Settings for classification and mass assignment.
#[derive(Debug, Clone)]
pub struct ClassifyConfig {
    pub nominal_thickness_in: f64,
    pub material_density_kg_m3: f64,
    /// Member depth into the drawing plane, e.g. 3.5 in for 2x4 lumber.
    pub member_depth_in: f64,
    /// Members at least this fraction of the total drawing width count as
    /// full-width plates.
    pub full_width_frac: f64,
    /// Angular slack when deciding horizontal/vertical/diagonal.
    pub orientation_tol_deg: f64,
    /// Positional slack for contact and flank tests, in inches.
    pub contact_tol_in: f64,
    /// Exact masses by component id, taking precedence over computed values.
    pub mass_overrides: BTreeMap<String, f64>,
    /// Computed masses are clamped into this range when set.
    pub mass_clamp_kg: Option<(f64, f64)>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            nominal_thickness_in: 1.5,
            material_density_kg_m3: 450.0,
            member_depth_in: 3.5,
            full_width_frac: 0.9,
            orientation_tol_deg: 5.0,
            contact_tol_in: 0.25,
            mass_overrides: BTreeMap::new(),
            mass_clamp_kg: None,
        }
    }
}

/// Mass from footprint dimensions, member depth, and material density.
pub fn compute_mass(
    rect: &RectCandidate,
    density_kg_m3: f64,
    member_depth_in: f64,
) -> Result<f64, OntologyError> {
    const M_PER_IN: f64 = 0.0254;
    for dim in [
        rect.length_in,
        rect.width_in,
        member_depth_in,
        density_kg_m3,
    ] {
        if dim <= 0.0 {
            return Err(OntologyError::NonPositiveDimension(dim));
        }
    }
    let volume_m3 = rect.length_in * rect.width_in * member_depth_in * M_PER_IN.powi(3);
    Ok(volume_m3 * density_kg_m3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    BottomPlate,
    TopPlate,
    Header { opening: usize },
    Sill { opening: usize },
    Stud,
    KingStud { opening: usize, left: bool },
    TrimmerUp { opening: usize, left: bool },
    TrimmerDown { opening: usize, left: bool },
    CrippleUp { opening: usize },
    CrippleDown { opening: usize },
    Brace,
}

struct OpeningGeom {
    x0: f64,
    x1: f64,
    header_top: f64,
    header_bottom: f64,
    sill_top: f64,
    sill_bottom: f64,
}

/// Assign construction roles to reading-order-sorted rectangles and build
/// component records with names following left-to-right/opening conventions.
pub fn classify_components(
    rects: &[RectCandidate],
    config: &ClassifyConfig,
) -> Result<Vec<ComponentRecord>, OntologyError> {
    if rects.is_empty() {
        return Ok(Vec::new());
    }
    let tol = config.contact_tol_in;
    let extent = rects
        .iter()
        .map(|r| r.bbox)
        .reduce(|a, b| a.union(&b))
        .expect("nonempty");

    let orient: Vec<Orientation> = rects
        .iter()
        .map(|r| orientation(r, config.orientation_tol_deg))
        .collect();

    // Full-width horizontals split into a bottom and a top plate band.
    let mut plate_idx: Vec<usize> = Vec::new();
    let mut opening_members: Vec<usize> = Vec::new();
    for (i, rect) in rects.iter().enumerate() {
        if orient[i] == Orientation::Horizontal {
            if rect.length_in >= config.full_width_frac * extent.width() {
                plate_idx.push(i);
            } else {
                opening_members.push(i);
            }
        }
    }
    if plate_idx.is_empty() {
        return Err(OntologyError::Unclassifiable {
            entity_id: entity_id(0),
            reason: "no full-width plate members found".into(),
        });
    }

    let mut roles: Vec<Option<Role>> = vec![None; rects.len()];
    let bands = cluster_by(
        &plate_idx,
        |i| rects[*i].center.y,
        config.nominal_thickness_in,
    );
    for (b, band) in bands.iter().enumerate() {
        let role = if b == 0 {
            Role::BottomPlate
        } else if b == bands.len() - 1 {
            Role::TopPlate
        } else {
            return Err(OntologyError::Unclassifiable {
                entity_id: entity_id(band[0]),
                reason: "full-width horizontal that is neither lowest nor highest".into(),
            });
        };
        for &i in band {
            roles[i] = Some(role);
        }
    }
    let bottom_top = bands
        .first()
        .map(|band| {
            band.iter()
                .map(|&i| rects[i].bbox.max.y)
                .fold(f64::MIN, f64::max)
        })
        .unwrap_or(extent.min.y);
    let top_bottom = if bands.len() > 1 {
        bands
            .last()
            .map(|band| {
                band.iter()
                    .map(|&i| rects[i].bbox.min.y)
                    .fold(f64::MAX, f64::min)
            })
            .unwrap_or(extent.max.y)
    } else {
        extent.max.y
    };

    // Group opening members (headers/sills) into openings by x-overlap.
    let opening_groups = cluster_by_overlap(&opening_members, rects);
    let mut openings: Vec<OpeningGeom> = Vec::new();
    for (o, group) in opening_groups.iter().enumerate() {
        let ys = cluster_by(group, |i| rects[*i].center.y, config.nominal_thickness_in);
        if ys.len() > 2 {
            return Err(OntologyError::Unclassifiable {
                entity_id: entity_id(ys[1][0]),
                reason: "more than two horizontal bands inside one opening".into(),
            });
        }
        let (sill_band, header_band) = if ys.len() == 2 {
            (Some(&ys[0]), &ys[1])
        } else {
            (None, &ys[0])
        };
        let mut x0 = f64::MAX;
        let mut x1 = f64::MIN;
        for &i in group {
            x0 = x0.min(rects[i].bbox.min.x);
            x1 = x1.max(rects[i].bbox.max.x);
        }
        let header_top = header_band
            .iter()
            .map(|&i| rects[i].bbox.max.y)
            .fold(f64::MIN, f64::max);
        let header_bottom = header_band
            .iter()
            .map(|&i| rects[i].bbox.min.y)
            .fold(f64::MAX, f64::min);
        for &i in header_band {
            roles[i] = Some(Role::Header { opening: o });
        }
        let (sill_top, sill_bottom) = match sill_band {
            Some(band) => {
                for &i in band {
                    roles[i] = Some(Role::Sill { opening: o });
                }
                (
                    band.iter()
                        .map(|&i| rects[i].bbox.max.y)
                        .fold(f64::MIN, f64::max),
                    band.iter()
                        .map(|&i| rects[i].bbox.min.y)
                        .fold(f64::MAX, f64::min),
                )
            }
            None => (bottom_top, bottom_top),
        };
        openings.push(OpeningGeom {
            x0,
            x1,
            header_top,
            header_bottom,
            sill_top,
            sill_bottom,
        });
    }

    // Verticals and diagonals.
    for (i, rect) in rects.iter().enumerate() {
        match orient[i] {
            Orientation::Horizontal => {}
            Orientation::Diagonal => roles[i] = Some(Role::Brace),
            Orientation::Vertical => {
                roles[i] = Some(classify_vertical(
                    rect, &openings, bottom_top, top_bottom, tol, i,
                )?);
            }
        }
    }

    build_records(rects, &roles, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Orientation {
    Horizontal,
    Vertical,
    Diagonal,
}

fn orientation(rect: &RectCandidate, tol_deg: f64) -> Orientation {
    if angle_diff_deg(rect.angle_deg, 0.0) <= tol_deg {
        Orientation::Horizontal
    } else if angle_diff_deg(rect.angle_deg, 90.0) <= tol_deg {
        Orientation::Vertical
    } else {
        Orientation::Diagonal
    }
}

fn entity_id(reading_index: usize) -> String {
    format!("rect_{reading_index:03}")
}

fn classify_vertical(
    rect: &RectCandidate,
    openings: &[OpeningGeom],
    bottom_top: f64,
    top_bottom: f64,
    tol: f64,
    index: usize,
) -> Result<Role, OntologyError> {
    let bb = rect.bbox;
    let spans_plates = bb.min.y <= bottom_top + tol && bb.max.y >= top_bottom - tol;
    for (o, open) in openings.iter().enumerate() {
        let flanks_left = (bb.max.x - open.x0).abs() <= tol;
        let flanks_right = (bb.min.x - open.x1).abs() <= tol;
        if (flanks_left || flanks_right) && spans_plates {
            return Ok(Role::KingStud {
                opening: o,
                left: flanks_left,
            });
        }
        let inside = bb.min.x >= open.x0 - tol && bb.max.x <= open.x1 + tol;
        if !inside {
            continue;
        }
        let on_left_jamb = (bb.min.x - open.x0).abs() <= tol;
        let on_right_jamb = (bb.max.x - open.x1).abs() <= tol;
        if bb.min.y >= open.header_top - tol {
            return Ok(Role::CrippleUp { opening: o });
        }
        if bb.max.y <= open.sill_bottom + tol {
            return if on_left_jamb || on_right_jamb {
                Ok(Role::TrimmerDown {
                    opening: o,
                    left: on_left_jamb,
                })
            } else {
                Ok(Role::CrippleDown { opening: o })
            };
        }
        if bb.min.y >= open.sill_top - tol && bb.max.y <= open.header_bottom + tol {
            if on_left_jamb || on_right_jamb {
                return Ok(Role::TrimmerUp {
                    opening: o,
                    left: on_left_jamb,
                });
            }
            return Err(OntologyError::Unclassifiable {
                entity_id: entity_id(index),
                reason: "vertical member floating inside an opening".into(),
            });
        }
        return Err(OntologyError::Unclassifiable {
            entity_id: entity_id(index),
            reason: "vertical member crosses an opening band".into(),
        });
    }
    if spans_plates {
        Ok(Role::Stud)
    } else {
        Err(OntologyError::Unclassifiable {
            entity_id: entity_id(index),
            reason: "short vertical member outside any opening".into(),
        })
    }
}

/// Cluster sorted-by-key indices into groups whose keys lie within `gap` of
/// the previous member. Returns groups ordered by ascending key.
fn cluster_by<F: Fn(&usize) -> f64>(indices: &[usize], key: F, gap: f64) -> Vec<Vec<usize>> {
    let mut sorted: Vec<usize> = indices.to_vec();
    sorted.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in sorted {
        match groups.last_mut() {
            Some(group) if (key(&i) - key(group.last().unwrap())).abs() <= gap => group.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Group indices whose x-extents overlap, ordered left-to-right.
fn cluster_by_overlap(indices: &[usize], rects: &[RectCandidate]) -> Vec<Vec<usize>> {
    let mut sorted: Vec<usize> = indices.to_vec();
    sorted.sort_by(|a, b| {
        rects[*a]
            .bbox
            .min
            .x
            .partial_cmp(&rects[*b].bbox.min.x)
            .unwrap()
    });
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for i in sorted {
        let bb = rects[i].bbox;
        match groups.last_mut() {
            Some((max_x, group)) if bb.min.x <= *max_x => {
                *max_x = max_x.max(bb.max.x);
                group.push(i);
            }
            _ => groups.push((bb.max.x, vec![i])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

fn build_records(
    rects: &[RectCandidate],
    roles: &[Option<Role>],
    config: &ClassifyConfig,
) -> Result<Vec<ComponentRecord>, OntologyError> {
    // Names first: numbering is by x position within each role family.
    let mut names: Vec<String> = vec![String::new(); rects.len()];
    let mut kinds: Vec<ComponentKind> = vec![ComponentKind::Stud; rects.len()];
    let mut groups: Vec<Option<String>> = vec![None; rects.len()];

    let by_x = |family: &mut Vec<usize>| {
        family.sort_by(|a, b| {
            rects[*a]
                .center
                .x
                .partial_cmp(&rects[*b].center.x)
                .unwrap()
                .then(a.cmp(b))
        });
    };

    let mut studs: Vec<usize> = Vec::new();
    let mut braces: Vec<usize> = Vec::new();
    let mut layered: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut cripples: BTreeMap<(usize, bool), Vec<usize>> = BTreeMap::new();

    for (i, role) in roles.iter().enumerate() {
        let role = role.as_ref().ok_or_else(|| OntologyError::Unclassifiable {
            entity_id: entity_id(i),
            reason: "no role assigned".into(),
        })?;
        match role {
            Role::BottomPlate => {
                kinds[i] = ComponentKind::BottomPlate;
                layered.entry("bottom_plate".into()).or_default().push(i);
            }
            Role::TopPlate => {
                kinds[i] = ComponentKind::TopPlate;
                layered.entry("top_plate".into()).or_default().push(i);
            }
            Role::Header { opening } => {
                kinds[i] = ComponentKind::Header;
                layered
                    .entry(format!("window_{}_header", opening + 1))
                    .or_default()
                    .push(i);
            }
            Role::Sill { opening } => {
                kinds[i] = ComponentKind::SillPlate;
                layered
                    .entry(format!("window_{}_sill_plate", opening + 1))
                    .or_default()
                    .push(i);
            }
            Role::Stud => studs.push(i),
            Role::KingStud { opening, left } => {
                kinds[i] = ComponentKind::KingStud;
                names[i] = format!(
                    "window_{}_king_stud_{}",
                    opening + 1,
                    if *left { "left" } else { "right" }
                );
            }
            Role::TrimmerUp { opening, left } | Role::TrimmerDown { opening, left } => {
                kinds[i] = ComponentKind::Trimmer;
                let updown = if matches!(role, Role::TrimmerUp { .. }) {
                    "up"
                } else {
                    "down"
                };
                names[i] = format!(
                    "window_{}_trimmer_{}_{}",
                    opening + 1,
                    if *left { "left" } else { "right" },
                    updown
                );
            }
            Role::CrippleUp { opening } => {
                kinds[i] = ComponentKind::Cripple;
                cripples.entry((*opening, true)).or_default().push(i);
            }
            Role::CrippleDown { opening } => {
                kinds[i] = ComponentKind::Cripple;
                cripples.entry((*opening, false)).or_default().push(i);
            }
            Role::Brace => {
                kinds[i] = ComponentKind::DiagonalBrace;
                braces.push(i);
            }
        }
    }

    by_x(&mut studs);
    for (n, &i) in studs.iter().enumerate() {
        kinds[i] = ComponentKind::Stud;
        names[i] = format!("stud_{}", n + 1);
    }
    by_x(&mut braces);
    for (n, &i) in braces.iter().enumerate() {
        names[i] = format!("diagonal_brace_{}", n + 1);
    }
    for ((opening, up), mut family) in cripples {
        by_x(&mut family);
        for (n, &i) in family.iter().enumerate() {
            names[i] = format!(
                "window_{}_cripple_{}_{}",
                opening + 1,
                if up { "up" } else { "down" },
                n + 1
            );
        }
    }
    for (base, mut members) in layered {
        // Layer index follows input (reading/document) order.
        members.sort();
        let single = members.len() == 1;
        for (n, &i) in members.iter().enumerate() {
            if single {
                names[i] = base.clone();
            } else {
                names[i] = format!("{base}_layer_{}", n + 1);
                groups[i] = Some(base.clone());
            }
        }
    }

    let adjacency_tol = config.contact_tol_in;
    let mut records = Vec::with_capacity(rects.len());
    for (i, rect) in rects.iter().enumerate() {
        let adjacency: BTreeSet<String> = (0..rects.len())
            .filter(|&j| j != i && rect.bbox.touches(&rects[j].bbox, adjacency_tol))
            .map(|j| names[j].clone())
            .collect();
        let mass_kg = match config.mass_overrides.get(&names[i]) {
            Some(&m) => m,
            None => {
                let computed =
                    compute_mass(rect, config.material_density_kg_m3, config.member_depth_in)?;
                match config.mass_clamp_kg {
                    Some((lo, hi)) => computed.clamp(lo, hi),
                    None => computed,
                }
            }
        };
        let layer_group = groups[i].as_ref().map(|g| LayerRef {
            group_id: g.clone(),
            layer_index: layer_index_of(&names[i]),
        });
        records.push(ComponentRecord {
            id: names[i].clone(),
            dxf_entity_id: entity_id(i),
            kind: kinds[i],
            geometry: rect.clone(),
            layer_group,
            adjacency,
            prerequisites: BTreeSet::new(),
            mass_kg,
            rules: Vec::new(),
        });
    }
    Ok(records)
}

fn layer_index_of(name: &str) -> u8 {
    name.rsplit("_layer_")
        .next()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1)
}

/// Derive the prerequisite-generating rules and write each component's
/// Pre(v) (the union of its rule requirements) into the records.
///
/// Rule schedule:
/// - every vertical member requires all bottom-plate layers;
/// - a header requires its flanking king studs and the trimmers directly
///   below it, both as a support dependency (detection implies presence)
///   and as a consistency constraint;
/// - a sill plate requires the trimmers/cripples supporting it from below;
/// - a cripple above an opening requires that opening's header layers;
/// - a top plate requires every full-height vertical (studs and kings);
/// - a diagonal brace requires the plates and studs it touches;
/// - layer siblings are tied together by adjacency-pattern rules.
pub fn derive_rules(
    components: &mut [ComponentRecord],
) -> Result<Vec<AssemblyRule>, OntologyError> {
    let contact_tol = 0.25;
    let by_id: BTreeMap<String, usize> = components
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.clone(), i))
        .collect();
    let ids_of = |kind: ComponentKind, comps: &[ComponentRecord]| -> BTreeSet<String> {
        comps
            .iter()
            .filter(|c| c.kind == kind)
            .map(|c| c.id.clone())
            .collect()
    };
    let bottoms = ids_of(ComponentKind::BottomPlate, components);
    let full_height: BTreeSet<String> = components
        .iter()
        .filter(|c| matches!(c.kind, ComponentKind::Stud | ComponentKind::KingStud))
        .map(|c| c.id.clone())
        .collect();

    let mut rules: Vec<AssemblyRule> = Vec::new();
    let mut per_component: Vec<Vec<AssemblyRule>> = vec![Vec::new(); components.len()];

    for (i, comp) in components.iter().enumerate() {
        let mut local: Vec<(RuleKind, BTreeSet<String>)> = Vec::new();
        if comp.kind.is_vertical_member() && !bottoms.is_empty() {
            local.push((RuleKind::ConsistencyConstraint, bottoms.clone()));
        }
        match comp.kind {
            ComponentKind::Header => {
                let mut req = BTreeSet::new();
                for adj in &comp.adjacency {
                    let other = &components[by_id[adj]];
                    match other.kind {
                        ComponentKind::KingStud => {
                            req.insert(other.id.clone());
                        }
                        ComponentKind::Trimmer
                            if (other.geometry.bbox.max.y - comp.geometry.bbox.min.y).abs()
                                <= contact_tol =>
                        {
                            req.insert(other.id.clone());
                        }
                        _ => {}
                    }
                }
                if !req.is_empty() {
                    local.push((RuleKind::SupportDependency, req.clone()));
                    local.push((RuleKind::ConsistencyConstraint, req));
                }
            }
            ComponentKind::SillPlate => {
                let req: BTreeSet<String> = comp
                    .adjacency
                    .iter()
                    .filter(|adj| {
                        let other = &components[by_id[adj.as_str()]];
                        matches!(other.kind, ComponentKind::Trimmer | ComponentKind::Cripple)
                            && (other.geometry.bbox.max.y - comp.geometry.bbox.min.y).abs()
                                <= contact_tol
                    })
                    .cloned()
                    .collect();
                if !req.is_empty() {
                    local.push((RuleKind::ConsistencyConstraint, req));
                }
            }
            ComponentKind::Cripple => {
                // A cripple sitting on a header requires that header's layers.
                let req: BTreeSet<String> = comp
                    .adjacency
                    .iter()
                    .filter(|adj| {
                        let other = &components[by_id[adj.as_str()]];
                        other.kind == ComponentKind::Header
                            && (other.geometry.bbox.max.y - comp.geometry.bbox.min.y).abs()
                                <= contact_tol
                    })
                    .cloned()
                    .collect();
                if !req.is_empty() {
                    local.push((RuleKind::ConsistencyConstraint, req));
                }
            }
            ComponentKind::TopPlate => {
                if !full_height.is_empty() {
                    local.push((RuleKind::ConsistencyConstraint, full_height.clone()));
                }
            }
            ComponentKind::DiagonalBrace => {
                let req: BTreeSet<String> = comp
                    .adjacency
                    .iter()
                    .filter(|adj| {
                        matches!(
                            components[by_id[adj.as_str()]].kind,
                            ComponentKind::BottomPlate
                                | ComponentKind::TopPlate
                                | ComponentKind::Stud
                        )
                    })
                    .cloned()
                    .collect();
                if !req.is_empty() {
                    local.push((RuleKind::ConsistencyConstraint, req));
                }
            }
            _ => {}
        }
        if let Some(layer) = &comp.layer_group {
            let siblings: BTreeSet<String> = components
                .iter()
                .filter(|c| {
                    c.id != comp.id
                        && c.layer_group.as_ref().map(|l| &l.group_id) == Some(&layer.group_id)
                })
                .map(|c| c.id.clone())
                .collect();
            if !siblings.is_empty() {
                local.push((RuleKind::AdjacencyPattern, siblings));
            }
        }

        for (n, (kind, required)) in local.into_iter().enumerate() {
            let tag = match kind {
                RuleKind::SupportDependency => "support",
                RuleKind::ConsistencyConstraint => "consistency",
                RuleKind::AdjacencyPattern => "adjacency",
            };
            per_component[i].push(AssemblyRule {
                rule_id: format!("{}.{tag}.{n}", comp.id),
                kind,
                subject: comp.id.clone(),
                required,
            });
        }
    }

    for (i, comp_rules) in per_component.into_iter().enumerate() {
        let mut pre = BTreeSet::new();
        for rule in &comp_rules {
            if rule.kind != RuleKind::AdjacencyPattern {
                pre.extend(rule.required.iter().cloned());
            }
        }
        pre.remove(&components[i].id);
        components[i].prerequisites = pre;
        components[i].rules = comp_rules.iter().map(|r| r.rule_id.clone()).collect();
        rules.extend(comp_rules);
    }

    let pre_map: BTreeMap<String, BTreeSet<String>> = components
        .iter()
        .map(|c| (c.id.clone(), c.prerequisites.clone()))
        .collect();
    check_acyclic(&pre_map)?;
    Ok(rules)
}

/// Depth-first cycle check over the prerequisite relation; errors name one
/// cycle when found.
fn check_acyclic(pre: &BTreeMap<String, BTreeSet<String>>) -> Result<(), OntologyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Gray,
        Black,
    }
    let mut marks: BTreeMap<&str, Mark> = pre.keys().map(|k| (k.as_str(), Mark::White)).collect();

    fn visit<'a>(
        node: &'a str,
        pre: &'a BTreeMap<String, BTreeSet<String>>,
        marks: &mut BTreeMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Result<(), OntologyError> {
        match marks.get(node).copied() {
            Some(Mark::Black) | None => return Ok(()),
            Some(Mark::Gray) => {
                let start = stack.iter().position(|n| *n == node).unwrap_or(0);
                let mut cycle: Vec<&str> = stack[start..].to_vec();
                cycle.push(node);
                return Err(OntologyError::PrerequisiteCycle(cycle.join(" -> ")));
            }
            Some(Mark::White) => {}
        }
        marks.insert(node, Mark::Gray);
        stack.push(node);
        if let Some(deps) = pre.get(node) {
            for dep in deps {
                visit(dep, pre, marks, stack)?;
            }
        }
        stack.pop();
        marks.insert(node, Mark::Black);
        Ok(())
    }

    let keys: Vec<&str> = pre.keys().map(|k| k.as_str()).collect();
    for key in keys {
        visit(key, pre, &mut marks, &mut Vec::new())?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::dxf::RectCandidate;
    use crate::fixtures;
    use crate::geom::Point2;

    #[test]
    fn mass_from_dimensions() {
        // 96 x 1.5 x 3.5 in of 450 kg/m3 softwood, hand-checked:
        // 504 in^3 * 1.6387064e-5 m^3/in^3 * 450 = 3.71659 kg.
        let rect = RectCandidate::new(Point2::new(0.0, 0.0), 96.0, 1.5, 0.0);
        let mass = compute_mass(&rect, 450.0, 3.5).unwrap();
        assert!((mass - 3.717).abs() < 1e-3, "mass {mass}");
    }

    #[test]
    fn mass_rejects_nonpositive() {
        let rect = RectCandidate::new(Point2::new(0.0, 0.0), 96.0, 1.5, 0.0);
        assert!(compute_mass(&rect, -1.0, 3.5).is_err());
        assert!(compute_mass(&rect, 450.0, 0.0).is_err());
    }

    #[test]
    fn fixture_mass_overrides() {
        let array = fixtures::timber27_array();
        assert_eq!(array.component("bottom_plate").unwrap().mass_kg, 13.86);
        assert_eq!(
            array.component("window_1_cripple_up_1").unwrap().mass_kg,
            1.5
        );
    }

    #[test]
    fn lowest_full_width_member_is_bottom_plate() {
        let rects = vec![
            RectCandidate::new(Point2::new(48.0, 47.25), 96.0, 1.5, 0.0),
            RectCandidate::new(Point2::new(48.0, 24.0), 45.0, 1.5, 90.0),
            RectCandidate::new(Point2::new(48.0, 0.75), 96.0, 1.5, 0.0),
        ];
        let records = classify_components(&rects, &ClassifyConfig::default()).unwrap();
        let lowest = records
            .iter()
            .min_by(|a, b| {
                a.geometry
                    .center
                    .y
                    .partial_cmp(&b.geometry.center.y)
                    .unwrap()
            })
            .unwrap();
        assert_eq!(lowest.kind, ComponentKind::BottomPlate);
        assert_eq!(lowest.id, "bottom_plate");
    }

    #[test]
    fn timber27_classification_matches_authored_roles() {
        let (records, authored) = fixtures::timber27_classified_with_roles();
        assert_eq!(records.len(), 27);
        for record in &records {
            assert_eq!(
                Some(&record.kind),
                authored.get(&record.id),
                "role mismatch for {}",
                record.id
            );
        }
        // Opening parts are named window_<n>_<role>_<side>_<updown>[_k].
        assert!(records.iter().any(|r| r.id == "window_1_cripple_up_2"));
        let cripple = records
            .iter()
            .find(|r| r.id == "window_1_cripple_up_2")
            .unwrap();
        assert_eq!(cripple.kind, ComponentKind::Cripple);
        // It sits between the header top and the top plate.
        assert!(cripple.geometry.bbox.min.y >= 37.5 - 1e-9);
        assert!(cripple.geometry.bbox.max.y <= 46.5 + 1e-9);
    }

    #[test]
    fn bottom_plate_has_no_prerequisites() {
        let array = fixtures::timber27_array();
        assert!(array
            .component("bottom_plate")
            .unwrap()
            .prerequisites
            .is_empty());
        for c in &array.components {
            if c.kind != ComponentKind::BottomPlate {
                assert!(
                    !c.prerequisites.is_empty(),
                    "{} should have prerequisites",
                    c.id
                );
            }
        }
    }

    #[test]
    fn header_requires_kings_and_trimmers() {
        let array = fixtures::timber27_array();
        let header = array.component("window_1_header_layer_1").unwrap();
        for id in [
            "window_1_king_stud_left",
            "window_1_king_stud_right",
            "window_1_trimmer_left_up",
            "window_1_trimmer_right_up",
        ] {
            assert!(header.prerequisites.contains(id), "missing {id}");
        }
        assert!(!header.prerequisites.contains("window_1_trimmer_left_down"));
    }

    #[test]
    fn timber27_rules_are_acyclic_by_independent_dfs() {
        let array = fixtures::timber27_array();
        // Independent oracle: Kahn-style elimination must consume all nodes.
        let mut pre = array.prerequisites();
        let mut removed = BTreeSet::new();
        loop {
            let ready: Vec<String> = pre
                .iter()
                .filter(|(_, deps)| deps.iter().all(|d| removed.contains(d)))
                .map(|(id, _)| id.clone())
                .collect();
            if ready.is_empty() {
                break;
            }
            for id in ready {
                pre.remove(&id);
                removed.insert(id);
            }
        }
        assert!(
            pre.is_empty(),
            "cycle among {:?}",
            pre.keys().collect::<Vec<_>>()
        );
    }

    #[test]
    fn derive_rules_rejects_cycles() {
        let mut records = [
            dummy_record("a", ComponentKind::Stud),
            dummy_record("b", ComponentKind::Stud),
        ];
        records[0].prerequisites = BTreeSet::from(["b".to_string()]);
        records[1].prerequisites = BTreeSet::from(["a".to_string()]);
        let pre_map: BTreeMap<String, BTreeSet<String>> = records
            .iter()
            .map(|c| (c.id.clone(), c.prerequisites.clone()))
            .collect();
        let err = check_acyclic(&pre_map).unwrap_err();
        assert!(matches!(err, OntologyError::PrerequisiteCycle(_)));
    }

    #[test]
    fn classification_is_deterministic() {
        let (rects, _) = fixtures::timber27_rects_with_roles();
        let a = classify_components(&rects, &fixtures::timber27_classify_config()).unwrap();
        let b = classify_components(&rects, &fixtures::timber27_classify_config()).unwrap();
        assert_eq!(a, b);
    }

    pub(crate) fn dummy_record(id: &str, kind: ComponentKind) -> ComponentRecord {
        ComponentRecord {
            id: id.to_string(),
            dxf_entity_id: format!("rect_{id}"),
            kind,
            geometry: RectCandidate::new(Point2::new(0.0, 0.0), 10.0, 1.5, 0.0),
            layer_group: None,
            adjacency: BTreeSet::new(),
            prerequisites: BTreeSet::new(),
            mass_kg: 1.0,
            rules: Vec::new(),
        }
    }
}
