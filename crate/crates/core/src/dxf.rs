//! DXF-subset ingestion: entity parsing, scale recovery, and rectangle
//! reconstruction from paired parallel segments.
//!
//! Only `LINE` and `LWPOLYLINE` entities in the `ENTITIES` section are
//! interpreted; anything else is skipped with a recorded warning. The
//! drawing is treated as a planar elevation, so any Z group codes are
//! ignored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{angle_diff_deg, normalize_angle_deg, rect_corners, Bbox, Point2};

#[derive(Debug, Error)]
pub enum DxfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no usable segments in design")]
    NoSegments,
}

/// Kind tag for the DXF entity a segment came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntityKind {
    Line,
    LwPolyline,
}

/// One line segment extracted from the drawing, in drawing units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point2,
    pub end: Point2,
    /// Index of the originating entity in document order.
    pub entity_index: usize,
    pub entity_kind: EntityKind,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.start.distance(&self.end)
    }

    /// Direction angle in degrees, normalized to [0, 180).
    pub fn angle_deg(&self) -> f64 {
        normalize_angle_deg(
            (self.end.y - self.start.y)
                .atan2(self.end.x - self.start.x)
                .to_degrees(),
        )
    }

    fn midpoint(&self) -> Point2 {
        Point2::new(
            (self.start.x + self.end.x) / 2.0,
            (self.start.y + self.end.y) / 2.0,
        )
    }
}

/// Parse result: extracted segments plus warnings for skipped content.
#[derive(Debug, Clone, Default)]
pub struct ParsedDesign {
    pub segments: Vec<Segment>,
    pub warnings: Vec<String>,
}

/// Mapping from drawing units to inches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleInfo {
    pub units_per_inch: f64,
    pub nominal_thickness_in: f64,
}

pub const DEFAULT_NOMINAL_THICKNESS_IN: f64 = 1.5;

/// A reconstructed rectangular member footprint, in inches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectCandidate {
    pub center: Point2,
    pub length_in: f64,
    pub width_in: f64,
    /// Orientation in degrees, in [0, 180).
    pub angle_deg: f64,
    pub bbox: Bbox,
}

impl RectCandidate {
    pub fn new(center: Point2, length_in: f64, width_in: f64, angle_deg: f64) -> Self {
        let angle_deg = normalize_angle_deg(angle_deg);
        let bbox = Bbox::from_points(rect_corners(center, length_in, width_in, angle_deg))
            .expect("four corners");
        Self {
            center,
            length_in,
            width_in,
            angle_deg,
            bbox,
        }
    }
}

/// Tolerances for segment pairing.
#[derive(Debug, Clone, Copy)]
pub struct PairingConfig {
    /// Maximum direction difference for two segments to count as parallel.
    pub parallel_tol_deg: f64,
    /// Maximum relative length disagreement between paired segments.
    pub length_tol_frac: f64,
    /// Maximum relative deviation of the perpendicular separation from the
    /// nominal thickness.
    pub separation_tol_frac: f64,
}

impl Default for PairingConfig {
    fn default() -> Self {
        Self {
            parallel_tol_deg: 2.0,
            length_tol_frac: 0.05,
            separation_tol_frac: 0.10,
        }
    }
}

/// Rectangles recovered from the segment set plus the segments no pairing
/// consumed.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub rects: Vec<RectCandidate>,
    pub leftovers: Vec<Segment>,
}

const ZERO_LENGTH_EPS: f64 = 1e-12;

/// Parse a text-encoded DXF into segments, in document order.
///
/// Every `LINE` yields one segment; every `LWPOLYLINE` with n vertices
/// yields n-1 segments, or n when the closed flag (bit 1 of code 70) is
/// set. Malformed group-code pairing is an error carrying the offending
/// line number; unsupported entities are skipped with a warning.
pub fn parse_design(bytes: &[u8]) -> Result<ParsedDesign, DxfError> {
    let text = String::from_utf8_lossy(bytes);
    let pairs = read_group_pairs(&text)?;

    let mut out = ParsedDesign::default();
    let mut entity_index = 0usize;
    let mut in_entities = false;
    let mut i = 0usize;
    while i < pairs.len() {
        let (code, value, line) = &pairs[i];
        if *code == 0 {
            match value.as_str() {
                "SECTION" => {
                    // Section name follows as a code-2 pair.
                    in_entities =
                        matches!(pairs.get(i + 1), Some((2, name, _)) if name == "ENTITIES");
                    i += 1;
                }
                "ENDSEC" => {
                    in_entities = false;
                    i += 1;
                }
                "EOF" => break,
                name if in_entities => {
                    let consumed = match name {
                        "LINE" => {
                            parse_line_entity(&pairs[i + 1..], *line, entity_index, &mut out)?
                        }
                        "LWPOLYLINE" => {
                            parse_lwpolyline_entity(&pairs[i + 1..], *line, entity_index, &mut out)?
                        }
                        other => {
                            out.warnings
                                .push(format!("line {line}: skipped unsupported entity {other}"));
                            skip_entity(&pairs[i + 1..])
                        }
                    };
                    entity_index += 1;
                    i += 1 + consumed;
                }
                _ => i += 1,
            }
        } else {
            i += 1;
        }
    }
    Ok(out)
}

/// Group-code/value pairs with the 1-based line number of the code line.
fn read_group_pairs(text: &str) -> Result<Vec<(i32, String, usize)>, DxfError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut pairs = Vec::with_capacity(lines.len() / 2);
    let mut i = 0usize;
    while i < lines.len() {
        let code_line = lines[i].trim();
        if code_line.is_empty() && i + 1 >= lines.len() {
            break; // trailing blank line
        }
        let code: i32 = code_line.parse().map_err(|_| DxfError::Parse {
            line: i + 1,
            message: format!("expected integer group code, got {code_line:?}"),
        })?;
        let value = lines.get(i + 1).ok_or(DxfError::Parse {
            line: i + 1,
            message: "group code without a value line".into(),
        })?;
        pairs.push((code, value.trim().to_string(), i + 1));
        i += 2;
    }
    Ok(pairs)
}

fn parse_coord(value: &str, line: usize) -> Result<f64, DxfError> {
    let invalid = || DxfError::Parse {
        line,
        message: format!("invalid coordinate {value:?}"),
    };
    // "NaN" and "inf" parse as f64 but make downstream geometry undefined.
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(invalid()),
    }
}

/// Number of pairs until the next entity start (code 0).
fn skip_entity(rest: &[(i32, String, usize)]) -> usize {
    rest.iter().take_while(|(code, _, _)| *code != 0).count()
}

fn parse_line_entity(
    rest: &[(i32, String, usize)],
    entity_line: usize,
    entity_index: usize,
    out: &mut ParsedDesign,
) -> Result<usize, DxfError> {
    let consumed = skip_entity(rest);
    let mut start = (None, None);
    let mut end = (None, None);
    for (code, value, line) in &rest[..consumed] {
        match code {
            10 => start.0 = Some(parse_coord(value, *line)?),
            20 => start.1 = Some(parse_coord(value, *line)?),
            11 => end.0 = Some(parse_coord(value, *line)?),
            21 => end.1 = Some(parse_coord(value, *line)?),
            _ => {} // layer, z, handles: ignored
        }
    }
    match (start.0, start.1, end.0, end.1) {
        (Some(x1), Some(y1), Some(x2), Some(y2)) => {
            push_segment(
                out,
                Point2::new(x1, y1),
                Point2::new(x2, y2),
                entity_index,
                EntityKind::Line,
            );
            Ok(consumed)
        }
        _ => Err(DxfError::Parse {
            line: entity_line,
            message: "LINE entity missing 10/20/11/21 coordinates".into(),
        }),
    }
}

fn parse_lwpolyline_entity(
    rest: &[(i32, String, usize)],
    entity_line: usize,
    entity_index: usize,
    out: &mut ParsedDesign,
) -> Result<usize, DxfError> {
    let err = |line: usize, message: String| DxfError::Parse { line, message };
    let consumed = skip_entity(rest);
    let mut vertices: Vec<Point2> = Vec::new();
    let mut pending_x: Option<f64> = None;
    let mut closed = false;
    let mut declared: Option<usize> = None;
    for (code, value, line) in &rest[..consumed] {
        match code {
            90 => {
                declared = Some(
                    value
                        .parse()
                        .map_err(|_| err(*line, format!("invalid vertex count {value:?}")))?,
                )
            }
            70 => {
                let flags: i64 = value
                    .parse()
                    .map_err(|_| err(*line, format!("invalid flags {value:?}")))?;
                closed = flags & 1 == 1;
            }
            10 => {
                if pending_x.is_some() {
                    return Err(err(*line, "vertex x without matching y".into()));
                }
                pending_x = Some(parse_coord(value, *line)?);
            }
            20 => {
                let x = pending_x
                    .take()
                    .ok_or_else(|| err(*line, "vertex y without preceding x".into()))?;
                vertices.push(Point2::new(x, parse_coord(value, *line)?));
            }
            _ => {}
        }
    }
    if pending_x.is_some() {
        return Err(err(
            entity_line,
            "LWPOLYLINE ends with dangling vertex x".into(),
        ));
    }
    if let Some(n) = declared {
        if n != vertices.len() {
            return Err(err(
                entity_line,
                format!(
                    "LWPOLYLINE declares {n} vertices but carries {}",
                    vertices.len()
                ),
            ));
        }
    }
    if vertices.len() < 2 {
        return Err(err(
            entity_line,
            "LWPOLYLINE with fewer than 2 vertices".into(),
        ));
    }
    for pair in vertices.windows(2) {
        push_segment(out, pair[0], pair[1], entity_index, EntityKind::LwPolyline);
    }
    if closed {
        push_segment(
            out,
            *vertices.last().unwrap(),
            vertices[0],
            entity_index,
            EntityKind::LwPolyline,
        );
    }
    Ok(consumed)
}

fn push_segment(
    out: &mut ParsedDesign,
    start: Point2,
    end: Point2,
    entity_index: usize,
    entity_kind: EntityKind,
) {
    if start.distance(&end) <= ZERO_LENGTH_EPS {
        out.warnings.push(format!(
            "entity {entity_index}: dropped zero-length segment"
        ));
        return;
    }
    out.segments.push(Segment {
        start,
        end,
        entity_index,
        entity_kind,
    });
}

/// Recover the units-per-inch scale by assigning the shortest segment to the
/// nominal lumber thickness.
pub fn recover_scale(
    segments: &[Segment],
    nominal_thickness_in: f64,
) -> Result<ScaleInfo, DxfError> {
    let shortest = segments
        .iter()
        .map(Segment::length)
        .filter(|len| *len > ZERO_LENGTH_EPS)
        .fold(f64::INFINITY, f64::min);
    if !shortest.is_finite() {
        return Err(DxfError::NoSegments);
    }
    Ok(ScaleInfo {
        units_per_inch: shortest / nominal_thickness_in,
        nominal_thickness_in,
    })
}

/// Pair parallel, nearly equal-length segments separated by the nominal
/// thickness into rectangle footprints.
///
/// Pairing is greedy in document order, taking the nearest compatible
/// partner first; each segment is consumed by at most one rectangle.
/// Unpaired segments are returned as leftovers. Output is sorted
/// top-to-bottom then left-to-right by center.
pub fn reconstruct_rectangles(
    segments: &[Segment],
    scale: ScaleInfo,
    config: PairingConfig,
) -> Reconstruction {
    // Work in inches throughout.
    let scaled: Vec<Segment> = segments
        .iter()
        .map(|s| Segment {
            start: Point2::new(
                s.start.x / scale.units_per_inch,
                s.start.y / scale.units_per_inch,
            ),
            end: Point2::new(
                s.end.x / scale.units_per_inch,
                s.end.y / scale.units_per_inch,
            ),
            entity_index: s.entity_index,
            entity_kind: s.entity_kind,
        })
        .collect();

    let mut consumed = vec![false; scaled.len()];
    let mut rects = Vec::new();
    for i in 0..scaled.len() {
        if consumed[i] {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, candidate) in scaled.iter().enumerate().skip(i + 1) {
            if consumed[j] || !compatible(&scaled[i], candidate, &scale, &config) {
                continue;
            }
            let dist = scaled[i].midpoint().distance(&candidate.midpoint());
            // Strict < keeps the earliest candidate on ties.
            if best.is_none_or(|(_, d)| dist < d) {
                best = Some((j, dist));
            }
        }
        if let Some((j, _)) = best {
            consumed[i] = true;
            consumed[j] = true;
            rects.push(build_rect(&scaled[i], &scaled[j]));
        }
    }

    rects.sort_by(|a, b| {
        b.center
            .y
            .partial_cmp(&a.center.y)
            .unwrap()
            .then(a.center.x.partial_cmp(&b.center.x).unwrap())
    });

    let leftovers = scaled
        .into_iter()
        .zip(consumed)
        .filter_map(|(seg, used)| (!used).then_some(seg))
        .collect();
    Reconstruction { rects, leftovers }
}

fn compatible(a: &Segment, b: &Segment, scale: &ScaleInfo, config: &PairingConfig) -> bool {
    if angle_diff_deg(a.angle_deg(), b.angle_deg()) > config.parallel_tol_deg {
        return false;
    }
    let (la, lb) = (a.length(), b.length());
    if (la - lb).abs() > config.length_tol_frac * la.max(lb) {
        return false;
    }
    let (longitudinal, separation) = offset_components(a, b);
    let nominal = scale.nominal_thickness_in;
    if (separation - nominal).abs() > config.separation_tol_frac * nominal {
        return false;
    }
    // A rectangle's long edges are its longer sides; this also rejects the
    // spurious pairing of two board-end edges facing each other across a gap
    // equal to the thickness. The relative margin keeps the exact-square
    // case rejected under float noise.
    let length = (la + lb) / 2.0;
    if length <= separation * (1.0 + 1e-9) {
        return false;
    }
    // The edges must actually face each other: midpoints may not be offset
    // along the common direction by more than half the edge length.
    longitudinal.abs() <= length / 2.0
}

/// Offset between segment midpoints decomposed along/perpendicular to the
/// mean direction of the pair.
fn offset_components(a: &Segment, b: &Segment) -> (f64, f64) {
    let theta = a.angle_deg().to_radians();
    let (sin, cos) = theta.sin_cos();
    let ma = a.midpoint();
    let mb = b.midpoint();
    let dx = mb.x - ma.x;
    let dy = mb.y - ma.y;
    let longitudinal = dx * cos + dy * sin;
    let separation = (-dx * sin + dy * cos).abs();
    (longitudinal, separation)
}

fn build_rect(a: &Segment, b: &Segment) -> RectCandidate {
    let ma = a.midpoint();
    let mb = b.midpoint();
    let center = Point2::new((ma.x + mb.x) / 2.0, (ma.y + mb.y) / 2.0);
    let length = (a.length() + b.length()) / 2.0;
    let (_, separation) = offset_components(a, b);
    RectCandidate::new(center, length, separation, a.angle_deg())
}

/// Emit a synthetic design as DXF text: one LINE per rectangle long edge.
pub fn emit_long_edges_dxf(rects: &[RectCandidate], units_per_inch: f64) -> String {
    let mut body = String::new();
    for rect in rects {
        let corners = rect_corners(rect.center, rect.length_in, rect.width_in, rect.angle_deg);
        // Corners come in order: the two long edges are 0-1 and 3-2.
        for (s, e) in [(corners[0], corners[1]), (corners[3], corners[2])] {
            body.push_str(&format_line_entity(s, e, units_per_inch));
        }
    }
    wrap_entities_section(&body)
}

/// Emit a synthetic design as DXF text: one closed LWPOLYLINE outline per
/// rectangle.
pub fn emit_outlines_dxf(rects: &[RectCandidate], units_per_inch: f64) -> String {
    let mut body = String::new();
    for rect in rects {
        let corners = rect_corners(rect.center, rect.length_in, rect.width_in, rect.angle_deg);
        body.push_str("0\nLWPOLYLINE\n8\n0\n90\n4\n70\n1\n");
        for corner in corners {
            body.push_str(&format!(
                "10\n{}\n20\n{}\n",
                fmt_coord(corner.x * units_per_inch),
                fmt_coord(corner.y * units_per_inch)
            ));
        }
    }
    wrap_entities_section(&body)
}

fn format_line_entity(s: Point2, e: Point2, k: f64) -> String {
    format!(
        "0\nLINE\n8\n0\n10\n{}\n20\n{}\n11\n{}\n21\n{}\n",
        fmt_coord(s.x * k),
        fmt_coord(s.y * k),
        fmt_coord(e.x * k),
        fmt_coord(e.y * k)
    )
}

fn fmt_coord(v: f64) -> String {
    // Rust's default formatting is the shortest representation that parses
    // back to the same f64, so emitted coordinates are lossless.
    let mut buf = format!("{v}");
    if !buf.contains('.') && !buf.contains('e') {
        buf.push_str(".0");
    }
    buf
}

fn wrap_entities_section(body: &str) -> String {
    format!("0\nSECTION\n2\nENTITIES\n{body}0\nENDSEC\n0\nEOF\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(sx: f64, sy: f64, ex: f64, ey: f64) -> Segment {
        Segment {
            start: Point2::new(sx, sy),
            end: Point2::new(ex, ey),
            entity_index: 0,
            entity_kind: EntityKind::Line,
        }
    }

    const INCH_SCALE: ScaleInfo = ScaleInfo {
        units_per_inch: 1.0,
        nominal_thickness_in: 1.5,
    };

    #[test]
    fn single_line_yields_one_segment() {
        let text = "0\nSECTION\n2\nENTITIES\n0\nLINE\n8\n0\n10\n0.0\n20\n0.0\n11\n10.0\n21\n0.0\n0\nENDSEC\n0\nEOF\n";
        let parsed = parse_design(text.as_bytes()).unwrap();
        assert_eq!(parsed.segments.len(), 1);
        assert_eq!(parsed.segments[0].start, Point2::new(0.0, 0.0));
        assert_eq!(parsed.segments[0].end, Point2::new(10.0, 0.0));
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn closed_lwpolyline_yields_loop() {
        let text = "0\nSECTION\n2\nENTITIES\n0\nLWPOLYLINE\n8\n0\n90\n4\n70\n1\n10\n0\n20\n0\n10\n4\n20\n0\n10\n4\n20\n2\n10\n0\n20\n2\n0\nENDSEC\n0\nEOF\n";
        let parsed = parse_design(text.as_bytes()).unwrap();
        assert_eq!(parsed.segments.len(), 4);
        assert_eq!(parsed.segments[3].end, parsed.segments[0].start);
    }

    #[test]
    fn open_polyline_and_lines_fixture_count_matches_reference() {
        // Fixture: 3 LINEs plus one open 3-vertex LWPOLYLINE.
        let text = "0\nSECTION\n2\nENTITIES\n\
            0\nLINE\n10\n0\n20\n0\n11\n1\n21\n0\n\
            0\nLINE\n10\n0\n20\n1\n11\n1\n21\n1\n\
            0\nLINE\n10\n0\n20\n2\n11\n1\n21\n2\n\
            0\nLWPOLYLINE\n90\n3\n70\n0\n10\n0\n20\n3\n10\n1\n20\n3\n10\n2\n20\n4\n\
            0\nENDSEC\n0\nEOF\n";
        // Independent reference count over the raw fixture text: each LINE is
        // one segment; an open polyline with v vertices is v - 1.
        let line_count = text.matches("\nLINE\n").count();
        let vertex_count = text
            .split("\nLWPOLYLINE\n")
            .nth(1)
            .unwrap()
            .matches("\n20\n")
            .count();
        let expected = line_count + (vertex_count - 1);
        assert_eq!(expected, 5);

        let parsed = parse_design(text.as_bytes()).unwrap();
        assert_eq!(parsed.segments.len(), expected);
    }

    #[test]
    fn unsupported_entity_is_skipped_with_warning() {
        let text = "0\nSECTION\n2\nENTITIES\n0\nCIRCLE\n10\n0\n20\n0\n40\n5\n0\nLINE\n10\n0\n20\n0\n11\n2\n21\n0\n0\nENDSEC\n0\nEOF\n";
        let parsed = parse_design(text.as_bytes()).unwrap();
        assert_eq!(parsed.segments.len(), 1);
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].contains("CIRCLE"));
    }

    #[test]
    fn malformed_pairing_reports_line_number() {
        let text = "0\nSECTION\n2\nENTITIES\n0\nLINE\n10\nnot-a-number\n20\n0\n11\n1\n21\n0\n0\nENDSEC\n0\nEOF\n";
        let err = parse_design(text.as_bytes()).unwrap_err();
        match err {
            DxfError::Parse { line, .. } => assert_eq!(line, 7),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_finite_coordinates_are_rejected() {
        for bad in ["NaN", "inf", "-inf"] {
            let text = format!(
                "0\nSECTION\n2\nENTITIES\n0\nLINE\n10\n{bad}\n20\n0\n11\n1\n21\n0\n0\nENDSEC\n0\nEOF\n"
            );
            assert!(parse_design(text.as_bytes()).is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn truncated_file_reports_line_number() {
        let text = "0\nSECTION\n2\nENTITIES\n0\nLINE\n10\n";
        let err = parse_design(text.as_bytes()).unwrap_err();
        assert!(matches!(err, DxfError::Parse { line: 7, .. }), "{err}");
    }

    #[test]
    fn scale_identity_case() {
        let segments = vec![seg(0.0, 0.0, 1.5, 0.0), seg(0.0, 0.0, 0.0, 10.0)];
        let scale = recover_scale(&segments, 1.5).unwrap();
        assert_eq!(scale.units_per_inch, 1.0);
    }

    #[test]
    fn scale_by_division() {
        let segments = vec![seg(0.0, 0.0, 0.125, 0.0)];
        let scale = recover_scale(&segments, 1.5).unwrap();
        assert!((scale.units_per_inch - 0.125 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn scale_rejects_degenerate_input() {
        assert!(matches!(recover_scale(&[], 1.5), Err(DxfError::NoSegments)));
        let zero = vec![seg(1.0, 1.0, 1.0, 1.0)];
        assert!(matches!(
            recover_scale(&zero, 1.5),
            Err(DxfError::NoSegments)
        ));
    }

    #[test]
    fn parallel_pair_becomes_rectangle() {
        let segments = vec![seg(0.0, 0.0, 96.0, 0.0), seg(0.0, 1.5, 96.0, 1.5)];
        let recon = reconstruct_rectangles(&segments, INCH_SCALE, PairingConfig::default());
        assert_eq!(recon.rects.len(), 1);
        assert!(recon.leftovers.is_empty());
        let rect = &recon.rects[0];
        assert!((rect.length_in - 96.0).abs() < 1e-9);
        assert!((rect.width_in - 1.5).abs() < 1e-9);
        assert_eq!(rect.angle_deg, 0.0);
        assert!((rect.center.x - 48.0).abs() < 1e-9);
        assert!((rect.center.y - 0.75).abs() < 1e-9);
    }

    #[test]
    fn perpendicular_segments_are_leftovers() {
        let segments = vec![seg(0.0, 0.0, 10.0, 0.0), seg(0.0, 0.0, 0.0, 10.0)];
        let recon = reconstruct_rectangles(&segments, INCH_SCALE, PairingConfig::default());
        assert!(recon.rects.is_empty());
        assert_eq!(recon.leftovers.len(), 2);
    }

    #[test]
    fn facing_board_ends_are_not_paired() {
        // Two 1.5 in end edges facing each other 1.5 in apart must not form
        // a phantom square.
        let segments = vec![seg(0.0, 0.0, 1.5, 0.0), seg(0.0, 1.5, 1.5, 1.5)];
        let recon = reconstruct_rectangles(&segments, INCH_SCALE, PairingConfig::default());
        assert!(recon.rects.is_empty());
        assert_eq!(recon.leftovers.len(), 2);
    }

    #[test]
    fn reading_order_sort() {
        let segments = vec![
            seg(10.0, 0.0, 20.0, 0.0),
            seg(10.0, 1.5, 20.0, 1.5),
            seg(0.0, 10.0, 10.0, 10.0),
            seg(0.0, 11.5, 10.0, 11.5),
        ];
        let recon = reconstruct_rectangles(&segments, INCH_SCALE, PairingConfig::default());
        assert_eq!(recon.rects.len(), 2);
        // Higher rectangle first (top-to-bottom), then left-to-right.
        assert!(recon.rects[0].center.y > recon.rects[1].center.y);
    }
}
