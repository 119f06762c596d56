//! SVG rendering of the design: one rotated rectangle per component with a
//! fixed fill color per construction role, labeled by DXF entity id.

use crate::ontology::{ComponentArray, ComponentKind};

/// Fixed role colors shared with the design-image convention.
pub fn kind_color(kind: ComponentKind) -> &'static str {
    match kind {
        ComponentKind::Stud => "rgb(0,255,255)",
        ComponentKind::BottomPlate => "rgb(255,165,0)",
        ComponentKind::TopPlate => "rgb(255,255,0)",
        ComponentKind::Header => "rgb(255,0,0)",
        ComponentKind::KingStud => "rgb(0,0,255)",
        ComponentKind::Trimmer => "rgb(0,255,0)",
        ComponentKind::DiagonalBrace => "rgb(255,0,255)",
        ComponentKind::Cripple => "rgb(138,43,226)",
        ComponentKind::SillPlate => "rgb(0,128,0)",
    }
}

/// Render the array as an SVG 1.1 document. Design y points up; the output
/// flips it into screen coordinates.
pub fn render_design(array: &ComponentArray) -> String {
    const MARGIN: f64 = 2.0;
    let extent = array
        .components
        .iter()
        .map(|c| c.geometry.bbox)
        .reduce(|a, b| a.union(&b));

    let (min_x, min_y, width, height) = match extent {
        Some(bb) => (
            bb.min.x - MARGIN,
            bb.min.y - MARGIN,
            bb.width() + 2.0 * MARGIN,
            bb.height() + 2.0 * MARGIN,
        ),
        None => (0.0, 0.0, 1.0, 1.0),
    };
    let top = min_y + height;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    for c in &array.components {
        let g = &c.geometry;
        let cx = g.center.x - min_x;
        let cy = top - g.center.y;
        let x = cx - g.length_in / 2.0;
        let y = cy - g.width_in / 2.0;
        // The y flip mirrors the rotation direction.
        svg.push_str(&format!(
            "  <rect x=\"{x}\" y=\"{y}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.75\" stroke=\"black\" stroke-width=\"0.1\" transform=\"rotate({} {cx} {cy})\"/>\n",
            g.length_in,
            g.width_in,
            kind_color(c.kind),
            -g.angle_deg,
        ));
        svg.push_str(&format!(
            "  <text x=\"{cx}\" y=\"{cy}\" font-size=\"1.2\" text-anchor=\"middle\" dominant-baseline=\"middle\">{}</text>\n",
            c.dxf_entity_id
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
