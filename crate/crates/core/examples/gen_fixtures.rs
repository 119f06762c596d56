use frameplan_core::{fixtures, scm};

fn main() {
    std::fs::write(
        "crates/core/fixtures/timber27.dxf",
        fixtures::timber27_dxf(),
    )
    .unwrap();
    let array = fixtures::timber27_array();
    std::fs::write(
        "crates/core/fixtures/timber27.scm.json",
        scm::serialize_scm(&array),
    )
    .unwrap();
    println!("fixtures written");
}
