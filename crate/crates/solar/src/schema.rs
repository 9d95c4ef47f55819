//! Published JSON schemas for every document the CLI reads or writes.

pub const PENALTY_SPEC: &str = include_str!("../schemas/penalty_spec.schema.json");
pub const FIT_REPORT: &str = include_str!("../schemas/fit_report.schema.json");
pub const GROUP_REPORT: &str = include_str!("../schemas/group_report.schema.json");
pub const PROX: &str = include_str!("../schemas/prox.schema.json");
pub const VERIFY_REPORT: &str = include_str!("../schemas/verify_report.schema.json");

pub const ALL: [(&str, &str); 5] = [
    ("penalty_spec", PENALTY_SPEC),
    ("fit_report", FIT_REPORT),
    ("group_report", GROUP_REPORT),
    ("prox", PROX),
    ("verify_report", VERIFY_REPORT),
];
