use std::sync::OnceLock;

use serde::Deserialize;

/// Calibration constants frozen in `fixtures/calibration.toml`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub strauss_c: f64,
    pub c_mor: f64,
}

static CALIBRATION: OnceLock<Calibration> = OnceLock::new();

pub fn calibration() -> &'static Calibration {
    CALIBRATION.get_or_init(|| {
        toml::from_str(include_str!("../fixtures/calibration.toml"))
            .expect("calibration fixture parses")
    })
}
