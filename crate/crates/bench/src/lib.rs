//! Fixtures shared by the benchmarks in `benches/`.

use pdexplain::{fit_forest, BaggedForest, DataTable, ForestParams, LinearSimulation};

/// Simulated plane data with the response column removed, plus the response
/// table itself for fitting.
pub fn simulated(n: usize, seed: u64) -> (DataTable, DataTable) {
    let data = LinearSimulation {
        n,
        seed,
        ..Default::default()
    }
    .generate()
    .expect("valid simulation");
    let features = data.without("y").expect("y column");
    (data, features)
}

pub fn forest(data: &DataTable, trees: usize, seed: u64) -> BaggedForest {
    let params = ForestParams {
        trees,
        seed,
        ..ForestParams::default()
    };
    fit_forest(data, "y", &params).expect("forest fits")
}
