use crate::graph::StaticGraph;

use super::Matrix;

pub const FEATURES: usize = 8;

/// Per-vertex input features: weight, neighborhood weight, min and max
/// neighbor weight, degree, and average, min and max neighbor degree.
/// Neighborhood statistics of isolated vertices are 0.
pub fn extract_features(g: &StaticGraph) -> Matrix {
    let mut m = Matrix::zeros(g.n(), FEATURES);
    for v in 0..g.n() {
        let row = m.row_mut(v);
        row[0] = g.weight(v) as f64;
        let nbrs = g.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        let ws = nbrs.iter().map(|&u| g.weight(u));
        let ds = nbrs.iter().map(|&u| g.degree(u));
        row[1] = ws.clone().sum::<i64>() as f64;
        row[2] = ws.clone().min().unwrap() as f64;
        row[3] = ws.max().unwrap() as f64;
        row[4] = nbrs.len() as f64;
        row[5] = ds.clone().sum::<usize>() as f64 / nbrs.len() as f64;
        row[6] = ds.clone().min().unwrap() as f64;
        row[7] = ds.max().unwrap() as f64;
    }
    m
}
