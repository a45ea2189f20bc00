//! Fixtures shared by the kernel benchmarks.

use kslab_core::{Field, Grid, Parameters, State};

/// A smooth, nonuniform state with a signal gradient everywhere.
pub fn bumpy_state(g: &Grid) -> State {
    let u = Field::from_fn(g, |c| 1.0 + 0.5 * c.iter().map(|x| (6.0 * x).cos()).product::<f64>());
    let v = Field::from_fn(g, |c| (-8.0 * c.iter().map(|x| (x - 0.3) * (x - 0.3)).sum::<f64>()).exp());
    State::new(u, v, 0.0).expect("fields share a grid")
}

pub fn params(dim: usize) -> Parameters {
    Parameters::new(5.0, 1.0, 1.0, 0.01, dim).expect("valid parameters")
}
