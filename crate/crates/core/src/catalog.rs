//! Reference generators used throughout the examples and tests.

use nalgebra::DMatrix;

use crate::model::GeneratorMatrix;

/// Symmetric 4-state signed-Laplacian generator with spectrum {0, -2, -4, -8}
/// whose forward propagator turns strictly positive only after a delay
/// (τ ≈ 0.17).
pub fn example1() -> GeneratorMatrix {
    let integer = [
        [-7.0, -1.0, 2.0, 6.0],
        [-1.0, -7.0, 2.0, 6.0],
        [2.0, 2.0, -10.0, 6.0],
        [6.0, 6.0, 6.0, -18.0],
    ];
    let rows: Vec<Vec<f64>> = integer
        .iter()
        .map(|row| row.iter().map(|x| x / 3.0).collect())
        .collect();
    GeneratorMatrix::from_rows(&rows).expect("example 1 is a valid generator")
}

/// Antisymmetric 3-state generator: a rotation about the all-ones axis with
/// angular speed √3. Its forward propagator is never strictly positive.
pub fn example2() -> GeneratorMatrix {
    GeneratorMatrix::from_rows(&[[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]])
        .expect("example 2 is a valid generator")
}

/// Generator `-L` of the unsigned Laplacian of the 3-cycle with unit
/// weights. Classical dynamics: the forward propagator is strictly positive
/// for every `t > 0`.
pub fn three_cycle() -> GeneratorMatrix {
    GeneratorMatrix::from_rows(&[[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]])
        .expect("3-cycle generator is valid")
}

/// Generator of the symmetric 2-state chain with rate `a`.
pub fn two_state(a: f64) -> GeneratorMatrix {
    GeneratorMatrix::from_rows(&[[-a, a], [a, -a]]).expect("2-state generator is valid")
}

/// `1·1^T/n - I`: symmetric, zero row sums, spectrum {0, -1, ..., -1}.
pub fn rank_one_minus_identity(n: usize) -> GeneratorMatrix {
    let m = DMatrix::from_element(n, n, 1.0 / n as f64) - DMatrix::identity(n, n);
    GeneratorMatrix::from_matrix(m).expect("n >= 2")
}
