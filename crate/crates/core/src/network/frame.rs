use crate::linalg::Mat;

/// Rotation taking local dq coordinates at angle `delta` into the common frame.
pub fn frame_rotation(delta: f64) -> Mat {
    let (s, c) = delta.sin_cos();
    Mat::from_rows(&[&[c, -s], &[s, c]])
}

/// Derivative of [`frame_rotation`] with respect to `delta`.
pub fn frame_rotation_derivative(delta: f64) -> Mat {
    let (s, c) = delta.sin_cos();
    Mat::from_rows(&[&[-s, -c], &[c, -s]])
}

/// `(T(δ0), dT/dδ(δ0))`, the pieces of the linearized rotation
/// `ΔX = T Δx + T' x0 Δδ`.
pub fn linearized_rotation(delta0: f64) -> (Mat, Mat) {
    (frame_rotation(delta0), frame_rotation_derivative(delta0))
}
