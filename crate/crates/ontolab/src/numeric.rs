//! Small numeric helpers shared across modules.

/// Kahan compensated summation. Keeps normalization checks meaningful on
/// product spaces with up to ~10⁶ terms, where naive summation error would
/// exceed the 1e-12 tolerances.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
