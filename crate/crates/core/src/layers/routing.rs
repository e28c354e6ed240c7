/// Bang-bang routing: full rate on positive backpressure weight
/// `mu_i - mu_j - ell`, zero otherwise (including exact ties).
#[inline]
pub fn routing_optimal(mu_i: f64, mu_j: f64, ell: f64, r_max: f64) -> f64 {
    if mu_i - mu_j - ell > 0.0 {
        r_max
    } else {
        0.0
    }
}
