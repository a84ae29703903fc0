//! Built-in convolution kernels `k(z) = z + k_2 z^2 + ...`.

use num_complex::Complex64;

use crate::series::{NormalizedFunction, TruncatedSeries, DEFAULT_ORDER};

/// Kernel order that covers a sampled `Phi` of the default order: the
/// ratio construction needs `k_{N+1}`.
pub const KERNEL_ORDER: usize = DEFAULT_ORDER + 1;

fn from_coeff_fn(order: usize, coeff: impl Fn(usize) -> f64) -> NormalizedFunction {
    let order = order.max(1);
    let coeffs = (0..=order)
        .map(|n| Complex64::new(if n == 0 { 0.0 } else { coeff(n) }, 0.0))
        .collect();
    let series = TruncatedSeries::new(coeffs).expect("finite kernel coefficients");
    NormalizedFunction::new(series).expect("kernel is normalized")
}

/// Koebe function `z/(1-z)^2`, `k_n = n`.
pub fn koebe(order: usize) -> NormalizedFunction {
    from_coeff_fn(order, |n| n as f64)
}

/// Half-plane map `z/(1-z)`, `k_n = 1`. Identity for the Hadamard product on A.
pub fn halfplane(order: usize) -> NormalizedFunction {
    from_coeff_fn(order, |_| 1.0)
}

/// `-log(1-z)`, `k_n = 1/n`.
pub fn log(order: usize) -> NormalizedFunction {
    from_coeff_fn(order, |n| 1.0 / n as f64)
}
