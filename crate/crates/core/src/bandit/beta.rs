//! Gamma and Beta variates.
//!
//! Gamma(shape, 1) uses the Marsaglia-Tsang squeeze method; shapes below one
//! are boosted through Gamma(a) = Gamma(a + 1) * U^(1/a). A Beta(a, b) variate
//! is G1 / (G1 + G2). The method stays well conditioned for the very large
//! second shape the rareness correction produces (alpha squared, up to ~1e12).

use rand::Rng;
use rand_distr::StandardNormal;

/// One Gamma(shape, 1) variate. `shape` must be finite and positive.
pub fn gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0 && shape.is_finite(), "bad gamma shape {shape}");
    if shape < 1.0 {
        // U in (0, 1] so the power never collapses to zero for tiny shapes.
        let u: f64 = 1.0 - rng.random::<f64>();
        return gamma_variate(shape + 1.0, rng) * u.powf(1.0 / shape);
    }

    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// One Beta(a, b) variate in [0, 1].
pub fn beta_variate<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x = gamma_variate(a, rng);
    let y = gamma_variate(b, rng);
    x / (x + y)
}
