//! Seeded random vectors on spheres and in balls of the discrete spaces.
//! Everything here is deterministic given the RNG stream, which is what the
//! byte-identical-output contract of the CLI relies on.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hilbert::{HilbertVector, Norm, SpaceTag};

/// Standard-normal coefficient vector in the given space.
pub fn gaussian_vector(space: &SpaceTag, rng: &mut ChaCha8Rng) -> HilbertVector {
    let coeffs = (0..space.dim())
        .map(|_| {
            // Box-Muller; two uniforms per normal keeps the stream simple
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect();
    HilbertVector::new(*space, coeffs).expect("gaussian draw is finite")
}

/// Random vector with unit norm of the requested kind.
pub fn unit_vector(space: &SpaceTag, norm: Norm, rng: &mut ChaCha8Rng) -> Result<HilbertVector> {
    loop {
        let v = gaussian_vector(space, rng);
        let n = v.norm(norm)?;
        if n > 1e-300 {
            return Ok(v.scaled(1.0 / n));
        }
    }
}

/// Random vector with norm at most `radius` (radius scaled uniformly).
pub fn ball_vector(
    space: &SpaceTag,
    norm: Norm,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Result<HilbertVector> {
    let r: f64 = rng.gen_range(0.0..=1.0);
    Ok(unit_vector(space, norm, rng)?.scaled(r * radius))
}

/// Smooth low-frequency grid sample, normalized to the unit sphere of `norm`.
/// Useful when rough white-noise draws would under-exercise a smoothing
/// operator.
pub fn smooth_unit_vector(
    space: &SpaceTag,
    norm: Norm,
    rng: &mut ChaCha8Rng,
) -> Result<HilbertVector> {
    let grid = match space.grid() {
        Some(g) => *g,
        None => return unit_vector(space, norm, rng),
    };
    let a: [f64; 4] = [
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    ];
    let k: [f64; 3] = [
        rng.gen_range(0.5..3.0),
        rng.gen_range(0.5..3.0),
        rng.gen_range(0.5..3.0),
    ];
    let v = HilbertVector::sample(grid, |p| {
        a[0] + a[1] * (k[0] * p[0]).sin()
            + a[2] * (k[1] * p[1]).cos()
            + a[3] * (k[2] * (p[0] + p[1] + p[2])).sin()
    })?;
    let n = v.norm(norm)?;
    if n > 1e-300 {
        Ok(v.scaled(1.0 / n))
    } else {
        unit_vector(space, norm, rng)
    }
}
