//! Log-log least-squares rate fitting for parameter sweeps.

use crate::error::{Error, Result};

/// Ordinary least squares of log(value) against log(eps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Fit a power law value ~ C * eps^slope from (eps, value) pairs.
/// Only strictly positive values enter the fit; fewer than 3 of them is an
/// error (`NoFit`).
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    let logs: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(e, v)| *e > 0.0 && *v > 0.0)
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    let n = logs.len();
    if n < 3 {
        return Err(Error::NoFit { positive: n });
    }
    let nf = n as f64;
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / nf;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput(
            "rate fit needs at least two distinct epsilon values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|(x, y)| {
            let p = intercept + slope * x;
            (y - p) * (y - p)
        })
        .sum();
    let ss_tot: f64 = logs.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-28 {
        1.0
    } else {
        0.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points_used: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_power_law() {
        let pairs: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let e = 10f64.powf(-4.0 + 3.0 * i as f64 / 7.0);
                (e, 3.0 * e)
            })
            .collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope - 1.0).abs() <= 1e-12);
        assert!((fit.r_squared - 1.0).abs() <= 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() <= 1e-12);
        assert_eq!(fit.points_used, 8);
    }

    #[test]
    fn exact_two_thirds_power_law() {
        let pairs: Vec<(f64, f64)> = (0..6)
            .map(|i| {
                let e = 10f64.powf(-3.0 + 2.0 * i as f64 / 5.0);
                (e, e.powf(2.0 / 3.0))
            })
            .collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope - 2.0 / 3.0).abs() <= 1e-12);
        assert!((fit.r_squared - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn perturbed_power_law_stays_close() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let truth = 1.4;
        let pairs: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let e = 10f64.powf(-4.0 + 3.0 * i as f64 / 11.0);
                let noise = 1.0 + rng.gen_range(-0.05..0.05);
                (e, 0.7 * e.powf(truth) * noise)
            })
            .collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope - truth).abs() <= 0.1, "slope {}", fit.slope);
    }

    #[test]
    fn too_few_positive_values() {
        let err = fit_rate(&[(1e-2, 0.0), (1e-3, -1.0), (1e-4, 2.0), (1e-5, 3.0)]).unwrap_err();
        match err {
            Error::NoFit { positive } => assert_eq!(positive, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
