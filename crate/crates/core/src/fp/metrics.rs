//! Quality metrics against a reference result.

use crate::error::{Error, Result};
use crate::image::{FlowField, Image2D};

/// Peak signal-to-noise ratio in dB. Identical images yield `f64::INFINITY`.
pub fn psnr(reference: &Image2D, test: &Image2D, peak: f64) -> Result<f64> {
    reference.check_extent(test)?;
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::input(format!(
            "PSNR peak must be positive, got {peak}"
        )));
    }
    let sse: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(r, t)| (r - t) * (r - t))
        .sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse / reference.len() as f64;
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Average endpoint error: mean Euclidean distance between flow vectors.
pub fn aee(reference: &FlowField, test: &FlowField) -> Result<f64> {
    reference.u.check_extent(&test.u)?;
    let total: f64 = reference
        .u
        .data()
        .iter()
        .zip(reference.v.data())
        .zip(test.u.data().iter().zip(test.v.data()))
        .map(|((ru, rv), (tu, tv))| (ru - tu).hypot(rv - tv))
        .sum();
    Ok(total / reference.u.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_values() {
        let zero = Image2D::zeros(4, 3);
        let tenth = Image2D::filled(4, 3, 0.1);
        assert_eq!(psnr(&zero, &zero, 1.0).unwrap(), f64::INFINITY);
        assert!((psnr(&zero, &tenth, 1.0).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(
            psnr(&zero, &tenth, 1.0).unwrap(),
            psnr(&tenth, &zero, 1.0).unwrap()
        );
        assert!(psnr(&zero, &Image2D::zeros(3, 4), 1.0).is_err());
        assert!(psnr(&zero, &tenth, 0.0).is_err());
    }

    #[test]
    fn aee_values() {
        let zero = FlowField::new(Image2D::zeros(3, 2), Image2D::zeros(3, 2)).unwrap();
        let shifted =
            FlowField::new(Image2D::filled(3, 2, 0.3), Image2D::filled(3, 2, 0.4)).unwrap();
        assert_eq!(aee(&zero, &zero).unwrap(), 0.0);
        assert!((aee(&zero, &shifted).unwrap() - 0.5).abs() < 1e-15);
        let small = FlowField::new(Image2D::zeros(2, 2), Image2D::zeros(2, 2)).unwrap();
        assert!(aee(&zero, &small).is_err());
    }
}
