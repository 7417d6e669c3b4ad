use crate::error::{Error, Result};

/// Natural log of the Gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(libm::lgamma(x))
}

/// `ln B(x, y) = ln Γ(x) + ln Γ(y) - ln Γ(x + y)`.
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) || !(y > 0.0) {
        return Err(Error::Domain(format!(
            "log_beta requires positive arguments, got ({x}, {y})"
        )));
    }
    Ok(ln_gamma(x)? + ln_gamma(y)? - ln_gamma(x + y)?)
}
