use crate::error::{Error, Result};

fn check(psi_hat: &[f64], psi0: &[f64], n: usize) -> Result<()> {
    if psi_hat.len() != psi0.len() {
        return Err(Error::LengthMismatch {
            expected: psi_hat.len(),
            found: psi0.len(),
        });
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    Ok(())
}

/// Unstandardized difference statistics `sqrt(n) * (psi_hat - psi0)`.
pub fn difference_statistics(psi_hat: &[f64], psi0: &[f64], n: usize) -> Result<Vec<f64>> {
    check(psi_hat, psi0, n)?;
    let root_n = (n as f64).sqrt();
    Ok(psi_hat.iter().zip(psi0).map(|(p, p0)| root_n * (p - p0)).collect())
}

/// Standardized statistics `sqrt(n) * (psi_hat - psi0) / sigma`, where
/// `sigma[m]` is the estimated standard deviation of `sqrt(n) * psi_hat[m]`.
pub fn t_statistics(psi_hat: &[f64], psi0: &[f64], sigma: &[f64], n: usize) -> Result<Vec<f64>> {
    check(psi_hat, psi0, n)?;
    if sigma.len() != psi_hat.len() {
        return Err(Error::LengthMismatch {
            expected: psi_hat.len(),
            found: sigma.len(),
        });
    }
    if let Some(m) = sigma.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::ZeroStandardError(m));
    }
    let root_n = (n as f64).sqrt();
    Ok(psi_hat
        .iter()
        .zip(psi0)
        .zip(sigma)
        .map(|((p, p0), s)| root_n * (p - p0) / s)
        .collect())
}
