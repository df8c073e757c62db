//! Singular value decomposition of the MSR matrix and projections onto its
//! signal and noise subspaces.

use nalgebra::{DMatrix, DVector};

use crate::synth::MsrMatrix;
use crate::{Error, Result, C64};

/// Default relative threshold for signal-dimension selection.
pub const DEFAULT_TAU: f64 = 0.01;

/// Full SVD `K = U diag(sigma) V^*` with a chosen signal dimension.
///
/// Singular values are sorted in descending order. Each left singular vector
/// is rotated so that its largest-magnitude entry is real and positive; the
/// matching right vector receives the same phase so the factorization holds.
#[derive(Debug, Clone)]
pub struct SubspaceDecomposition {
    singular_values: Vec<f64>,
    u: DMatrix<C64>,
    v_adjoint: DMatrix<C64>,
    signal_dim: usize,
}

/// SVD of an MSR matrix, with the signal dimension chosen by
/// [`estimate_signal_dim`] at [`DEFAULT_TAU`].
pub fn svd(msr: &MsrMatrix) -> Result<SubspaceDecomposition> {
    SubspaceDecomposition::new(&msr.k)
}

impl SubspaceDecomposition {
    pub fn new(k: &DMatrix<C64>) -> Result<Self> {
        if !k.is_square() || k.nrows() == 0 {
            return Err(Error::invalid(format!(
                "expected a non-empty square matrix, got {}x{}",
                k.nrows(),
                k.ncols()
            )));
        }
        if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let n = k.nrows();
        // faer built without rayon: sequential and therefore deterministic
        let a = faer::Mat::<C64>::from_fn(n, n, |i, j| k[(i, j)]);
        let raw = a
            .svd()
            .map_err(|e| Error::Degenerate(format!("svd did not converge: {e:?}")))?;
        let raw_sigma: Vec<f64> = (0..n).map(|i| raw.S()[i].re).collect();
        let raw_u = DMatrix::from_fn(n, n, |i, j| raw.U()[(i, j)]);
        let raw_vt = DMatrix::from_fn(n, n, |i, j| raw.V()[(j, i)].conj());

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| raw_sigma[b].partial_cmp(&raw_sigma[a]).unwrap().then(a.cmp(&b)));

        let mut u = DMatrix::<C64>::zeros(n, n);
        let mut v_adjoint = DMatrix::<C64>::zeros(n, n);
        let mut singular_values = Vec::with_capacity(n);
        for (dst, &src) in order.iter().enumerate() {
            singular_values.push(raw_sigma[src]);
            let col = raw_u.column(src);
            let pivot = col
                .iter()
                .enumerate()
                .fold(
                    (0, -1.0),
                    |best, (i, z)| {
                        if z.norm() > best.1 {
                            (i, z.norm())
                        } else {
                            best
                        }
                    },
                )
                .0;
            let phase = if col[pivot].norm() > 0.0 {
                col[pivot].conj() / col[pivot].norm()
            } else {
                C64::new(1.0, 0.0)
            };
            u.set_column(dst, &(col * phase));
            // K = sum sigma u v^*; u -> u p requires v^* -> conj(p) v^*
            v_adjoint.set_row(dst, &(raw_vt.row(src) * phase.conj()));
        }
        let signal_dim = estimate_signal_dim(&singular_values, DEFAULT_TAU)?;
        Ok(Self {
            singular_values,
            u,
            v_adjoint,
            signal_dim,
        })
    }

    pub fn size(&self) -> usize {
        self.singular_values.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn left_vectors(&self) -> &DMatrix<C64> {
        &self.u
    }

    pub fn right_adjoint(&self) -> &DMatrix<C64> {
        &self.v_adjoint
    }

    pub fn signal_dim(&self) -> usize {
        self.signal_dim
    }

    pub fn with_signal_dim(mut self, dim: usize) -> Result<Self> {
        if dim > self.size() {
            return Err(Error::invalid(format!(
                "signal dimension {dim} exceeds matrix size {}",
                self.size()
            )));
        }
        self.signal_dim = dim;
        Ok(self)
    }

    pub fn with_threshold(self, tau: f64) -> Result<Self> {
        let dim = estimate_signal_dim(&self.singular_values, tau)?;
        self.with_signal_dim(dim)
    }

    /// `||K - U S V^*||`.
    pub fn reconstruction_residual(&self, k: &DMatrix<C64>) -> f64 {
        let sigma = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
            self.size(),
            self.singular_values.iter().map(|&s| C64::from(s)),
        ));
        (k - &self.u * sigma * &self.v_adjoint).norm()
    }

    /// `max(||U^* U - I||, ||V^* V - I||)`, Frobenius.
    pub fn orthonormality_defect(&self) -> f64 {
        let eye = DMatrix::<C64>::identity(self.size(), self.size());
        let du = (self.u.adjoint() * &self.u - &eye).norm();
        let dv = (&self.v_adjoint * self.v_adjoint.adjoint() - &eye).norm();
        du.max(dv)
    }

    fn check_len(&self, f: &DVector<C64>) -> Result<()> {
        if f.len() != self.size() {
            return Err(Error::invalid(format!(
                "vector of length {} for a {}-dimensional decomposition",
                f.len(),
                self.size()
            )));
        }
        Ok(())
    }

    /// `sum_{m <= dim} |U_m^* f|^2`, unchecked length.
    pub(crate) fn signal_energy_unchecked(&self, f: &DVector<C64>) -> f64 {
        (0..self.signal_dim).map(|m| self.u.column(m).dotc(f).norm_sqr()).sum()
    }

    pub fn signal_energy(&self, f: &DVector<C64>) -> Result<f64> {
        self.check_len(f)?;
        Ok(self.signal_energy_unchecked(f))
    }

    /// `|(I - sum_{m <= dim} U_m U_m^*) f|`, evaluated in factored form as
    /// `sqrt(||f||^2 - sum |U_m^* f|^2)` and clamped at zero.
    pub fn noise_projection_norm(&self, f: &DVector<C64>) -> Result<f64> {
        self.check_len(f)?;
        Ok(self.noise_norm_unchecked(f))
    }

    pub(crate) fn noise_norm_unchecked(&self, f: &DVector<C64>) -> f64 {
        (f.norm_squared() - self.signal_energy_unchecked(f)).max(0.0).sqrt()
    }

    /// Explicit noise-subspace projector `I - U_s U_s^*`.
    pub fn noise_projector(&self) -> DMatrix<C64> {
        let n = self.size();
        let signal = self.u.columns(0, self.signal_dim);
        DMatrix::<C64>::identity(n, n) - signal * signal.adjoint()
    }
}

/// Number of singular values with `sigma_m >= tau * sigma_1`; zero for an
/// all-zero spectrum. `sigma` must be in descending order.
pub fn estimate_signal_dim(sigma: &[f64], tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("threshold must lie in (0, 1), got {tau}")));
    }
    if sigma.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::invalid("singular values must be non-negative"));
    }
    if sigma.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::invalid("singular values are not sorted in descending order"));
    }
    let Some(&largest) = sigma.first() else {
        return Ok(0);
    };
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(sigma.iter().take_while(|&&s| s >= tau * largest).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let dec = SubspaceDecomposition::new(&DMatrix::identity(4, 4)).unwrap();
        for s in dec.singular_values() {
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert_eq!(dec.signal_dim(), 4);
    }

    #[test]
    fn rejects_non_finite() {
        let mut k = DMatrix::<C64>::identity(3, 3);
        k[(1, 2)] = C64::new(f64::NAN, 0.0);
        assert!(SubspaceDecomposition::new(&k).is_err());
    }

    #[test]
    fn threshold_rule() {
        assert_eq!(estimate_signal_dim(&[10.0, 9.0, 8.0, 1e-8], 0.01).unwrap(), 3);
        assert_eq!(estimate_signal_dim(&[5.0, 0.0, 0.0, 0.0], 0.5).unwrap(), 1);
        assert_eq!(estimate_signal_dim(&[0.0, 0.0], 0.5).unwrap(), 0);
        assert!(estimate_signal_dim(&[1.0, 2.0], 0.5).is_err());
        assert!(estimate_signal_dim(&[2.0, 1.0], 1.5).is_err());
    }

    #[test]
    fn phase_convention() {
        let k = DMatrix::from_fn(5, 5, |i, j| C64::new((i + 2 * j) as f64, (i * j) as f64 - 3.0));
        let dec = SubspaceDecomposition::new(&k).unwrap();
        for col in dec.left_vectors().column_iter() {
            let big = col
                .iter()
                .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
                .unwrap();
            assert!(big.im.abs() < 1e-14 && big.re > 0.0);
        }
        assert!(dec.reconstruction_residual(&k) < 1e-12 * dec.singular_values()[0]);
    }

    #[test]
    fn projection_edge_cases() {
        let k = DMatrix::from_fn(4, 4, |i, j| C64::new(1.0 / (1 + i + j) as f64, 0.0));
        let dec = SubspaceDecomposition::new(&k).unwrap().with_signal_dim(2).unwrap();
        let u1 = dec.left_vectors().column(0).into_owned();
        assert!(dec.noise_projection_norm(&u1).unwrap() < 1e-10);
        let u3 = dec.left_vectors().column(2).into_owned();
        assert!((dec.noise_projection_norm(&u3).unwrap() - 1.0).abs() < 1e-10);
        let empty = dec.clone().with_signal_dim(0).unwrap();
        let f = DVector::from_element(4, C64::new(0.5, 0.5));
        assert!((empty.noise_projection_norm(&f).unwrap() - f.norm()).abs() < 1e-15);
        assert!(dec.noise_projection_norm(&DVector::zeros(3)).is_err());
        assert!(dec.clone().with_signal_dim(5).is_err());
    }
}
