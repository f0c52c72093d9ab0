//! Linearisation and eigenvalues of the three-volume system.
//!
//! The Jacobian is taken by central differences so every control law is
//! handled the same way. Its eigenvalues are the roots of the characteristic
//! cubic, found by reducing to depressed form and taking the trigonometric
//! branch (three real roots) or Cardano's formula (one real root and a
//! conjugate pair) according to the discriminant.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::Serialize;

use crate::control::ControlVariant;
use crate::equilibrium::{solve_equilibrium, EquilibriumResult};
use crate::error::{ModelError, Result};
use crate::model::{rhs, VolumeState};
use crate::params::CardioParams;

/// Relative size of `|Δ|` below which the discriminant counts as zero.
pub const DEGENERATE_DISCRIMINANT: f64 = 1e-12;

/// Relative finite-difference step, `h = FD_STEP·max(1, |x|)`.
pub const FD_STEP: f64 = 1e-6;

/// Row-major 3×3 matrix, entries in 1/min.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Index<(usize, usize)> for Matrix3 {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Matrix3 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.0[r][c]
    }
}

impl Matrix3 {
    pub fn zeros() -> Self {
        Matrix3([[0.0; 3]; 3])
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Matrix3(rows)
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        let mut m = Self::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// Sum of the principal 2×2 minors.
    pub fn second_invariant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// `(a, b, c)` of the monic characteristic polynomial `λ³ + aλ² + bλ + c`.
    pub fn characteristic(&self) -> [f64; 3] {
        [-self.trace(), self.second_invariant(), -self.determinant()]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Solves `self · x = rhs` by Gaussian elimination with partial pivoting.
    ///
    /// Rows are equilibrated first. Only an exactly zero pivot or a
    /// non-finite solution counts as singular; ill-conditioned steps are left
    /// for the caller's line search to accept or reject.
    pub fn solve(&self, rhs: [f64; 3]) -> Result<[f64; 3]> {
        if !self.is_finite() || rhs.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::SingularJacobian);
        }
        let mut a = self.0;
        let mut b = rhs;
        for (row, bi) in a.iter_mut().zip(b.iter_mut()) {
            let m = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m == 0.0 {
                return Err(ModelError::SingularJacobian);
            }
            row.iter_mut().for_each(|v| *v /= m);
            *bi /= m;
        }
        for col in 0..3 {
            let pivot = (col..3)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap_or(col);
            if a[pivot][col] == 0.0 {
                return Err(ModelError::SingularJacobian);
            }
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..3 {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = [0.0; 3];
        for row in (0..3).rev() {
            let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
            x[row] = (b[row] - s) / a[row][row];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::SingularJacobian);
        }
        Ok(x)
    }
}

impl fmt::Display for Matrix3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            writeln!(f, "[{:>14.6} {:>14.6} {:>14.6}]", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    ThreeReal,
    OneRealPlusPair,
}

/// Complex pair `re ± i·im` with `im > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugatePair {
    pub re: f64,
    pub im: f64,
}

/// Eigenvalues of a real 3×3 matrix.
///
/// With a conjugate pair the order is `[real, re + iω, re − iω]`; otherwise
/// the three real roots in descending order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectrum {
    #[serde(skip)]
    pub eigenvalues: [Complex64; 3],
    pub kind: SpectrumKind,
    /// Discriminant was numerically zero (repeated roots).
    pub degenerate: bool,
    /// Characteristic coefficients `(a, b, c)` the roots were computed from.
    pub coefficients: [f64; 3],
}

impl Spectrum {
    pub fn pair(&self) -> Option<ConjugatePair> {
        match self.kind {
            SpectrumKind::OneRealPlusPair => Some(ConjugatePair {
                re: self.eigenvalues[1].re,
                im: self.eigenvalues[1].im.abs(),
            }),
            SpectrumKind::ThreeReal => None,
        }
    }

    pub fn pair_real_part(&self) -> Option<f64> {
        self.pair().map(|p| p.re)
    }

    /// ω ≥ 0 of the conjugate pair.
    pub fn pair_imag_part(&self) -> Option<f64> {
        self.pair().map(|p| p.im)
    }

    /// The lone real eigenvalue, or the largest of three real ones.
    pub fn real_eigenvalue(&self) -> f64 {
        self.eigenvalues[0].re
    }

    pub fn real_parts(&self) -> [f64; 3] {
        self.eigenvalues.map(|z| z.re)
    }

    pub fn max_real_part(&self) -> f64 {
        self.real_parts().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_asymptotically_stable(&self) -> bool {
        self.max_real_part() < 0.0
    }

    /// `|p(λ)| / max(1, |λ|³)` for each eigenvalue.
    pub fn scaled_residuals(&self) -> [f64; 3] {
        self.eigenvalues
            .map(|z| charpoly(self.coefficients, z).norm() / z.norm().powi(3).max(1.0))
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pair() {
            Some(p) => write!(
                f,
                "real={:.10} pair={:.10}±{:.10}i",
                self.real_eigenvalue(),
                p.re,
                p.im
            ),
            None => {
                let r = self.real_parts();
                write!(f, "three-real {:.10} {:.10} {:.10}", r[0], r[1], r[2])?;
                if self.degenerate {
                    write!(f, " (degenerate)")?;
                }
                Ok(())
            }
        }
    }
}

fn charpoly(c: [f64; 3], z: Complex64) -> Complex64 {
    ((z + c[0]) * z + c[1]) * z + c[2]
}

fn charpoly_derivative(c: [f64; 3], z: Complex64) -> Complex64 {
    (3.0 * z + 2.0 * c[0]) * z + c[1]
}

/// A couple of Newton steps on the characteristic polynomial, kept only
/// while they reduce the residual.
fn polish(c: [f64; 3], mut z: Complex64) -> Complex64 {
    for _ in 0..3 {
        let p = charpoly(c, z);
        let dp = charpoly_derivative(c, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !(charpoly(c, next).norm() < p.norm()) {
            break;
        }
        z = next;
    }
    z
}

/// Eigenvalues of a real 3×3 matrix through its characteristic cubic.
pub fn eig3(m: &Matrix3) -> Result<Spectrum> {
    if !m.is_finite() {
        return Err(ModelError::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    let coefficients = m.characteristic();
    let [a, b, c] = coefficients;

    // λ = t − a/3 turns the cubic into t³ + p·t + q.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;

    let half_q_sq = (q / 2.0) * (q / 2.0);
    let third_p_cu = (p / 3.0).powi(3);
    let disc = half_q_sq + third_p_cu;
    let disc_scale = half_q_sq + third_p_cu.abs();
    let degenerate = disc_scale == 0.0 || disc.abs() <= DEGENERATE_DISCRIMINANT * disc_scale;

    if disc > 0.0 && !degenerate {
        let s = disc.sqrt();
        let sign = if q >= 0.0 { 1.0 } else { -1.0 };
        let u = -sign * (q.abs() / 2.0 + s).cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let real = polish(coefficients, Complex64::new(u + v - shift, 0.0)).re;
        let upper = polish(
            coefficients,
            Complex64::new(-(u + v) / 2.0 - shift, (3.0f64.sqrt() / 2.0 * (u - v)).abs()),
        );
        let upper = Complex64::new(upper.re, upper.im.abs());
        return Ok(Spectrum {
            eigenvalues: [Complex64::new(real, 0.0), upper, upper.conj()],
            kind: SpectrumKind::OneRealPlusPair,
            degenerate: false,
            coefficients,
        });
    }

    let mut roots = if p < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        [0.0, 1.0, 2.0].map(|k| r * (phi - 2.0 * PI * k / 3.0).cos() - shift)
    } else {
        // p ≈ 0 ≈ q: triple root.
        let t = (-q).cbrt();
        [t - shift; 3]
    };
    for root in roots.iter_mut() {
        *root = polish(coefficients, Complex64::new(*root, 0.0)).re;
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    Ok(Spectrum {
        eigenvalues: roots.map(|r| Complex64::new(r, 0.0)),
        kind: SpectrumKind::ThreeReal,
        degenerate,
        coefficients,
    })
}

/// Central-difference Jacobian of the vector field at `state`.
///
/// A probe outside the admissible region shrinks its step tenfold once; if
/// that still leaves the region the call fails.
pub fn jacobian_fd(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    state: &VolumeState,
) -> Result<Matrix3> {
    if !state.is_admissible(params) {
        return Err(ModelError::Domain(format!(
            "Jacobian requested outside the admissible domain at {state:?}"
        )));
    }
    let x = state.to_array();
    let mut jac = Matrix3::zeros();
    for col in 0..3 {
        let mut h = FD_STEP * x[col].abs().max(1.0);
        let mut column = None;
        for _attempt in 0..2 {
            let mut plus = x;
            let mut minus = x;
            plus[col] += h;
            minus[col] -= h;
            let (plus, minus) = (VolumeState::from_array(plus), VolumeState::from_array(minus));
            if plus.is_admissible(params) && minus.is_admissible(params) {
                if let (Ok(fp), Ok(fm)) = (
                    rhs(params, variant, mu, &plus),
                    rhs(params, variant, mu, &minus),
                ) {
                    let (fp, fm) = (fp.to_array(), fm.to_array());
                    column = Some([0, 1, 2].map(|r| (fp[r] - fm[r]) / (2.0 * h)));
                    break;
                }
            }
            h /= 10.0;
        }
        let column = column.ok_or_else(|| {
            ModelError::Domain(format!(
                "finite-difference probe in component {col} left the admissible domain at {state:?}"
            ))
        })?;
        for row in 0..3 {
            jac[(row, col)] = column[row];
        }
    }
    if !jac.is_finite() {
        return Err(ModelError::Domain(format!(
            "non-finite Jacobian at {state:?}"
        )));
    }
    Ok(jac)
}

/// Equilibrium, its Jacobian and the spectrum, computed together.
#[derive(Debug, Clone, Copy)]
pub struct EquilibriumAnalysis {
    pub equilibrium: EquilibriumResult,
    pub jacobian: Matrix3,
    pub spectrum: Spectrum,
}

pub fn analyze_equilibrium(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    guess: VolumeState,
) -> Result<EquilibriumAnalysis> {
    let equilibrium = solve_equilibrium(params, variant, mu, guess)?;
    let jacobian = jacobian_fd(params, variant, mu, &equilibrium.state)?;
    let spectrum = eig3(&jacobian)?;
    Ok(EquilibriumAnalysis {
        equilibrium,
        jacobian,
        spectrum,
    })
}

/// Spectrum of the linearisation at the equilibrium reached from the resting
/// state.
pub fn classify_at_equilibrium(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
) -> Result<Spectrum> {
    analyze_equilibrium(params, variant, mu, VolumeState::RESTING).map(|a| a.spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(s: &Spectrum) -> Vec<f64> {
        let mut v = s.real_parts().to_vec();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn diagonal_matrix() {
        let s = eig3(&Matrix3::diagonal([-1.0, -2.0, -3.0])).unwrap();
        assert_eq!(s.kind, SpectrumKind::ThreeReal);
        for (got, want) in sorted_re(&s).iter().zip([-3.0, -2.0, -1.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(s.eigenvalues.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn rotation_block() {
        let m = Matrix3::from_rows([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
        let s = eig3(&m).unwrap();
        let pair = s.pair().unwrap();
        assert!(pair.re.abs() < 1e-14);
        assert!((pair.im - 1.0).abs() < 1e-14);
        assert!((s.real_eigenvalue() + 1.0).abs() < 1e-14);
        assert_eq!(s.eigenvalues[2], s.eigenvalues[1].conj());
    }

    #[test]
    fn repeated_roots_are_flagged() {
        let s = eig3(&Matrix3::diagonal([-2.0, -2.0, -5.0])).unwrap();
        assert_eq!(s.kind, SpectrumKind::ThreeReal);
        assert!(s.degenerate);
        let r = sorted_re(&s);
        assert!((r[0] + 5.0).abs() < 1e-9);
        assert!((r[1] + 2.0).abs() < 1e-6 && (r[2] + 2.0).abs() < 1e-6);

        let s = eig3(&Matrix3::diagonal([4.0, 4.0, 4.0])).unwrap();
        assert!(s.degenerate);
        assert!(s.real_parts().iter().all(|x| (x - 4.0).abs() < 1e-9));

        let s = eig3(&Matrix3::zeros()).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.real_parts(), [0.0; 3]);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut m = Matrix3::zeros();
        m[(1, 2)] = f64::NAN;
        assert!(eig3(&m).is_err());
    }

    #[test]
    fn solve_recovers_known_vector() {
        let m = Matrix3::from_rows([[0.0, 2.0, 1.0], [1.0, -1.0, 0.0], [3.0, 0.5, 4.0]]);
        let x = [0.25, -1.5, 2.0];
        let b = [0, 1, 2].map(|r| (0..3).map(|c| m[(r, c)] * x[c]).sum::<f64>());
        let got = m.solve(b).unwrap();
        for i in 0..3 {
            assert!((got[i] - x[i]).abs() < 1e-14);
        }
        let singular = Matrix3::from_rows([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]]);
        assert_eq!(singular.solve([1.0, 1.0, 1.0]), Err(ModelError::SingularJacobian));
    }

    #[test]
    fn jacobian_fails_outside_domain() {
        let p = CardioParams::default();
        let v = ControlVariant::unstressed_volume(4.0, 0.0).unwrap();
        let s = VolumeState::new(-0.1, 3.5, 0.4);
        assert!(matches!(jacobian_fd(&p, &v, 18.0, &s), Err(ModelError::Domain(_))));
        // v_sa within one step of zero: the shrunken probe still fails.
        let s = VolumeState::new(1e-9, 3.5, 0.4);
        assert!(matches!(jacobian_fd(&p, &v, 18.0, &s), Err(ModelError::Domain(_))));
        // Shrinking once is enough here.
        let s = VolumeState::new(5e-7, 3.5, 0.4);
        assert!(jacobian_fd(&p, &ControlVariant::linear(), 1.0, &s).is_ok());
    }
}
