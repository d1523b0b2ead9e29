//! Linear generators acting on the realified state
//! `(rho_00, rho_++, rho_--, Re rho_+-, Im rho_+-)`.
//!
//! Diagonal mode keeps the three populations only. Coherent mode adds the
//! `+-` coherence; the `0+`/`0-` coherences are never sourced by any term of
//! the model and are left out.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::baths::RateSet;
use crate::error::{Error, Result};
use crate::system::{EigenBasis, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Diagonal,
    Coherent,
}

impl Mode {
    pub fn dim(self) -> usize {
        match self {
            Mode::Diagonal => 3,
            Mode::Coherent => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Diagonal => "diagonal",
            Mode::Coherent => "coherent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector {
    pub rho00: f64,
    pub rhopp: f64,
    pub rhomm: f64,
    pub c_re: f64,
    pub c_im: f64,
}

impl StateVector {
    pub const ZERO: StateVector = StateVector {
        rho00: 0.0,
        rhopp: 0.0,
        rhomm: 0.0,
        c_re: 0.0,
        c_im: 0.0,
    };

    pub fn populations(rho00: f64, rhopp: f64, rhomm: f64) -> Self {
        StateVector {
            rho00,
            rhopp,
            rhomm,
            c_re: 0.0,
            c_im: 0.0,
        }
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        StateVector {
            rho00: a[0],
            rhopp: a[1],
            rhomm: a[2],
            c_re: a[3],
            c_im: a[4],
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.rho00, self.rhopp, self.rhomm, self.c_re, self.c_im]
    }

    pub fn population(&self, level: Level) -> f64 {
        match level {
            Level::Plus => self.rhopp,
            Level::Minus => self.rhomm,
        }
    }

    /// `rho_00 + rho_++ + rho_--`
    pub fn trace(&self) -> f64 {
        self.rho00 + self.rhopp + self.rhomm
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// Drops the coherence components.
    pub fn diagonal_part(&self) -> Self {
        Self::populations(self.rho00, self.rhopp, self.rhomm)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        (*self - *other)
            .to_array()
            .iter()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn norm_inf(&self) -> f64 {
        self.max_abs_diff(&StateVector::ZERO)
    }

    /// Full 3x3 density matrix in the `(0, +, -)` eigenbasis.
    pub fn to_density(&self) -> Matrix3<Complex64> {
        let mut m = Matrix3::zeros();
        m[(0, 0)] = Complex64::new(self.rho00, 0.0);
        m[(1, 1)] = Complex64::new(self.rhopp, 0.0);
        m[(2, 2)] = Complex64::new(self.rhomm, 0.0);
        m[(1, 2)] = Complex64::new(self.c_re, self.c_im);
        m[(2, 1)] = Complex64::new(self.c_re, -self.c_im);
        m
    }

    /// Projects a 3x3 operator back onto the tracked sector.
    pub fn from_density(m: &Matrix3<Complex64>) -> Self {
        StateVector {
            rho00: m[(0, 0)].re,
            rhopp: m[(1, 1)].re,
            rhomm: m[(2, 2)].re,
            c_re: m[(1, 2)].re,
            c_im: m[(1, 2)].im,
        }
    }

    fn restrict(&self, mode: Mode) -> Self {
        match mode {
            Mode::Diagonal => self.diagonal_part(),
            Mode::Coherent => *self,
        }
    }
}

impl Add for StateVector {
    type Output = StateVector;
    fn add(self, o: StateVector) -> StateVector {
        StateVector {
            rho00: self.rho00 + o.rho00,
            rhopp: self.rhopp + o.rhopp,
            rhomm: self.rhomm + o.rhomm,
            c_re: self.c_re + o.c_re,
            c_im: self.c_im + o.c_im,
        }
    }
}

impl Sub for StateVector {
    type Output = StateVector;
    fn sub(self, o: StateVector) -> StateVector {
        self + o * -1.0
    }
}

impl Mul<f64> for StateVector {
    type Output = StateVector;
    fn mul(self, k: f64) -> StateVector {
        StateVector {
            rho00: self.rho00 * k,
            rhopp: self.rhopp * k,
            rhomm: self.rhomm * k,
            c_re: self.c_re * k,
            c_im: self.c_im * k,
        }
    }
}

/// Real matrix generator, 3x3 in diagonal mode and 5x5 in coherent mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    mode: Mode,
    matrix: DMatrix<f64>,
}

impl Superoperator {
    pub fn zeros(mode: Mode) -> Self {
        Superoperator {
            mode,
            matrix: DMatrix::zeros(mode.dim(), mode.dim()),
        }
    }

    pub fn from_matrix(mode: Mode, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != mode.dim() || matrix.ncols() != mode.dim() {
            return Err(Error::Contract(format!(
                "{} generator must be {n}x{n}, got {}x{}",
                mode.name(),
                matrix.nrows(),
                matrix.ncols(),
                n = mode.dim()
            )));
        }
        Ok(Superoperator { mode, matrix })
    }

    /// Builds the matrix of a linear map on density matrices restricted to
    /// the tracked sector.
    fn from_map(mode: Mode, f: impl Fn(&Matrix3<Complex64>) -> Matrix3<Complex64>) -> Self {
        let n = mode.dim();
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut unit = [0.0; 5];
            unit[k] = 1.0;
            let image = StateVector::from_density(&f(&StateVector::from_array(unit).to_density()));
            let image = image.to_array();
            for row in 0..n {
                m[(row, k)] = image[row];
            }
        }
        Superoperator { mode, matrix: m }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        // Hot path of every integrator; avoids a heap-allocated vector.
        let n = self.mode.dim();
        let v = state.to_array();
        let mut out = [0.0; 5];
        for (col, x) in self.matrix.as_slice().chunks_exact(n).zip(v) {
            for (o, m) in out.iter_mut().zip(col) {
                *o += m * x;
            }
        }
        StateVector::from_array(out)
    }

    pub fn try_add(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.mode != other.mode {
            return Err(Error::ModeMismatch(self.mode.name(), other.mode.name()));
        }
        Ok(Superoperator {
            mode: self.mode,
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Column sums over the population rows; zero for a trace-preserving
    /// generator.
    pub fn trace_row(&self) -> Vec<f64> {
        (0..self.mode.dim())
            .map(|c| (0..3).map(|r| self.matrix[(r, c)]).sum())
            .collect()
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.matrix
            .clone()
            .complex_eigenvalues()
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Bath dissipator for both baths in the eigenbasis.
///
/// Coherent mode couples the populations to `Re rho_+-` with weights
/// `sin(2 theta) / 4` times the bare rates; bath L enters with a minus sign
/// and bath R with a plus sign, and the coherence is damped at half the sum
/// of all downward rates.
pub fn bath_generator(
    left: &RateSet,
    right: &RateSet,
    eigen: &EigenBasis,
    mode: Mode,
) -> Superoperator {
    let n = mode.dim();
    let mut m = DMatrix::zeros(n, n);
    let q = 0.25 * eigen.sin_2theta();
    for (rates, sign) in [(left, -1.0), (right, 1.0)] {
        let (p, mi) = (&rates.plus, &rates.minus);
        m[(0, 0)] -= p.up + mi.up;
        m[(0, 1)] += p.down;
        m[(0, 2)] += mi.down;
        m[(1, 0)] += p.up;
        m[(1, 1)] -= p.down;
        m[(2, 0)] += mi.up;
        m[(2, 2)] -= mi.down;
        if mode == Mode::Coherent {
            // (rho_+- + rho_-+) = 2 Re rho_+-
            m[(0, 3)] += 2.0 * q * sign * (p.down_bare + mi.down_bare);
            m[(1, 3)] -= 2.0 * q * sign * mi.down_bare;
            m[(2, 3)] -= 2.0 * q * sign * p.down_bare;

            m[(3, 0)] += q * sign * (p.up_bare + mi.up_bare);
            m[(3, 1)] -= q * sign * p.down_bare;
            m[(3, 2)] -= q * sign * mi.down_bare;
            let damping = 0.5 * (p.down + mi.down);
            m[(3, 3)] -= damping;
            m[(4, 4)] -= damping;
        }
    }
    Superoperator { mode, matrix: m }
}

/// Monitored observable `X = |R><R|` in the `(0, +, -)` basis.
pub fn measured_projector(eigen: &EigenBasis) -> Matrix3<Complex64> {
    let (s, c) = (eigen.sin_theta, eigen.cos_theta);
    let mut x = Matrix3::zeros();
    x[(1, 1)] = Complex64::new(s * s, 0.0);
    x[(2, 2)] = Complex64::new(c * c, 0.0);
    x[(1, 2)] = Complex64::new(s * c, 0.0);
    x[(2, 1)] = Complex64::new(s * c, 0.0);
    x
}

/// Record-averaged measurement back-action
/// `Gamma_M (X rho X^dag - {X^dag X, rho} / 2)`.
pub fn measurement_generator(eigen: &EigenBasis, gamma_m: f64, mode: Mode) -> Superoperator {
    let x = measured_projector(eigen);
    let xdx = x.adjoint() * x;
    let k = Complex64::new(gamma_m, 0.0);
    Superoperator::from_map(mode, |rho| {
        (x * rho * x.adjoint() - (xdx * rho + rho * xdx) * Complex64::new(0.5, 0.0)) * k
    })
}

/// Free rotation of the `+-` coherence.
///
/// Uses `d rho_+- / dt = +i eps_+- rho_+-`. The opposite orientation is
/// related by `Im rho_+- -> -Im rho_+-`, which no other term of the model
/// sees, so populations and currents do not depend on the choice.
pub fn unitary_generator(eigen: &EigenBasis, mode: Mode) -> Superoperator {
    let mut op = Superoperator::zeros(mode);
    if mode == Mode::Coherent {
        let w = eigen.splitting();
        op.matrix[(3, 4)] = -w;
        op.matrix[(4, 3)] = w;
    }
    op
}

pub fn total_generator(parts: &[&Superoperator]) -> Result<Superoperator> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::Contract("total_generator needs at least one part".into()))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, p| acc.try_add(p))
}

/// `<X>` for the monitored projector.
pub fn measured_expectation(state: &StateVector, eigen: &EigenBasis, mode: Mode) -> f64 {
    let rho = state.restrict(mode).to_density();
    (measured_projector(eigen) * rho).trace().re
}

/// Innovation term `sqrt(2 Gamma_M) (X rho + rho X^dag - <X + X^dag> rho) dW`
/// for one noise increment `dw`.
pub fn measurement_stochastic_increment(
    state: &StateVector,
    eigen: &EigenBasis,
    gamma_m: f64,
    dw: f64,
    mode: Mode,
) -> StateVector {
    if gamma_m == 0.0 || dw == 0.0 {
        return StateVector::ZERO;
    }
    // X only touches the {+, -} block, where it reads [[s^2, sc], [sc, c^2]].
    let st = state.restrict(mode);
    let (a, b, d) = (
        eigen.sin_theta * eigen.sin_theta,
        eigen.sin_theta * eigen.cos_theta,
        eigen.cos_theta * eigen.cos_theta,
    );
    let mean = a * st.rhopp + d * st.rhomm + 2.0 * b * st.c_re;
    let two_mean = 2.0 * mean;
    let innov = StateVector {
        rho00: -two_mean * st.rho00,
        rhopp: 2.0 * (a * st.rhopp + b * st.c_re) - two_mean * st.rhopp,
        rhomm: 2.0 * (b * st.c_re + d * st.rhomm) - two_mean * st.rhomm,
        c_re: (a + d) * st.c_re + b * (st.rhopp + st.rhomm) - two_mean * st.c_re,
        c_im: (a + d) * st.c_im - two_mean * st.c_im,
    };
    innov.restrict(mode) * ((2.0 * gamma_m).sqrt() * dw)
}
