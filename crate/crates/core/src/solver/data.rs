//! Initial data generators.
//!
//! Singular homogeneous profiles are mollified as |x|_m = sqrt(|x|² + ε_m²),
//! ε_m defaulting to the grid spacing. Coordinates are the box coordinates in
//! [-L/2, L/2), not the periodic distance.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use super::SolveError;
use crate::spectral::{read_fhf1, Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    HomogeneousRadial,
    HarmonicHomogeneous,
    Gaussian,
    File,
    Zero,
}

/// One field recipe, as it appears in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldGen {
    Zero,
    /// amplitude·|x|_m^{-degree}
    HomogeneousRadial { degree: f64, amplitude: f64 },
    /// amplitude·Y_k(x)/|x|_m^{degree+k}, Y_k(x) = Re (x₀ + i x₁)^k
    HarmonicHomogeneous { k: u32, degree: f64, amplitude: f64 },
    /// amplitude·exp(-|x|²/width²)
    Gaussian { width: f64, amplitude: f64 },
    File { path: PathBuf },
}

impl FieldGen {
    pub fn generator(&self) -> Generator {
        match self {
            FieldGen::Zero => Generator::Zero,
            FieldGen::HomogeneousRadial { .. } => Generator::HomogeneousRadial,
            FieldGen::HarmonicHomogeneous { .. } => Generator::HarmonicHomogeneous,
            FieldGen::Gaussian { .. } => Generator::Gaussian,
            FieldGen::File { .. } => Generator::File,
        }
    }

    pub fn build(&self, grid: Grid, eps_m: f64) -> Result<Field, SolveError> {
        Ok(match self {
            FieldGen::Zero => Field::zeros(grid),
            FieldGen::HomogeneousRadial { degree, amplitude } => homogeneous_radial(grid, *degree, *amplitude, eps_m),
            FieldGen::HarmonicHomogeneous { k, degree, amplitude } => {
                harmonic_homogeneous(grid, *k, *degree, *amplitude, eps_m)
            }
            FieldGen::Gaussian { width, amplitude } => gaussian(grid, *width, *amplitude),
            FieldGen::File { path } => {
                let f = read_fhf1(path)?;
                if f.grid != grid {
                    return Err(SolveError::Domain(format!(
                        "{} holds a {:?} field, run grid is {grid:?}",
                        path.display(),
                        f.grid
                    )));
                }
                f
            }
        })
    }
}

fn mollified_sq(x: [f64; 2], eps: f64) -> f64 {
    x[0] * x[0] + x[1] * x[1] + eps * eps
}

pub fn homogeneous_radial(grid: Grid, degree: f64, amplitude: f64, eps_m: f64) -> Field {
    Field::from_fn(grid, |x| amplitude * mollified_sq(x, eps_m).powf(-0.5 * degree))
}

/// On the lines x_d = -L/2 the periodic extension jumps for odd k; there the
/// value is the mean over the images ±L/2, which keeps odd parity exact.
pub fn harmonic_homogeneous(grid: Grid, k: u32, degree: f64, amplitude: f64, eps_m: f64) -> Field {
    let f = |x: [f64; 2]| {
        let y = num_complex::Complex64::new(x[0], x[1]).powu(k).re;
        amplitude * y * mollified_sq(x, eps_m).powf(-0.5 * (degree + k as f64))
    };
    let edge = -0.5 * grid.length;
    Field::from_fn(grid, |x| {
        let flips = |c: f64| if c == edge { vec![c, -c] } else { vec![c] };
        let (xs, ys) = (flips(x[0]), flips(x[1]));
        let n = (xs.len() * ys.len()) as f64;
        xs.iter().flat_map(|&a| ys.iter().map(move |&b| [a, b])).map(f).sum::<f64>() / n
    })
}

pub fn gaussian(grid: Grid, width: f64, amplitude: f64) -> Field {
    Field::from_fn(grid, |x| amplitude * (-(x[0] * x[0] + x[1] * x[1]) / (width * width)).exp())
}

/// Data recipe: φ, ψ and the mollification scale (None → h).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub phi: FieldGen,
    #[serde(default = "zero_gen")]
    pub psi: FieldGen,
    #[serde(default)]
    pub epsilon_m: Option<f64>,
}

fn zero_gen() -> FieldGen {
    FieldGen::Zero
}

impl DataSpec {
    /// Homogeneous data of the self-similar class: φ of degree 2/(ρ-1), ψ of
    /// degree 2/(ρ-1) + 2/α.
    pub fn self_similar(alpha: f64, rho: f64, eps_phi: f64, eps_psi: f64) -> Self {
        let d = 2.0 / (rho - 1.0);
        DataSpec {
            phi: FieldGen::HomogeneousRadial { degree: d, amplitude: eps_phi },
            psi: if eps_psi == 0.0 {
                FieldGen::Zero
            } else {
                FieldGen::HomogeneousRadial { degree: d + 2.0 / alpha, amplitude: eps_psi }
            },
            epsilon_m: None,
        }
    }

    pub fn build(&self, grid: Grid) -> Result<InitialData, SolveError> {
        let eps = self.epsilon_m.unwrap_or_else(|| grid.h());
        if !(eps >= 0.0) {
            return Err(SolveError::Domain(format!("epsilon_m must be ≥ 0, got {eps}")));
        }
        Ok(InitialData {
            phi: self.phi.build(grid, eps)?,
            psi: self.psi.build(grid, eps)?,
            generator: self.phi.generator(),
            epsilon_m: eps,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub phi: Field,
    pub psi: Field,
    pub generator: Generator,
    pub epsilon_m: f64,
}

impl InitialData {
    pub fn new(phi: Field, psi: Field, generator: Generator, epsilon_m: f64) -> Result<Self, SolveError> {
        if phi.grid != psi.grid {
            return Err(SolveError::Domain("φ and ψ live on different grids".into()));
        }
        Ok(InitialData { phi, psi, generator, epsilon_m })
    }

    pub fn grid(&self) -> Grid {
        self.phi.grid
    }

    pub fn scaled(&self, s: f64) -> Self {
        InitialData { phi: self.phi.scaled(s), psi: self.psi.scaled(s), ..self.clone() }
    }
}
