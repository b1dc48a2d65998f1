//! Problem files and their reduction to a validated spectrum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimax::{solve, solve_exact, ClosedForm, MinimaxSolution};
use crate::scalar::{is_small, parse_rational, small_rational, Field, Rational};
use crate::spectrum::{
    diagonalize, pull_back, push_forward, validate_spectrum, Spectrum, SymmetricSystem, UnitVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Rational,
}

/// An eigenvalue as written: a JSON number or a literal such as `"7/3"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Stationarity residuals `‖W(b)x − ξx‖`, `‖W(x)b − ξb‖`.
    pub residual: f64,
    /// Agreement of recovered `ξ` values with `1/φ`.
    pub xi: f64,
    /// Entrywise distance of an ascent end point to the nearest `σv*`.
    pub critical_point: f64,
    /// `max ||xᵢ| − |bᵢ||` at optimal pairs.
    pub modulus: f64,
    /// Ascent stopping threshold on the Riemannian gradient norm.
    pub gradient: f64,
    /// Relative error of simulated against predicted steering energy.
    pub energy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-9,
            xi: 1e-9,
            critical_point: 1e-5,
            modulus: 1e-6,
            gradient: 1e-10,
            energy: 1e-3,
        }
    }
}

impl Tolerances {
    fn check(&self) -> Result<()> {
        let all = [
            ("residual", self.residual),
            ("xi", self.xi),
            ("critical_point", self.critical_point),
            ("modulus", self.modulus),
            ("gradient", self.gradient),
            ("energy", self.energy),
        ];
        for (name, value) in all {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "tolerance `{name}` must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Input document: exactly one of `eigenvalues` and `matrix`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub eigenvalues: Option<Vec<Scalar>>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub mode: Option<Mode>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A validated problem in diagonal coordinates.
#[derive(Clone, Debug)]
pub struct Problem {
    pub mode: Mode,
    pub spectrum: Spectrum,
    pub exact: Option<Spectrum<Rational>>,
    /// Present when the input was a matrix.
    pub system: Option<SymmetricSystem>,
    pub tolerances: Tolerances,
}

/// The closed-form solution, with exact data in rational mode.
pub struct Solved {
    pub solution: MinimaxSolution,
    pub exact: Option<ClosedForm<Rational>>,
}

impl Problem {
    /// `mode` overrides the file's `mode`; with neither, rational mode is
    /// chosen when every eigenvalue is a small exact rational and `n` fits.
    pub fn load(file: ProblemFile, mode: Option<Mode>) -> Result<Problem> {
        file.tolerances.check()?;
        let requested = mode.or(file.mode);
        match (file.eigenvalues, file.matrix) {
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "give either `eigenvalues` or `matrix`, not both".into(),
            )),
            (None, None) => Err(Error::InvalidConfig(
                "missing `eigenvalues` or `matrix`".into(),
            )),
            (None, Some(rows)) => {
                if requested == Some(Mode::Rational) {
                    return Err(Error::InvalidConfig(
                        "rational mode needs exact eigenvalues, not a matrix".into(),
                    ));
                }
                let system = diagonalize(&matrix_from_rows(&rows)?)?;
                Ok(Problem {
                    mode: Mode::Float,
                    spectrum: system.spectrum().clone(),
                    exact: None,
                    system: Some(system),
                    tolerances: file.tolerances,
                })
            }
            (Some(values), None) => {
                let mode = requested.unwrap_or_else(|| auto_mode(&values));
                let (spectrum, exact) = match mode {
                    Mode::Float => {
                        let floats = values.iter().map(to_float).collect::<Result<Vec<_>>>()?;
                        (validate_spectrum(&floats)?, None)
                    }
                    Mode::Rational => {
                        let exact = values.iter().map(to_rational).collect::<Result<Vec<_>>>()?;
                        let exact = Spectrum::validate(&exact)?;
                        (
                            validate_spectrum(exact.to_float().eigenvalues())?,
                            Some(exact),
                        )
                    }
                };
                Ok(Problem {
                    mode,
                    spectrum,
                    exact,
                    system: None,
                    tolerances: file.tolerances,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn solve(&self) -> Result<Solved> {
        match &self.exact {
            Some(exact) => {
                let (closed, solution) = solve_exact(exact)?;
                Ok(Solved {
                    solution,
                    exact: Some(closed),
                })
            }
            None => Ok(Solved {
                solution: solve(&self.spectrum)?,
                exact: None,
            }),
        }
    }

    /// Diagonal-coordinate vector expressed in the input's coordinates.
    pub fn to_original(&self, v: &UnitVector) -> Result<UnitVector> {
        match &self.system {
            Some(system) => pull_back(system, v),
            None => Ok(v.clone()),
        }
    }

    /// Input-coordinate vector expressed in diagonal coordinates.
    pub fn to_diagonal(&self, v: &UnitVector) -> Result<UnitVector> {
        match &self.system {
            Some(system) => push_forward(system, v),
            None => Ok(v.clone()),
        }
    }

    pub fn coordinates(&self) -> &'static str {
        if self.system.is_some() {
            "original"
        } else {
            "diagonal"
        }
    }
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(row) = rows.iter().find(|row| row.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: row.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn auto_mode(values: &[Scalar]) -> Mode {
    let exact = values.len() <= Rational::MAX_DIM
        && values.iter().all(|v| match v {
            Scalar::Number(x) => small_rational(*x).is_some(),
            Scalar::Text(text) => parse_rational(text).is_ok_and(|r| is_small(&r)),
        });
    if exact {
        Mode::Rational
    } else {
        Mode::Float
    }
}

fn to_float(value: &Scalar) -> Result<f64> {
    match value {
        Scalar::Number(x) => Ok(*x),
        Scalar::Text(text) => Ok(parse_rational(text)?.to_f64()),
    }
}

/// Numbers are read as the decimal they were written as when that is a small
/// rational, and as their exact binary value otherwise.
fn to_rational(value: &Scalar) -> Result<Rational> {
    match value {
        Scalar::Number(x) => small_rational(*x)
            .or_else(|| Rational::from_float(*x))
            .ok_or(Error::NonFiniteValue { index: 0 }),
        Scalar::Text(text) => parse_rational(text),
    }
}
