use num_complex::Complex64;
use serde::Serialize;

/// Amplitudes at every interface of a chain, first atom to last.
///
/// `t[j]` is the right-going amplitude just past atom `j` (`t[0] = 1` is the
/// incident wave) and `r[j]` the left-going amplitude just before atom `j+1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ladders {
    pub t: Vec<Complex64>,
    pub r: Vec<Complex64>,
}

/// Response of a chain at one detuning.
///
/// Phase convention: `t` carries the factor `exp(2ik(x_last − x_first))`
/// relative to the plane-wave coefficient, which makes a lone dimer reproduce
/// the textbook closed forms; `r` is referenced to the first atom. Neither
/// convention affects `transmission` or `reflection`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringResult {
    pub delta: f64,
    pub t: Complex64,
    pub r: Complex64,
    pub transmission: f64,
    pub reflection: f64,
    /// `ln T`, kept separately so deep band gaps survive below f64 range.
    pub ln_transmission: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladders: Option<Ladders>,
}

impl ScatteringResult {
    pub(crate) fn from_amplitudes(delta: f64, t: Complex64, r: Complex64) -> Self {
        let transmission = t.norm_sqr();
        Self {
            delta,
            t,
            r,
            transmission,
            reflection: r.norm_sqr(),
            ln_transmission: transmission.ln(),
            ladders: None,
        }
    }

    pub fn absorption(&self) -> f64 {
        1.0 - self.transmission - self.reflection
    }
}
