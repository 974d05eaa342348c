//! Domain types shared by the solvers: chain geometry, coupling rates and the
//! intra-dimer dipole-dipole interaction.
//!
//! Rates (detuning, loss, waveguide decay, dipole coupling) are dimensionless
//! multiples of the free-space decay rate. Lengths are nanometres and phases
//! are radians.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prefactor of the near-field coupling formula as usually printed (3/4).
pub const DEFAULT_COUPLING_PREFACTOR: f64 = 0.75;

/// Shape of the dipole-dipole coupling as a function of the dimensionless
/// separation `x = 2π d / λ`, without the prefactor.
fn coupling_shape(x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    c / (x * x * x) + s / (x * x) - c / x
}

/// Dipole-dipole exchange rate between two atoms a `distance` apart.
///
/// Evaluates `prefactor · (cos x / x³ + sin x / x² − cos x / x)` with
/// `x = 2π·distance/λ`. The distance enters through its magnitude only.
pub fn dipole_coupling(distance_nm: f64, lambda_nm: f64, prefactor: f64) -> Result<f64> {
    if !(lambda_nm > 0.0) || !lambda_nm.is_finite() {
        return Err(Error::Domain(format!(
            "transition wavelength must be positive, got {lambda_nm}"
        )));
    }
    let d = distance_nm.abs();
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!(
            "dipole coupling diverges at contact; distance = {distance_nm} nm"
        )));
    }
    Ok(prefactor * coupling_shape(2.0 * PI * d / lambda_nm))
}

/// Phase accumulated by a guided photon between two points, `2π (x_b − x_a)/λ`.
pub fn phase_between(x_a: f64, x_b: f64, lambda_nm: f64) -> f64 {
    2.0 * PI * (x_b - x_a) / lambda_nm
}

/// Atom positions of a chain of dimers.
///
/// Each dimer is stored as the absolute position of its first atom plus its
/// length; the second atom sits at `start + length`. Separations are derived.
/// Storing lengths directly keeps them bit-exact when only the gaps between
/// dimers are perturbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainGeometry {
    starts: Vec<f64>,
    lengths: Vec<f64>,
}

impl ChainGeometry {
    /// Builds a chain from `2N` absolute positions; atoms `2k` and `2k+1`
    /// (zero based) form dimer `k`.
    pub fn from_positions(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() || !positions.len().is_multiple_of(2) {
            return Err(Error::InvalidGeometry(format!(
                "a chain of dimers needs an even, non-zero number of atoms; got {}",
                positions.len()
            )));
        }
        let starts = positions.iter().step_by(2).copied().collect();
        let lengths = positions.chunks_exact(2).map(|p| p[1] - p[0]).collect();
        let geometry = Self { starts, lengths };
        geometry.validate(&positions)?;
        Ok(geometry)
    }

    /// Builds a chain whose dimers start at `starts` with the given lengths.
    pub fn from_starts(starts: Vec<f64>, lengths: Vec<f64>) -> Result<Self> {
        if starts.is_empty() || starts.len() != lengths.len() {
            return Err(Error::InvalidGeometry(format!(
                "need one length per dimer start; got {} starts and {} lengths",
                starts.len(),
                lengths.len()
            )));
        }
        let geometry = Self { starts, lengths };
        geometry.validate(&geometry.positions())?;
        Ok(geometry)
    }

    /// Builds a chain starting at `origin` from per-dimer lengths and the
    /// `lengths.len() - 1` gaps between consecutive dimers.
    pub fn from_lengths(origin: f64, lengths: &[f64], separations: &[f64]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::InvalidGeometry("at least one dimer is required".into()));
        }
        if separations.len() + 1 != lengths.len() {
            return Err(Error::InvalidGeometry(format!(
                "{} dimers need {} separations, got {}",
                lengths.len(),
                lengths.len() - 1,
                separations.len()
            )));
        }
        if let Some(s) = separations.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::InvalidGeometry(format!(
                "dimer separation must be positive, got {s}"
            )));
        }
        let mut starts = Vec::with_capacity(lengths.len());
        let mut x = origin;
        for k in 0..lengths.len() {
            if k > 0 {
                x += lengths[k - 1] + separations[k - 1];
            }
            starts.push(x);
        }
        Self::from_starts(starts, lengths.to_vec())
    }

    fn validate(&self, positions: &[f64]) -> Result<()> {
        if let Some(bad) = positions.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite position {bad}")));
        }
        if let Some(l) = self.lengths.iter().find(|l| !(**l > 0.0)) {
            return Err(Error::InvalidGeometry(format!("dimer length must be positive, got {l}")));
        }
        if let Some(i) = positions.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGeometry(format!(
                "positions must be strictly increasing; x[{}] = {} >= x[{}] = {}",
                i,
                positions[i],
                i + 1,
                positions[i + 1]
            )));
        }
        Ok(())
    }

    pub fn positions(&self) -> Vec<f64> {
        self.starts
            .iter()
            .zip(&self.lengths)
            .flat_map(|(&x, &l)| [x, x + l])
            .collect()
    }

    pub fn dimer_count(&self) -> usize {
        self.starts.len()
    }

    /// Position of the first atom of dimer `k`.
    pub fn dimer_start(&self, k: usize) -> f64 {
        self.starts[k]
    }

    pub fn dimer_length(&self, k: usize) -> f64 {
        self.lengths[k]
    }

    pub fn dimer_starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn dimer_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn dimer_separations(&self) -> Vec<f64> {
        (1..self.starts.len())
            .map(|k| self.starts[k] - (self.starts[k - 1] + self.lengths[k - 1]))
            .collect()
    }

    /// The first `n` dimers of this chain.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.dimer_count() {
            return Err(Error::InvalidGeometry(format!(
                "cannot take {n} dimers from a chain of {}",
                self.dimer_count()
            )));
        }
        Ok(Self {
            starts: self.starts[..n].to_vec(),
            lengths: self.lengths[..n].to_vec(),
        })
    }

    /// Distance from the first to the last atom.
    pub fn span(&self) -> f64 {
        let last = self.starts.len() - 1;
        self.starts[last] + self.lengths[last] - self.starts[0]
    }
}

/// A periodic chain of `n` identical dimers with the first atom at the origin.
pub fn build_periodic_chain(n: usize, dimer_length: f64, dimer_separation: f64) -> Result<ChainGeometry> {
    if n == 0 {
        return Err(Error::InvalidGeometry("at least one dimer is required".into()));
    }
    let lengths = vec![dimer_length; n];
    let separations = vec![dimer_separation; n - 1];
    ChainGeometry::from_lengths(0.0, &lengths, &separations)
}

/// How the intra-dimer coupling `J` is obtained for a dimer of given length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// The same `J` for every dimer, whatever its length.
    Fixed(f64),
    /// `J` from the near-field formula with the given prefactor.
    Formula { prefactor: f64 },
    /// Near-field formula rescaled so that `J(length_nm) = j`.
    Anchored { j: f64, length_nm: f64 },
}

impl Coupling {
    pub fn at_length(&self, length_nm: f64, lambda_nm: f64) -> Result<f64> {
        match *self {
            Coupling::Fixed(j) => Ok(j),
            Coupling::Formula { prefactor } => dipole_coupling(length_nm, lambda_nm, prefactor),
            Coupling::Anchored { j, length_nm: anchor } => {
                let reference = dipole_coupling(anchor, lambda_nm, 1.0)?;
                if reference == 0.0 {
                    return Err(Error::Domain(format!(
                        "coupling shape vanishes at the anchor length {anchor} nm"
                    )));
                }
                Ok(j * dipole_coupling(length_nm, lambda_nm, 1.0)? / reference)
            }
        }
    }

    /// Ties a fixed `J` to the dimer length, keeping its value at `length_nm`.
    pub fn anchored_at(&self, length_nm: f64) -> Coupling {
        match *self {
            Coupling::Fixed(j) => Coupling::Anchored { j, length_nm },
            other => other,
        }
    }
}

/// Which guided modes the atoms couple to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveguide {
    /// Right-going mode only.
    Chiral,
    /// Right- and left-going modes with equal rates.
    Bidirectional,
}

/// Waveguide and loss rates of every atom plus the dipole-coupling rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    /// Decay rate into the right-going mode.
    pub gamma_right: f64,
    /// Decay rate into the left-going mode; zero for a chiral waveguide.
    pub gamma_left: f64,
    /// Decay rate into non-guided modes.
    pub loss: f64,
    pub lambda_nm: f64,
    pub coupling: Coupling,
}

impl CouplingParams {
    pub fn chiral(gamma: f64, loss: f64, lambda_nm: f64, coupling: Coupling) -> Result<Self> {
        let p = Self {
            gamma_right: gamma,
            gamma_left: 0.0,
            loss,
            lambda_nm,
            coupling,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn bidirectional(gamma: f64, loss: f64, lambda_nm: f64, coupling: Coupling) -> Result<Self> {
        let p = Self {
            gamma_right: gamma,
            gamma_left: gamma,
            loss,
            lambda_nm,
            coupling,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for `waveguide` with decay rate `gamma` into each guided mode.
    pub fn for_waveguide(
        waveguide: Waveguide,
        gamma: f64,
        loss: f64,
        lambda_nm: f64,
        coupling: Coupling,
    ) -> Result<Self> {
        match waveguide {
            Waveguide::Chiral => Self::chiral(gamma, loss, lambda_nm, coupling),
            Waveguide::Bidirectional => Self::bidirectional(gamma, loss, lambda_nm, coupling),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_right", self.gamma_right),
            ("gamma_left", self.gamma_left),
            ("loss", self.loss),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.lambda_nm > 0.0) || !self.lambda_nm.is_finite() {
            return Err(Error::InvalidParams(format!(
                "lambda must be positive, got {}",
                self.lambda_nm
            )));
        }
        Ok(())
    }

    pub fn is_chiral(&self) -> bool {
        self.gamma_left == 0.0
    }

    pub fn is_symmetric(&self) -> bool {
        self.gamma_left == self.gamma_right
    }

    /// Guided-mode wavenumber at the transition frequency, rad/nm.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda_nm
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    /// Intra-dimer coupling for every dimer of `geometry`.
    pub fn couplings(&self, geometry: &ChainGeometry) -> Result<Vec<f64>> {
        geometry
            .dimer_lengths()
            .iter()
            .map(|&l| self.coupling.at_length(l, self.lambda_nm))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn coupling_at_half_wavelength() {
        // 0.75 (1/π − 1/π³)
        let j = dipole_coupling(327.5, 655.0, DEFAULT_COUPLING_PREFACTOR).unwrap();
        assert_relative_eq!(j, 0.214_543_763_812_943_39, max_relative = 1e-13);
    }

    #[test]
    fn coupling_far_field_decays() {
        let j = dipole_coupling(50.0 * 655.0, 655.0, DEFAULT_COUPLING_PREFACTOR).unwrap();
        assert!(j.abs() < 0.01);
        assert_relative_eq!(j, -0.002_387_299_957_727_605, max_relative = 1e-9);
    }

    #[test]
    fn coupling_for_reference_dimer() {
        let j34 = dipole_coupling(32.75, 655.0, 0.75).unwrap();
        let j32 = dipole_coupling(32.75, 655.0, 1.5).unwrap();
        assert_relative_eq!(j34, 23.082_541_374_162, max_relative = 1e-12);
        assert_relative_eq!(j32, 46.165_082_748_324, max_relative = 1e-12);
        assert!((j32 - 46.2).abs() < 0.05);
    }

    #[test]
    fn coupling_rejects_contact() {
        assert!(matches!(dipole_coupling(0.0, 655.0, 0.75), Err(Error::Domain(_))));
        assert!(matches!(dipole_coupling(1.0, 0.0, 0.75), Err(Error::Domain(_))));
    }

    #[test]
    fn near_field_dominates() {
        let lambda = 655.0;
        let d = 0.1 * lambda / (2.0 * PI);
        let j = dipole_coupling(d, lambda, 1.0).unwrap();
        assert!((j * 1e-3 - 1.0).abs() < 0.05);
    }

    #[test]
    fn periodic_chain_positions() {
        assert_eq!(build_periodic_chain(1, 32.75, 98.25).unwrap().positions(), vec![0.0, 32.75]);
        assert_eq!(
            build_periodic_chain(2, 32.75, 98.25).unwrap().positions(),
            vec![0.0, 32.75, 131.0, 163.75]
        );
        let c = build_periodic_chain(3, 10.0, 20.0).unwrap();
        assert_eq!(c.dimer_separations(), vec![20.0, 20.0]);
        assert_eq!(c.dimer_lengths(), &[10.0; 3]);
        let round_trip = ChainGeometry::from_positions(c.positions()).unwrap();
        assert_eq!(round_trip, c);
    }

    #[test]
    fn geometry_validation() {
        assert!(ChainGeometry::from_positions(vec![0.0]).is_err());
        assert!(ChainGeometry::from_positions(vec![0.0, 1.0, 1.0, 2.0]).is_err());
        assert!(build_periodic_chain(0, 1.0, 1.0).is_err());
        assert!(build_periodic_chain(2, -1.0, 1.0).is_err());
        assert!(build_periodic_chain(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn phases() {
        assert_relative_eq!(phase_between(0.0, 32.75, 655.0), 0.314_159_265_358_979_3, max_relative = 1e-14);
        assert!((phase_between(0.0, 32.75, 655.0) - 0.314).abs() < 5e-4);
        assert_eq!(phase_between(3.0, 3.0, 655.0), 0.0);
        assert_relative_eq!(phase_between(0.0, 655.0, 655.0), 2.0 * PI);
    }

    #[test]
    fn anchored_coupling_hits_anchor() {
        let c = Coupling::Anchored { j: 46.02, length_nm: 32.75 };
        assert_relative_eq!(c.at_length(32.75, 655.0).unwrap(), 46.02, max_relative = 1e-14);
        assert!(c.at_length(20.0, 655.0).unwrap() > 46.02);
        assert_eq!(Coupling::Fixed(3.0).anchored_at(10.0), Coupling::Anchored { j: 3.0, length_nm: 10.0 });
    }

    #[test]
    fn params_validation() {
        assert!(CouplingParams::chiral(-1.0, 0.0, 655.0, Coupling::Fixed(0.0)).is_err());
        assert!(CouplingParams::bidirectional(1.0, f64::NAN, 655.0, Coupling::Fixed(0.0)).is_err());
        let p = CouplingParams::chiral(11.103, 6.86, 655.0, Coupling::Fixed(0.0)).unwrap();
        assert!(p.is_chiral() && !p.is_symmetric());
    }

    proptest! {
        #[test]
        fn coupling_even_and_enveloped(x in 1e-3f64..200.0, pref in 0.1f64..2.0) {
            let lambda = 655.0;
            let d = x * lambda / (2.0 * PI);
            let a = dipole_coupling(d, lambda, pref).unwrap();
            let b = dipole_coupling(-d, lambda, pref).unwrap();
            prop_assert_eq!(a, b);
            let envelope = pref * (1.0 / x.powi(3) + 1.0 / x.powi(2) + 1.0 / x);
            prop_assert!(a.abs() <= envelope * (1.0 + 1e-12));
        }

        #[test]
        fn periodic_views_are_exact(n in 1usize..40, l in 0.5f64..100.0, s in 0.5f64..300.0) {
            let c = build_periodic_chain(n, l, s).unwrap();
            prop_assert_eq!(c.dimer_count(), n);
            for &v in c.dimer_lengths() { prop_assert_eq!(v, l); }
            for v in c.dimer_separations() { prop_assert!((v - s).abs() <= 1e-12 * (1.0 + c.span())); }
        }
    }
}
