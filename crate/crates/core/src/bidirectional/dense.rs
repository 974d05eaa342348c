//! Dense reference solver: all `4N` jump conditions solved at once.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chiral::SINGULARITY_EPS;
use crate::error::{Error, Result};
use crate::model::{ChainGeometry, CouplingParams};
use crate::scattering::{Ladders, ScatteringResult};

use super::I;

/// Largest accepted 1-norm condition estimate of the equilibrated system.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Maximum number of iterative-refinement sweeps after the LU solve.
const REFINEMENT_STEPS: usize = 5;

/// `a + b` as an unevaluated sum `(s, e)`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Compensated accumulator: keeps the rounding error of every addition.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    err: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.err += e;
    }

    /// Adds the exact product `a·b`.
    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.add(p);
        self.err += a.mul_add(b, -p);
    }

    fn value(self) -> f64 {
        self.sum + self.err
    }
}

/// `b − A x` with every product and sum carried to roughly twice the
/// working precision, so refinement can recover components far below the
/// scale of the largest ones.
fn residual(a: &DMatrix<Complex64>, x: &DVector<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_fn(b.len(), |row, _| {
        let (mut re, mut im) = (Compensated::default(), Compensated::default());
        re.add(b[row].re);
        im.add(b[row].im);
        for (col, xv) in x.iter().enumerate() {
            let av = a[(row, col)];
            re.add_product(-av.re, xv.re);
            re.add_product(av.im, xv.im);
            im.add_product(-av.re, xv.im);
            im.add_product(-av.im, xv.re);
        }
        Complex64::new(re.value(), im.value())
    })
}

/// Solves the coupled jump conditions of every atom for the amplitude ladders.
///
/// Unknowns are the right-going amplitudes `t_1 … t_2N` behind each atom and
/// the left-going amplitudes `r_1 … r_2N` in front of each atom, with
/// `t_0 = 1` and `r_{2N+1} = 0`. The field at an atom is the average of its
/// two sides. Eliminating the dimer's atomic amplitudes (which multiplies each
/// row by `δ = d² − J²`, `d = Δ + iγ/2`) leaves for atom `j` with partner `p`
///
/// ```text
/// δ(t_j − t_{j−1}) = −i e^{−ikx_j} √Γ_R (d S_j + J S_p)
/// δ(r_{j+1} − r_j) =  i e^{ ikx_j} √Γ_L (d S_j + J S_p)
/// S_j = ½ √Γ_R e^{ikx_j} (t_{j−1} + t_j) + ½ √Γ_L e^{−ikx_j} (r_j + r_{j+1})
/// ```
///
/// Any non-negative `Γ_R`, `Γ_L` are accepted, so the same assembly also
/// covers the chiral limit. Rows are equilibrated before an LU solve with
/// partial pivoting; the 1-norm condition number is checked against
/// [`CONDITION_LIMIT`]. The LU solution is polished by iterative refinement
/// with an extra-precise residual, which keeps exponentially small
/// transmission amplitudes accurate in relative terms.
pub fn solve_dense(geometry: &ChainGeometry, params: &CouplingParams, delta: f64) -> Result<ScatteringResult> {
    params.validate()?;
    let couplings = params.couplings(geometry)?;
    let k = params.wavenumber();
    let origin = geometry.dimer_start(0);
    let x: Vec<f64> = geometry.positions().iter().map(|p| p - origin).collect();
    let atoms = x.len();
    let size = 2 * atoms;

    let d = Complex64::new(delta, 0.5 * params.loss);
    let gr = params.gamma_right;
    let gl = params.gamma_left;
    let g = (gr * gl).sqrt();

    let t_col = |j: usize| j - 1;
    let r_col = |j: usize| atoms + j - 1;

    let mut a = DMatrix::<Complex64>::zeros(size, size);
    let mut b = DVector::<Complex64>::zeros(size);

    for jj in 0..atoms {
        let j = jj + 1;
        let pp = jj ^ 1;
        let p = pp + 1;
        let coupling = couplings[jj / 2];
        let det = d * d - coupling * coupling;
        if det.norm() < SINGULARITY_EPS {
            return Err(Error::Singular {
                delta,
                magnitude: det.norm(),
            });
        }
        let (xj, xp) = (x[jj], x[pp]);
        let ph = |phase: f64| Complex64::from_polar(1.0, phase);

        // Coefficients multiplying the atom-averaged sums on each row.
        let right = [
            (j, true, I * 0.5 * gr * d),
            (j, false, I * 0.5 * g * d * ph(-2.0 * k * xj)),
            (p, true, I * 0.5 * gr * coupling * ph(k * (xp - xj))),
            (p, false, I * 0.5 * g * coupling * ph(-k * (xj + xp))),
        ];
        let left = [
            (j, true, -I * 0.5 * g * d * ph(2.0 * k * xj)),
            (j, false, -I * 0.5 * gl * d),
            (p, true, -I * 0.5 * g * coupling * ph(k * (xj + xp))),
            (p, false, -I * 0.5 * gl * coupling * ph(k * (xj - xp))),
        ];

        for (row, terms, jump) in [(jj, right, true), (atoms + jj, left, false)] {
            // The jump itself.
            if jump {
                a[(row, t_col(j))] += det;
                if j > 1 {
                    a[(row, t_col(j - 1))] -= det;
                } else {
                    b[row] += det;
                }
            } else {
                a[(row, r_col(j))] -= det;
                if j < atoms {
                    a[(row, r_col(j + 1))] += det;
                }
            }
            for (site, is_t, c) in terms {
                if is_t {
                    // t_site + t_{site−1}
                    a[(row, t_col(site))] += c;
                    if site > 1 {
                        a[(row, t_col(site - 1))] += c;
                    } else {
                        b[row] -= c;
                    }
                } else {
                    // r_site + r_{site+1}
                    a[(row, r_col(site))] += c;
                    if site < atoms {
                        a[(row, r_col(site + 1))] += c;
                    }
                }
            }
        }
    }

    for row in 0..size {
        let scale = a.row(row).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            let inv = 1.0 / scale;
            a.row_mut(row).scale_mut(inv);
            b[row] *= inv;
        }
    }

    let norm1 = |m: &DMatrix<Complex64>| {
        m.column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let a_norm = norm1(&a);
    let lu = a.clone().lu();
    let inverse = lu.try_inverse().ok_or(Error::IllConditioned {
        delta,
        condition: f64::INFINITY,
    })?;
    let condition = a_norm * norm1(&inverse);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned { delta, condition });
    }
    let solve = |rhs: &DVector<Complex64>| {
        lu.solve(rhs).ok_or(Error::IllConditioned {
            delta,
            condition: f64::INFINITY,
        })
    };
    let mut sol = solve(&b)?;
    for _ in 0..REFINEMENT_STEPS {
        let correction = solve(&residual(&a, &sol, &b))?;
        sol += &correction;
        let settled = correction
            .iter()
            .zip(sol.iter())
            .all(|(c, x)| c.norm() <= f64::EPSILON * x.norm());
        if settled {
            break;
        }
    }

    let mut t = Vec::with_capacity(atoms + 1);
    t.push(Complex64::new(1.0, 0.0));
    for j in 1..=atoms {
        t.push(sol[t_col(j)] * Complex64::from_polar(1.0, 2.0 * k * x[j - 1]));
    }
    let r: Vec<Complex64> = (1..=atoms).map(|j| sol[r_col(j)]).collect();

    let mut result = ScatteringResult::from_amplitudes(delta, t[atoms], r[0]);
    result.ladders = Some(Ladders { t, r });
    Ok(result)
}
