//! Reflectionless Riemann–Hilbert problems, soliton fields and the
//! rational pole removers.
//!
//! With `r ≡ 0` the solution is `I` plus principal parts: column 1 has poles
//! at the `λ_l`, column 2 at the mirror points `μ_l = 1/λ̄_l`. The residue
//! conditions
//!
//! ```text
//! PP_{λ_l}[M₁] = PP_{λ_l}[M₂ h_l],   h_l = β_l(λ) e^{-φ} / a
//! PP_{μ_l}[M₂] = PP_{μ_l}[M₁ h̆_l],   h̆_l(λ) = -conj(h_l(1/λ̄))
//! ```
//!
//! are linear in the principal-part coefficients, and the two rows of `M`
//! decouple into systems sharing one matrix.

use nalgebra::DMatrix;

use crate::linalg::{condition_number, determinant, lu_solve, Mat2};
use crate::phase::{exp_phi_series, re_phi_scaled};
use crate::scattering::ScatteringModel;
use crate::series::Series;
use crate::spectrum::{DiscreteSpectrum, Pole};
use crate::{Error, LatticeState, Result, C64};

/// Poles within this distance of `Re φ = 0` (in units of `t`) belong to `Z_ξ`.
pub const NEUTRAL_BAND: f64 = 1e-10;

/// Generalized binomial coefficient `C(n, k)` for integer `n`.
pub(crate) fn binom(n: i64, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v *= (n - i as i64) as f64 / (i + 1) as f64;
    }
    v
}

/// Coefficients `h_{-α}, …, h_{-1}` of the Laurent expansion of
/// `β(λ) e^{-φ(λ)} / a(λ)` at a pole of order `α`, given the Taylor series of
/// `a` there (at least `2α` terms).
pub fn residue_laurent(pole: &Pole, a_series: &Series, n: i64, t: f64) -> Result<Vec<C64>> {
    let alpha = pole.order;
    if a_series.len() < 2 * alpha {
        return Err(Error::invalid("a series too short for the pole order"));
    }
    let lead = a_series.coeff(alpha);
    if lead.norm() == 0.0 {
        return Err(Error::Inconsistent(format!("a has a zero of order > {alpha} at {}", pole.lambda)));
    }
    let reduced = Series((alpha..2 * alpha).map(|k| a_series.coeff(k)).collect());
    let beta = Series::from_taylor_derivatives(&pole.betas, alpha);
    let e = exp_phi_series(pole.lambda, n, t, -1, alpha)?;
    Ok(beta.mul(&e).div(&reduced).0)
}

/// Laurent coefficients `h̆_{-α}, …, h̆_{-1}` at `μ = 1/λ̄` of
/// `h̆(λ) = -conj(h(1/λ̄))`.
pub fn mirror_laurent(lambda: C64, h: &[C64]) -> Vec<C64> {
    let alpha = h.len();
    let mu = lambda.conj().inv();
    let mut out = vec![C64::default(); alpha];
    for s in 1..=alpha {
        let mut acc = C64::default();
        for j in s..=alpha {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += h[alpha - j].conj() * sign * binom(j as i64, s) * mu.powu((j + s) as u32);
        }
        out[alpha - s] = -acc;
    }
    out
}

/// The assembled linear system for the principal-part coefficients.
#[derive(Clone, Debug)]
pub struct ResidueSystem {
    pub matrix: DMatrix<C64>,
    /// One column per row of `M`.
    pub rhs: DMatrix<C64>,
    pub cond: f64,
}

/// Principal-part coefficients solving a reflectionless problem at fixed
/// `(n, t)`.
#[derive(Clone, Debug)]
pub struct ReflectionlessSolution {
    poles: Vec<(C64, C64, usize)>,
    /// `a[row][(l, s)]`: coefficient of `(λ-λ_l)^{-s}` in `M_{row,1}`.
    a: [Vec<C64>; 2],
    /// `b[row][(l, s)]`: coefficient of `(λ-μ_l)^{-s}` in `M_{row,2}`.
    b: [Vec<C64>; 2],
    pub cond: f64,
}

impl ReflectionlessSolution {
    pub fn identity() -> Self {
        ReflectionlessSolution { poles: vec![], a: [vec![], vec![]], b: [vec![], vec![]], cond: 1.0 }
    }

    pub fn eval(&self, lambda: C64) -> Mat2 {
        let mut m = Mat2::IDENTITY;
        let mut k = 0;
        for &(l, mu, alpha) in &self.poles {
            let dl = (lambda - l).inv();
            let dm = (lambda - mu).inv();
            let (mut pl, mut pm) = (dl, dm);
            for _ in 0..alpha {
                for row in 0..2 {
                    m.0[row][0] += self.a[row][k] * pl;
                    m.0[row][1] += self.b[row][k] * pm;
                }
                pl *= dl;
                pm *= dm;
                k += 1;
            }
        }
        m
    }

    /// Taylor coefficients of `M` at `λ₀` away from the poles.
    pub fn taylor(&self, lambda0: C64, len: usize) -> Vec<Mat2> {
        let mut out = vec![Mat2::ZERO; len];
        if len > 0 {
            out[0] = Mat2::IDENTITY;
        }
        let mut k = 0;
        for &(l, mu, alpha) in &self.poles {
            for s in 1..=alpha {
                let sl = Series::linear_pow(lambda0 - l, -(s as i64), len);
                let sm = Series::linear_pow(lambda0 - mu, -(s as i64), len);
                for (m, o) in out.iter_mut().enumerate() {
                    for row in 0..2 {
                        o.0[row][0] += self.a[row][k] * sl.coeff(m);
                        o.0[row][1] += self.b[row][k] * sm.coeff(m);
                    }
                }
                k += 1;
            }
        }
        out
    }
}

fn check_spectrum(spec: &DiscreteSpectrum) -> Result<()> {
    spec.validate()
}

/// Assemble the residue system of the reflectionless problem with `a` the
/// Blaschke-type product of `spec`.
pub fn assemble_residue_system(spec: &DiscreteSpectrum, n: i64, t: f64) -> Result<ResidueSystem> {
    check_spectrum(spec)?;
    let tau = spec.total_order();
    let size = 2 * tau;
    let mut mat = DMatrix::<C64>::identity(size, size);
    let mut rhs = DMatrix::<C64>::zeros(size, 2);
    let mut offsets = Vec::with_capacity(spec.len());
    let mut acc = 0;
    for p in &spec.poles {
        offsets.push(acc);
        acc += p.order;
    }
    let model = crate::scattering::Reflectionless { spectrum: spec.clone() };
    for (li, p) in spec.poles.iter().enumerate() {
        let alpha = p.order;
        let a_ser = model.a_series(p.lambda, 2 * alpha)?;
        let h = residue_laurent(p, &a_ser, n, t)?;
        let hb = mirror_laurent(p.lambda, &h);
        let lam = p.lambda;
        let mu = p.mirror();
        for s in 1..=alpha {
            let row_a = offsets[li] + s - 1;
            let row_b = tau + offsets[li] + s - 1;
            // m = 0 term of the identity column.
            rhs[(row_a, 1)] = h[alpha - s];
            rhs[(row_b, 0)] = hb[alpha - s];
            for m in 0..=(alpha - s) {
                let hc = h[alpha - s - m];
                let hbc = hb[alpha - s - m];
                for (lj, q) in spec.poles.iter().enumerate() {
                    let mu_j = q.mirror();
                    for s2 in 1..=q.order {
                        let col = offsets[lj] + s2 - 1;
                        // Taylor coefficient m of (λ-μ_j)^{-s2} at λ_l, and of
                        // (λ-λ_j)^{-s2} at μ_l.
                        let tb = binom(-(s2 as i64), m) * crate::phase::pow_i64(lam - mu_j, -(s2 as i64) - m as i64);
                        let ta = binom(-(s2 as i64), m) * crate::phase::pow_i64(mu - q.lambda, -(s2 as i64) - m as i64);
                        mat[(row_a, tau + col)] -= hc * tb;
                        mat[(row_b, col)] -= hbc * ta;
                    }
                }
            }
        }
    }
    let cond = if size > 0 { condition_number(&mat) } else { 1.0 };
    Ok(ResidueSystem { matrix: mat, rhs, cond })
}

/// Solve the reflectionless problem at `(n, t)`.
pub fn reflectionless_solution(spec: &DiscreteSpectrum, n: i64, t: f64) -> Result<ReflectionlessSolution> {
    if spec.is_empty() {
        return Ok(ReflectionlessSolution::identity());
    }
    let sys = assemble_residue_system(spec, n, t)?;
    if !sys.cond.is_finite() || sys.cond > 1e14 {
        return Err(Error::Singular { cond: sys.cond });
    }
    let x = lu_solve(sys.matrix.clone(), &sys.rhs)?;
    let tau = spec.total_order();
    let mut a = [Vec::with_capacity(tau), Vec::with_capacity(tau)];
    let mut b = [Vec::with_capacity(tau), Vec::with_capacity(tau)];
    for row in 0..2 {
        for k in 0..tau {
            a[row].push(x[(k, row)]);
            b[row].push(x[(tau + k, row)]);
        }
    }
    let poles = spec.poles.iter().map(|p| (p.lambda, p.mirror(), p.order)).collect();
    Ok(ReflectionlessSolution { poles, a, b, cond: sys.cond })
}

/// `M(λ)` at each evaluation point.
pub fn solve_reflectionless(spec: &DiscreteSpectrum, n: i64, t: f64, points: &[C64]) -> Result<Vec<Mat2>> {
    let sol = reflectionless_solution(spec, n, t)?;
    Ok(points.iter().map(|&l| sol.eval(l)).collect())
}

/// `q_n(t) = M₁₂(0; n+1, t)`.
pub fn soliton_q(spec: &DiscreteSpectrum, n: i64, t: f64) -> Result<C64> {
    Ok(reflectionless_solution(spec, n + 1, t)?.eval(C64::default()).0[0][1])
}

/// Field values for `n` in `n_min..=n_max`.
pub fn soliton_field(spec: &DiscreteSpectrum, n_min: i64, n_max: i64, t: f64) -> Result<Vec<C64>> {
    if n_max < n_min {
        return Err(Error::invalid("empty n range"));
    }
    (n_min..=n_max).map(|n| soliton_q(spec, n, t)).collect()
}

/// The soliton field as a lattice state on `n_min..=n_max`.
pub fn soliton_state(spec: &DiscreteSpectrum, n_min: i64, n_max: i64, t: f64) -> Result<LatticeState> {
    LatticeState::new(n_min, soliton_field(spec, n_min, n_max, t)?, t)
}

/// Poles with `Re φ = 0` on the ray `ξ`, up to [`NEUTRAL_BAND`].
pub fn neutral_poles(spec: &DiscreteSpectrum, xi: f64) -> DiscreteSpectrum {
    spec.filter(|p| re_phi_scaled(p.lambda, xi).abs() <= NEUTRAL_BAND)
}

/// `q^{Z_ξ}`: the soliton field of the poles on `Re φ = 0`.
pub fn soliton_restricted(spec: &DiscreteSpectrum, xi: f64, n: i64, t: f64) -> Result<C64> {
    let sub = neutral_poles(spec, xi);
    if sub.is_empty() {
        return Ok(C64::default());
    }
    soliton_q(&sub, n, t)
}

/// Generalized Vandermonde matrix: for each `λ_l` the rows
/// `(1/k!) ∂^k (1, λ, …, λ^{τ-1})` at `λ_l`, `k < α_l`; and its determinant
/// computed by LU.
pub fn vandermonde_general(lambdas: &[C64], alphas: &[usize]) -> Result<(DMatrix<C64>, C64)> {
    if lambdas.len() != alphas.len() {
        return Err(Error::invalid("lambdas and alphas differ in length"));
    }
    for i in 0..lambdas.len() {
        if alphas[i] == 0 {
            return Err(Error::invalid("orders must be positive"));
        }
        for j in 0..i {
            if (lambdas[i] - lambdas[j]).norm() == 0.0 {
                return Err(Error::domain(format!("repeated node {}", lambdas[i])));
            }
        }
    }
    let tau: usize = alphas.iter().sum();
    let mut v = DMatrix::<C64>::zeros(tau, tau);
    let mut row = 0;
    for (l, &a) in lambdas.iter().zip(alphas) {
        for k in 0..a {
            for j in k..tau {
                v[(row, j)] = binom(j as i64, k) * l.powu((j - k) as u32);
            }
            row += 1;
        }
    }
    let det = determinant(&v);
    Ok((v, det))
}

/// `∏_{j<k} (λ_k - λ_j)^{α_j α_k}`.
pub fn vandermonde_closed_form(lambdas: &[C64], alphas: &[usize]) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for k in 0..lambdas.len() {
        for j in 0..k {
            p *= (lambdas[k] - lambdas[j]).powu((alphas[j] * alphas[k]) as u32);
        }
    }
    p
}

/// One factor `c + Σ_s f_s (λ - λ_l)^{-s}` of the remover.
#[derive(Clone, Debug, PartialEq)]
pub struct RemoverFactor {
    pub lambda: C64,
    /// `f_{l,1}, …, f_{l,α}`.
    pub coeffs: Vec<C64>,
    pub constant: C64,
}

impl RemoverFactor {
    fn eval(&self, lambda: C64) -> C64 {
        let d = (lambda - self.lambda).inv();
        let mut p = d;
        let mut acc = self.constant;
        for c in &self.coeffs {
            acc += c * p;
            p *= d;
        }
        acc
    }

    fn series(&self, at: C64, len: usize) -> Series {
        let mut s = Series::constant(self.constant, len);
        for (k, c) in self.coeffs.iter().enumerate() {
            s = s.add(&Series::linear_pow(at - self.lambda, -(k as i64 + 1), len).scale(*c));
        }
        s
    }
}

/// `f(λ) = g(λ) ∏_l f_l(λ)` with `f_l` the principal part of `β_l/a` at
/// `λ_l` and `g` the polynomial making `f ≡ f_l` in principal part at every
/// pole.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalRemover {
    pub factors: Vec<RemoverFactor>,
    /// Monomial coefficients `g_0, …, g_{τ-1}`.
    pub g: Vec<C64>,
    pub cond: f64,
}

impl RationalRemover {
    pub fn empty() -> Self {
        RationalRemover { factors: vec![], g: vec![], cond: 1.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        if self.factors.is_empty() {
            return C64::default();
        }
        let mut g = C64::default();
        for c in self.g.iter().rev() {
            g = g * lambda + c;
        }
        self.factors.iter().fold(g, |acc, f| acc * f.eval(lambda))
    }

    /// Mirror remover `conj(f(1/λ̄))`.
    pub fn eval_mirror(&self, lambda: C64) -> C64 {
        self.eval(lambda.conj().inv()).conj()
    }

    /// Largest pole modulus.
    pub fn max_pole(&self) -> f64 {
        self.factors.iter().map(|f| f.lambda.norm()).fold(0.0, f64::max)
    }
}

/// Build the remover for the poles of `spec`, with Taylor data of `a` from
/// `model`.
pub fn pole_removal(model: &dyn ScatteringModel, spec: &DiscreteSpectrum) -> Result<RationalRemover> {
    check_spectrum(spec)?;
    if spec.is_empty() {
        return Ok(RationalRemover::empty());
    }
    let mut factors = Vec::with_capacity(spec.len());
    for p in &spec.poles {
        let alpha = p.order;
        let a_ser = model.a_series(p.lambda, 2 * alpha)?;
        let lead = a_ser.coeff(alpha);
        if a_ser.coeff(0).norm() > 1e-8 * lead.norm().max(1e-300) || lead.norm() == 0.0 {
            return Err(Error::Inconsistent(format!(
                "a does not vanish to order {alpha} at {}",
                p.lambda
            )));
        }
        let reduced = Series((alpha..2 * alpha).map(|k| a_ser.coeff(k)).collect());
        let ratio = Series::from_taylor_derivatives(&p.betas, alpha).div(&reduced);
        let coeffs = (1..=alpha).map(|s| ratio.coeff(alpha - s)).collect();
        factors.push(RemoverFactor { lambda: p.lambda, coeffs, constant: C64::default() });
    }
    for _ in 0..=factors.len() {
        match solve_g(&factors)? {
            GSolve::Done(g, cond) => return Ok(RationalRemover { factors, g, cond }),
            GSolve::Vanishing(k) => factors[k].constant += 1.0,
        }
    }
    Err(Error::Singular { cond: f64::INFINITY })
}

enum GSolve {
    Done(Vec<C64>, f64),
    Vanishing(usize),
}

fn solve_g(factors: &[RemoverFactor]) -> Result<GSolve> {
    let lambdas: Vec<C64> = factors.iter().map(|f| f.lambda).collect();
    let alphas: Vec<usize> = factors.iter().map(|f| f.coeffs.len()).collect();
    let tau: usize = alphas.iter().sum();
    let (v, _) = vandermonde_general(&lambdas, &alphas)?;
    let mut j = DMatrix::<C64>::zeros(tau, tau);
    let mut e = DMatrix::<C64>::zeros(tau, 1);
    let mut off = 0;
    for (l, f) in factors.iter().enumerate() {
        let alpha = alphas[l];
        let mut prod = Series::constant(C64::new(1.0, 0.0), alpha);
        for (k, other) in factors.iter().enumerate() {
            if k == l {
                continue;
            }
            let s = other.series(f.lambda, alpha);
            if s.coeff(0).norm() < 1e-12 {
                return Ok(GSolve::Vanishing(k));
            }
            prod = prod.mul(&s);
        }
        for r in 0..alpha {
            for c in 0..=r {
                j[(off + r, off + c)] = prod.coeff(r - c);
            }
        }
        e[(off, 0)] = C64::new(1.0, 0.0);
        off += alpha;
    }
    let sys = &j * &v;
    let cond = condition_number(&sys);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::Singular { cond });
    }
    let g = lu_solve(sys, &e)?;
    Ok(GSolve::Done(g.column(0).iter().copied().collect(), cond))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::lattice::al_rhs;
    use crate::phase::exp_phi;
    use crate::scattering::Reflectionless;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_pole() -> DiscreteSpectrum {
        DiscreteSpectrum::new(vec![Pole::simple(c(0.0, 1.5), c(1.0, 0.0))]).unwrap()
    }

    /// Direct two-unknown elimination for one simple pole.
    fn one_pole_closed_form(l: C64, beta: C64, n: i64, t: f64) -> C64 {
        let mu = l.conj().inv();
        let ap = (l - mu).inv();
        let h = beta * exp_phi(l, n + 1, t, -1).unwrap() / ap;
        let hb = h.conj() * mu * mu;
        let b = hb / (1.0 + h * hb / ((l - mu) * (l - mu)));
        -b / mu
    }

    #[test]
    fn empty_spectrum_is_identity() {
        let m = solve_reflectionless(&DiscreteSpectrum::empty(), 3, 1.0, &[c(0.3, 0.2)]).unwrap();
        assert_eq!(m[0], Mat2::IDENTITY);
        assert!(soliton_field(&DiscreteSpectrum::empty(), -3, 3, 0.5).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn one_pole_matches_elimination() {
        let s = DiscreteSpectrum::new(vec![Pole::simple(c(0.4, 1.3), c(0.7, -0.2))]).unwrap();
        for n in [-5, 0, 3, 9] {
            for t in [0.0, 1.3] {
                let q = soliton_q(&s, n, t).unwrap();
                let want = one_pole_closed_form(c(0.4, 1.3), c(0.7, -0.2), n, t);
                assert!((q - want).norm() < 1e-10 * want.norm().max(1e-3), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn unimodular() {
        let s = DiscreteSpectrum::new(vec![
            Pole::simple(c(0.4, 1.3), c(0.7, -0.2)),
            Pole { lambda: c(-1.1, -0.9), order: 2, betas: vec![c(1.0, 0.3), c(-0.4, 0.1)] },
        ])
        .unwrap();
        let sol = reflectionless_solution(&s, 2, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let l = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            assert!((sol.eval(l).det() - 1.0).norm() < 1e-8, "{l}");
        }
    }

    #[test]
    fn residue_relations_hold() {
        let s = DiscreteSpectrum::new(vec![
            Pole { lambda: c(0.3, 1.6), order: 2, betas: vec![c(0.8, 0.1), c(0.2, -0.5)] },
            Pole::simple(c(-1.4, 0.2), c(-0.5, 0.4)),
        ])
        .unwrap();
        let (n, t) = (1, 0.4);
        let sol = reflectionless_solution(&s, n, t).unwrap();
        let model = Reflectionless { spectrum: s.clone() };
        // Contour coefficients of M₁ - h M₂ around each pole vanish.
        for p in &s.poles {
            let r = 1e-2;
            let k = 256;
            for power in 1..=p.order {
                let mut acc = [C64::default(); 2];
                for j in 0..k {
                    let th = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                    let eps = C64::from_polar(r, th);
                    let l = p.lambda + eps;
                    let m = sol.eval(l);
                    let beta: C64 = p.betas.iter().enumerate().map(|(i, b)| b * eps.powu(i as u32) / (1..=i).product::<usize>() as f64).sum();
                    let a = model.a_series(l, 1).unwrap().coeff(0);
                    let h = beta * exp_phi(l, n, t, -1).unwrap() / a;
                    for row in 0..2 {
                        acc[row] += (m.0[row][0] - h * m.0[row][1]) * eps.powu(power as u32) / k as f64;
                    }
                }
                assert!(acc[0].norm() < 1e-8 && acc[1].norm() < 1e-8, "{acc:?}");
            }
        }
    }

    #[test]
    fn field_solves_lattice_equation() {
        let s = one_pole();
        let dt = 1e-4;
        let now = soliton_state(&s, -64, 64, 0.0).unwrap();
        let plus = soliton_field(&s, -64, 64, dt).unwrap();
        let minus = soliton_field(&s, -64, 64, -dt).unwrap();
        let rhs = al_rhs(&now).unwrap();
        let worst = (0..now.len()).map(|k| ((plus[k] - minus[k]) / (2.0 * dt) - rhs[k]).norm()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst:e}");
        assert!(now.q[0].norm() < 1e-9 && now.q[now.len() - 1].norm() < 1e-9);
    }

    #[test]
    fn restricted_field() {
        let s = one_pole();
        assert_eq!(soliton_restricted(&s, 0.3, 0, 1.0).unwrap(), C64::default());
        // λ = 1.5i: Re φ / t = (ρ - 1/ρ) + 2ξ ln ρ vanishes at this ξ.
        let rho: f64 = 1.5;
        let xi = -(rho - rho.recip()) / (2.0 * rho.ln());
        assert_eq!(soliton_restricted(&s, xi, 2, 0.5).unwrap(), soliton_q(&s, 2, 0.5).unwrap());
        let two = DiscreteSpectrum::new(vec![s.poles[0].clone(), Pole::simple(c(2.0, 0.5), c(0.3, 0.0))]).unwrap();
        let mut other = two.clone();
        other.poles[1].betas[0] = c(-5.0, 2.0);
        let a = soliton_restricted(&two, xi, 2, 0.5).unwrap();
        let b = soliton_restricted(&other, xi, 2, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vandermonde_examples() {
        let (_, d) = vandermonde_general(&[c(1.0, 0.0), c(2.0, 0.0)], &[1, 1]).unwrap();
        assert!((d - 1.0).norm() < 1e-14);
        let (_, d) = vandermonde_general(&[c(1.0, 0.0), c(3.0, 0.0)], &[2, 1]).unwrap();
        assert!((d - 4.0).norm() < 1e-13);
        assert!(vandermonde_general(&[c(1.0, 0.0), c(1.0, 0.0)], &[1, 1]).is_err());
        let ls = [c(0.3, 1.2), c(-1.0, 0.4), c(0.8, -0.9)];
        let al = [2, 2, 1];
        let (_, d) = vandermonde_general(&ls, &al).unwrap();
        let w = vandermonde_closed_form(&ls, &al);
        assert!((d - w).norm() < 1e-9 * w.norm());
    }

    #[test]
    fn simple_pole_remover_closed_form() {
        let s = one_pole();
        let model = Reflectionless { spectrum: s.clone() };
        let f = pole_removal(&model, &s).unwrap();
        let l = c(0.0, 1.5);
        let mu = l.conj().inv();
        let f1 = 1.0 * (l - mu);
        let z = c(0.3, -0.8);
        assert!((f.eval(z) - f1 / (z - l)).norm() < 1e-13);
        assert!(f.eval(c(1e6, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn remover_cancels_principal_parts() {
        let s = DiscreteSpectrum::new(vec![
            Pole { lambda: c(0.3, 1.6), order: 2, betas: vec![c(0.8, 0.1), c(0.2, -0.5)] },
            Pole::simple(c(-1.4, 0.2), c(-0.5, 0.4)),
        ])
        .unwrap();
        let model = Reflectionless { spectrum: s.clone() };
        let f = pole_removal(&model, &s).unwrap();
        let (n, t) = (-1, 0.3);
        let sol = reflectionless_solution(&s, n, t).unwrap();
        let k = 256;
        for p in &s.poles {
            for power in 1..=p.order {
                let mut acc = [C64::default(); 2];
                for j in 0..k {
                    let eps = C64::from_polar(1e-2, 2.0 * std::f64::consts::PI * j as f64 / k as f64);
                    let l = p.lambda + eps;
                    let m = sol.eval(l);
                    let fe = f.eval(l) * exp_phi(l, n, t, -1).unwrap();
                    for row in 0..2 {
                        acc[row] += (m.0[row][0] - fe * m.0[row][1]) * eps.powu(power as u32) / k as f64;
                    }
                }
                assert!(acc[0].norm() < 1e-8 && acc[1].norm() < 1e-8, "{power} {acc:?}");
            }
            // Mirror side: M₂ + f̆ e^{φ} M₁ is regular at μ.
            let mu = p.mirror();
            let mut acc = [C64::default(); 2];
            for j in 0..k {
                let eps = C64::from_polar(1e-3, 2.0 * std::f64::consts::PI * j as f64 / k as f64);
                let l = mu + eps;
                let m = sol.eval(l);
                let fe = f.eval_mirror(l) * exp_phi(l, n, t, 1).unwrap();
                for row in 0..2 {
                    acc[row] += (m.0[row][1] + fe * m.0[row][0]) * eps / k as f64;
                }
            }
            assert!(acc[0].norm() < 1e-8 && acc[1].norm() < 1e-8, "mirror {acc:?}");
        }
    }

    #[test]
    fn mirror_laurent_simple() {
        let l = c(0.4, 1.3);
        let h = [c(0.2, -0.7)];
        let mu = l.conj().inv();
        let hb = mirror_laurent(l, &h);
        assert!((hb[0] - h[0].conj() * mu * mu).norm() < 1e-15);
    }

    #[test]
    fn pole_order_does_not_matter() {
        let p1 = Pole { lambda: c(0.3, 1.6), order: 2, betas: vec![c(0.8, 0.1), c(0.2, -0.5)] };
        let p2 = Pole::simple(c(-1.4, 0.2), c(-0.5, 0.4));
        let s1 = DiscreteSpectrum::new(vec![p1.clone(), p2.clone()]).unwrap();
        let s2 = DiscreteSpectrum::new(vec![p2, p1]).unwrap();
        let a = reflectionless_solution(&s1, 2, 0.3).unwrap();
        let b = reflectionless_solution(&s2, 2, 0.3).unwrap();
        for z in [c(0.0, 0.0), c(0.5, -0.2), c(3.0, 1.0)] {
            assert!((a.eval(z) - b.eval(z)).norm_max() < 1e-10);
        }
    }

    #[test]
    fn taylor_matches_eval() {
        let s = one_pole();
        let sol = reflectionless_solution(&s, 1, 0.2).unwrap();
        let z0 = c(0.2, 0.1);
        let tay = sol.taylor(z0, 12);
        let dz = c(0.05, -0.03);
        let mut acc = Mat2::ZERO;
        let mut p = C64::new(1.0, 0.0);
        for m in &tay {
            acc = acc + m.scale(p);
            p *= dz;
        }
        assert!((acc - sol.eval(z0 + dz)).norm_max() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn det_is_one(re in -2.0f64..2.0, im in 1.2f64..2.5, br in -2.0f64..2.0, bi in -2.0f64..2.0,
                      n in -10i64..10, t in 0.0f64..2.0, zr in -3.0f64..3.0, zi in -3.0f64..3.0) {
            let s = DiscreteSpectrum::new(vec![Pole::simple(c(re, im), c(br, bi))]).unwrap();
            let sol = reflectionless_solution(&s, n, t).unwrap();
            let z = c(zr, zi);
            proptest::prop_assume!((z - c(re, im)).norm() > 0.05 && (z - s.poles[0].mirror()).norm() > 0.05);
            proptest::prop_assert!((sol.eval(z).det() - 1.0).norm() < 1e-8);
        }
    }
}
