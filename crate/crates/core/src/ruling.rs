//! One-parameter families of `n`-planes in `R^{2n}`:
//! `F(t, u) = γ(t) + Σ u_i δ_i(t)`, their striction curves, and the
//! 1-Morin criterion along them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{morin_classify, Verdict};
use crate::error::{Error, Result};
use crate::germ::{LambdaData, MapJet};
use crate::jet::Jet;
use crate::matrix::{jet_det, jet_matrix_solve, RatMatrix};
use crate::parse::FramedSource;
use crate::rat::Rat;

/// Base curve `γ` and director frame `δ_1, ..., δ_n`, all jets in `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramedCurve {
    n: usize,
    order: u32,
    gamma: Vec<Jet>,
    delta: Vec<Vec<Jet>>,
}

fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let order = a.iter().chain(b).map(Jet::order).min().unwrap_or(0);
    a.iter().zip(b).fold(Jet::zero(1, order), |acc, (x, y)| &acc + &(x * y))
}

fn derive_t(v: &[Jet]) -> Vec<Jet> {
    v.iter().map(|c| c.derive_unchecked(0)).collect()
}

impl FramedCurve {
    /// Checks `δ_i·δ_j = δ_ij`, `δ_i·δ_j' = 0` and that `(δ, δ')(0)` is a basis.
    pub fn new(gamma: Vec<Jet>, delta: Vec<Vec<Jet>>) -> Result<FramedCurve> {
        let n = delta.len();
        if n == 0 {
            return Err(Error::Frame("the frame is empty".into()));
        }
        if gamma.len() != 2 * n || delta.iter().any(|d| d.len() != 2 * n) {
            return Err(Error::Frame(format!("with {n} frame vectors every curve needs {} components", 2 * n)));
        }
        if gamma.iter().chain(delta.iter().flatten()).any(|j| j.num_vars() != 1) {
            return Err(Error::Frame("curves must be jets in the single variable t".into()));
        }
        let order = gamma.iter().chain(delta.iter().flatten()).map(Jet::order).min().unwrap_or(0);
        if order < 1 {
            return Err(Error::Truncation { have: order, need: 1 });
        }
        let gamma: Vec<Jet> = gamma.iter().map(|j| j.truncate(order)).collect();
        let delta: Vec<Vec<Jet>> = delta.iter().map(|d| d.iter().map(|j| j.truncate(order)).collect()).collect();
        let fc = FramedCurve { n, order, gamma, delta };
        let dp: Vec<Vec<Jet>> = fc.delta.iter().map(|d| derive_t(d)).collect();
        for i in 0..n {
            for j in 0..n {
                let g = dot(&fc.delta[i], &fc.delta[j]);
                let expect = if i == j { Jet::one(1, order) } else { Jet::zero(1, order) };
                if g != expect {
                    return Err(Error::Frame(format!("delta{}·delta{} = {g}, expected {expect}", i + 1, j + 1)));
                }
                let h = dot(&fc.delta[i], &dp[j]);
                if !h.is_zero() {
                    return Err(Error::Frame(format!("delta{}·delta{}' = {h}, expected 0", i + 1, j + 1)));
                }
            }
        }
        if fc.frame_matrix_at_zero().rank() < 2 * n {
            return Err(Error::Frame("(delta, delta')(0) is not a basis".into()));
        }
        Ok(fc)
    }

    pub fn from_source(src: &FramedSource) -> Result<FramedCurve> {
        let gamma = src.gamma.iter().map(|e| e.to_jet(1, src.order)).collect();
        let delta = src.delta.iter().map(|d| d.iter().map(|e| e.to_jet(1, src.order)).collect()).collect();
        FramedCurve::new(gamma, delta)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn gamma(&self) -> &[Jet] {
        &self.gamma
    }

    pub fn delta(&self) -> &[Vec<Jet>] {
        &self.delta
    }

    /// Same frame with another base curve.
    pub fn with_gamma(&self, gamma: Vec<Jet>) -> Result<FramedCurve> {
        FramedCurve::new(gamma, self.delta.clone())
    }

    /// Columns `δ_1(0), ..., δ_n(0), δ_1'(0), ..., δ_n'(0)`.
    pub fn frame_matrix_at_zero(&self) -> RatMatrix {
        let cols: Vec<Vec<Rat>> = self
            .delta
            .iter()
            .map(|d| d.iter().map(Jet::constant_term).collect())
            .chain(self.delta.iter().map(|d| d.iter().map(|c| c.linear_coeff(0)).collect()))
            .collect();
        RatMatrix::from_rows(cols).expect("rectangular").transpose()
    }

    /// `Δ = det(δ, δ')(0)`.
    pub fn delta_det(&self) -> Rat {
        self.frame_matrix_at_zero().det().expect("square")
    }
}

/// `F(t, u) - γ(0)` as a germ in the variables `(t, u_1, ..., u_n)`.
pub fn ruling_map(fc: &FramedCurve) -> Result<MapJet> {
    let (n, d) = (fc.n, fc.order);
    let nv = n + 1;
    let comps = (0..2 * n)
        .map(|k| {
            let g = &fc.gamma[k];
            let mut acc = &g.embed(nv, &[0])? - &Jet::constant(nv, d, g.constant_term());
            for i in 0..n {
                let u = Jet::var(nv, d, i + 1)?;
                acc = &acc + &u.mul_sharp(&fc.delta[i][k].embed(nv, &[0])?).truncate(d);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    MapJet::new(nv, comps)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrictionResult {
    /// `u_i(t)` with `σ = γ + Σ u_i δ_i`.
    pub u: Vec<Jet>,
    pub sigma: Vec<Jet>,
    /// `α_i = σ'·δ_i`, so that `σ' = Σ α_i δ_i`.
    pub alpha: Vec<Jet>,
    pub morin1_at_origin: bool,
}

/// Striction curve `σ` with `σ'·δ_i' ≡ 0`.
pub fn striction(fc: &FramedCurve) -> Result<StrictionResult> {
    let n = fc.n;
    let dp: Vec<Vec<Jet>> = fc.delta.iter().map(|d| derive_t(d)).collect();
    let gp = derive_t(&fc.gamma);
    let gram: Vec<Vec<Jet>> = (0..n).map(|i| (0..n).map(|j| dot(&dp[i], &dp[j])).collect()).collect();
    let rhs: Vec<Jet> = (0..n).map(|i| -&dot(&gp, &dp[i])).collect();
    let u = jet_matrix_solve(&gram, &rhs).map_err(|e| match e {
        Error::Singular => Error::Frame("the Gram matrix of delta' is singular at 0".into()),
        other => other,
    })?;
    let order = fc.order - 1;
    let sigma: Vec<Jet> = (0..2 * n)
        .map(|k| (0..n).fold(fc.gamma[k].truncate(order), |acc, i| &acc + &(&u[i] * &fc.delta[i][k])))
        .collect();
    let sp = derive_t(&sigma);
    let alpha: Vec<Jet> = fc.delta.iter().map(|d| dot(&sp, d)).collect();
    let morin1_at_origin = alpha.iter().any(|a| !a.constant_term().is_zero());
    Ok(StrictionResult { u, sigma, alpha, morin1_at_origin })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulingCheck {
    pub striction: StrictionResult,
    /// Classifier verdict for the ruling map rebased on the striction curve.
    pub verdict: Verdict,
    pub classifier_morin1: bool,
    pub alpha_morin1: bool,
    pub agree: bool,
    /// `ηλ_j(0)` with `λ_j = det(F_t, δ, δ' without δ_j')` and `η = -∂t + Σ α_i ∂u_i`.
    pub eta_lambda: Vec<Rat>,
    /// `(-1)^{n+j-1} α_j(0) Δ`.
    pub predicted: Vec<Rat>,
    pub delta_det: Rat,
    pub identity_holds: bool,
}

/// Compares the classifier with the immersion test for the striction curve
/// at `t = 0`, and checks `ηλ_j(0) = (-1)^{n+j-1} α_j(0) Δ`.
pub fn ruling_morin1_check(fc: &FramedCurve) -> Result<RulingCheck> {
    if fc.order < 4 {
        return Err(Error::Truncation { have: fc.order, need: 4 });
    }
    let n = fc.n;
    let st = striction(fc)?;
    let rebased = fc.with_gamma(st.sigma.clone())?;
    let verdict = morin_classify(&ruling_map(&rebased)?, 1)?.verdict;
    let classifier_morin1 = verdict == Verdict::Morin { r: 1 };
    let alpha_morin1 = st.morin1_at_origin;

    // λ_j in (t, u) with γ replaced by σ
    let nv = n + 1;
    let d = rebased.order;
    let emb = |j: &Jet| j.embed(nv, &[0]).expect("one variable");
    let gp = derive_t(&rebased.gamma);
    let dp: Vec<Vec<Jet>> = rebased.delta.iter().map(|v| derive_t(v)).collect();
    let ft: Vec<Jet> = (0..2 * n)
        .map(|k| {
            (0..n).fold(emb(&gp[k]), |acc, i| {
                let u = Jet::var(nv, d, i + 1).expect("index in range");
                &acc + &u.mul_sharp(&emb(&dp[i][k])).truncate(d - 1)
            })
        })
        .collect();
    let alpha_emb: Vec<Jet> = st.alpha.iter().map(&emb).collect();
    let delta_det = fc.delta_det();
    let mut eta_lambda = Vec::with_capacity(n);
    let mut predicted = Vec::with_capacity(n);
    for j in 0..n {
        let mut cols: Vec<Vec<Jet>> = vec![ft.clone()];
        cols.extend(rebased.delta.iter().map(|v| v.iter().map(&emb).collect()));
        cols.extend((0..n).filter(|&i| i != j).map(|i| dp[i].iter().map(&emb).collect()));
        let rows: Vec<Vec<Jet>> = (0..2 * n).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        let lambda = jet_det(&rows)?;
        let mut val = -&lambda.derive_unchecked(0).constant_term();
        for (i, a) in alpha_emb.iter().enumerate() {
            val = &val + &(&a.constant_term() * &lambda.derive_unchecked(i + 1).constant_term());
        }
        eta_lambda.push(val);
        let sign = if (n + j).is_multiple_of(2) { Rat::one() } else { Rat::from_int(-1) };
        predicted.push(&(&sign * &st.alpha[j].constant_term()) * &delta_det);
    }
    let identity_holds = eta_lambda == predicted;
    Ok(RulingCheck {
        agree: classifier_morin1 == alpha_morin1,
        striction: st,
        verdict,
        classifier_morin1,
        alpha_morin1,
        eta_lambda,
        predicted,
        delta_det,
        identity_holds,
    })
}

/// `Λ` of the ruling map at `(0, u(0))` restricted to the curve
/// `t -> (t, u(t) - u(0))`. Vanishes identically when the striction
/// curve is the singular set.
pub fn lambda_along_striction(fc: &FramedCurve) -> Result<Vec<Jet>> {
    let st = striction(fc)?;
    let n = fc.n;
    let u0: Vec<Rat> = st.u.iter().map(Jet::constant_term).collect();
    let shifted: Vec<Jet> = (0..2 * n)
        .map(|k| (0..n).fold(fc.gamma[k].clone(), |acc, i| &acc + &fc.delta[i][k].scale(&u0[i])))
        .collect();
    let f = ruling_map(&fc.with_gamma(shifted)?)?;
    let ld = LambdaData::new(&f)?;
    let order = ld.lambda()[0].order().min(fc.order - 1);
    let mut curve = vec![Jet::var(1, order, 0)?];
    curve.extend(st.u.iter().zip(&u0).map(|(u, c)| &u.truncate(order) - &Jet::constant(1, order, c.clone())));
    ld.lambda().iter().map(|l| l.compose(&curve)).collect()
}

/// `δ_1 = (cos t, sin t, 0, 0)`, `δ_2 = (0, 0, cos t, sin t)` and the base
/// curve `γ` with `γ' = δ_1`, `γ(0) = 0`, as jets of the given order.
pub fn rotation_frame(order: u32) -> FramedCurve {
    let mut cos = Jet::zero(1, order);
    let mut sin = Jet::zero(1, order);
    let mut fact = Rat::one();
    for k in 0..=order {
        if k > 0 {
            fact = &fact * &Rat::from_int(k as i64);
        }
        let sign = if (k / 2) % 2 == 0 { Rat::one() } else { Rat::from_int(-1) };
        let term = Jet::from_terms(1, order, [(vec![k], &sign / &fact)]).expect("one variable");
        if k % 2 == 0 {
            cos = &cos + &term;
        } else {
            sin = &sin + &term;
        }
    }
    let gamma2 = &Jet::one(1, order) - &cos;
    let zero = Jet::zero(1, order);
    let delta = vec![
        vec![cos.clone(), sin.clone(), zero.clone(), zero.clone()],
        vec![zero.clone(), zero.clone(), cos, sin.clone()],
    ];
    let gamma = vec![sin, gamma2, zero.clone(), zero];
    FramedCurve::new(gamma, delta).expect("rotation frame is orthonormal")
}

fn small(rng: &mut ChaCha8Rng) -> Rat {
    Rat::new(rng.gen_range(-3i64..=3), rng.gen_range(1i64..=2))
}

/// Random framed curve with an exactly orthonormal frame obtained from
/// `Q' = QΩ`, `Ω = [[0, -Bᵀ], [B, 0]]`, `δ_i = Q e_i`. When `stationary`
/// is set, `γ'(0) = 0` and `γ''(0)` lies in the span of `δ(0)`, so the
/// striction curve is not an immersion at 0.
pub fn random_framed_curve(n: usize, order: u32, seed: u64, stationary: bool) -> FramedCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 * n;
    // Cayley transform of a random skew matrix gives a rational orthogonal Q(0)
    let mut skew = RatMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i + 1..dim {
            let v = small(&mut rng);
            skew[(i, j)] = v.clone();
            skew[(j, i)] = -&v;
        }
    }
    let id = RatMatrix::identity(dim);
    let minus = RatMatrix::from_rows((0..dim).map(|i| (0..dim).map(|j| &id[(i, j)] - &skew[(i, j)]).collect()).collect())
        .expect("square");
    let plus = RatMatrix::from_rows((0..dim).map(|i| (0..dim).map(|j| &id[(i, j)] + &skew[(i, j)]).collect()).collect())
        .expect("square");
    let q0 = minus.mul(&plus.inverse().expect("I + S is invertible for skew S")).expect("square");
    // B(t) = B_0 + B_1 t + ..., with B_0 invertible
    let b: Vec<RatMatrix> = (0..order)
        .map(|k| loop {
            let m = RatMatrix::from_rows((0..n).map(|_| (0..n).map(|_| small(&mut rng)).collect()).collect())
                .expect("square");
            if k > 0 || !m.det().expect("square").is_zero() {
                break m;
            }
        })
        .collect();
    let omega: Vec<RatMatrix> = b
        .iter()
        .map(|bk| {
            let mut w = RatMatrix::zeros(dim, dim);
            for i in 0..n {
                for j in 0..n {
                    w[(n + i, j)] = bk[(i, j)].clone();
                    w[(j, n + i)] = -&bk[(i, j)];
                }
            }
            w
        })
        .collect();
    // (k+1) Q_{k+1} = Σ_{i+j=k} Q_i Ω_j
    let mut q = vec![q0];
    for k in 0..order as usize {
        let mut acc = RatMatrix::zeros(dim, dim);
        for i in 0..=k {
            let prod = q[i].mul(&omega[k - i]).expect("square");
            for r in 0..dim {
                for c in 0..dim {
                    acc[(r, c)] = &acc[(r, c)] + &prod[(r, c)];
                }
            }
        }
        let scale = Rat::new(1, k as i64 + 1);
        for r in 0..dim {
            for c in 0..dim {
                acc[(r, c)] = &acc[(r, c)] * &scale;
            }
        }
        q.push(acc);
    }
    let entry = |r: usize, c: usize| {
        Jet::from_terms(1, order, (0..=order as usize).map(|k| (vec![k as u32], q[k][(r, c)].clone())))
            .expect("one variable")
    };
    let delta: Vec<Vec<Jet>> = (0..n).map(|i| (0..dim).map(|r| entry(r, i)).collect()).collect();
    let gamma: Vec<Jet> = if stationary {
        // γ = t^2/2 Σ c_i δ_i(0) + higher-order noise
        let c: Vec<Rat> = (0..n).map(|_| small(&mut rng)).collect();
        (0..dim)
            .map(|r| {
                let quad = (0..n).fold(Rat::zero(), |acc, i| &acc + &(&c[i] * &q[0][(r, i)]));
                let mut terms = vec![(vec![2], &quad * &Rat::new(1, 2))];
                for k in 3..=order {
                    terms.push((vec![k], small(&mut rng)));
                }
                Jet::from_terms(1, order, terms).expect("one variable")
            })
            .collect()
    } else {
        (0..dim)
            .map(|_| Jet::from_terms(1, order, (1..=order).map(|k| (vec![k], small(&mut rng)))).expect("one variable"))
            .collect()
    };
    FramedCurve::new(gamma, delta).expect("frame is orthonormal by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(order: u32) -> Jet {
        Jet::var(1, order, 0).unwrap()
    }

    #[test]
    fn rotation_example_ruling_map() {
        let fc = rotation_frame(4);
        assert_eq!(fc.delta_det(), Rat::from_int(-1));
        let zero = vec![Jet::zero(1, 4); 4];
        let f = ruling_map(&fc.with_gamma(zero).unwrap()).unwrap();
        assert_eq!(f.component(0).to_string(), "x2 - 1/2*x1^2*x2");
        assert_eq!(f.component(3).to_string(), "x1*x3 - 1/6*x1^3*x3");
    }

    #[test]
    fn striction_examples() {
        let fc = rotation_frame(4);
        let st = striction(&fc).unwrap();
        assert!(st.u.iter().all(Jet::is_zero));
        assert_eq!(st.alpha[0].constant_term(), Rat::one());
        assert_eq!(st.alpha[1].constant_term(), Rat::zero());
        assert!(st.morin1_at_origin);

        let shifted: Vec<Jet> = (0..4).map(|k| &fc.gamma()[k] + &fc.delta()[0][k]).collect();
        let st2 = striction(&fc.with_gamma(shifted).unwrap()).unwrap();
        assert_eq!(st2.u[0], Jet::constant(1, 3, Rat::from_int(-1)));
        assert!(st2.u[1].is_zero());
        let g: Vec<Jet> = fc.gamma().iter().map(|c| c.truncate(3)).collect();
        assert_eq!(st2.sigma, g);

        let still = striction(&fc.with_gamma(vec![Jet::zero(1, 4); 4]).unwrap()).unwrap();
        assert!(!still.morin1_at_origin);
    }

    #[test]
    fn frame_errors() {
        let o = 3;
        let one = Jet::one(1, o);
        let zero = Jet::zero(1, o);
        let constant = vec![
            vec![one.clone(), zero.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), zero.clone(), one.clone(), zero.clone()],
        ];
        let e = FramedCurve::new(vec![zero.clone(); 4], constant).unwrap_err();
        assert!(matches!(e, Error::Frame(_)));
        let not_unit = vec![
            vec![one.scale(&Rat::from_int(2)), t(o), zero.clone(), zero.clone()],
            vec![zero.clone(), zero.clone(), one.clone(), t(o)],
        ];
        assert!(matches!(FramedCurve::new(vec![zero.clone(); 4], not_unit), Err(Error::Frame(_))));
    }

    #[test]
    fn morin1_check_on_examples() {
        let c = ruling_morin1_check(&rotation_frame(4)).unwrap();
        assert!(c.classifier_morin1 && c.alpha_morin1 && c.agree && c.identity_holds);
        assert_eq!(c.predicted, c.eta_lambda);
        assert_eq!(c.eta_lambda, vec![Rat::from_int(-1), Rat::zero()]);
        let still = rotation_frame(4).with_gamma(vec![Jet::zero(1, 4); 4]).unwrap();
        let c = ruling_morin1_check(&still).unwrap();
        assert!(!c.classifier_morin1 && !c.alpha_morin1 && c.identity_holds);
    }

    #[test]
    fn random_frames_are_valid() {
        for seed in 0..4 {
            let fc = random_framed_curve(2, 4, seed, seed % 2 == 1);
            let st = striction(&fc).unwrap();
            assert_eq!(st.morin1_at_origin, seed % 2 == 0);
            assert!(lambda_along_striction(&fc).unwrap().iter().all(Jet::is_zero));
        }
    }
}
