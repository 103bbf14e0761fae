//! Normal forms, isotopy forms, π-rotations and random diffeomorphism jets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::germ::MapJet;
use crate::jet::{monomials_of_degree, Jet, MAX_VARS};
use crate::matrix::RatMatrix;
use crate::rat::Rat;

/// Parameters of `h_{0,r}` and `h_{r,(ε1,ε2)}`: source dimension
/// `m = r(a+1) + extra` and target dimension `n = m + a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormSpec {
    pub r: usize,
    pub a: usize,
    pub extra: usize,
    pub eps1: i8,
    pub eps2: i8,
}

impl FormSpec {
    pub fn new(r: usize, a: usize, extra: usize) -> FormSpec {
        FormSpec { r, a, extra, eps1: 1, eps2: 1 }
    }

    pub fn with_signs(self, eps1: i8, eps2: i8) -> FormSpec {
        FormSpec { eps1, eps2, ..self }
    }

    pub fn m(&self) -> usize {
        self.r * (self.a + 1) + self.extra
    }

    pub fn n(&self) -> usize {
        self.m() + self.a
    }

    pub fn is_suspension(&self) -> bool {
        self.extra > 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.a == 0 {
            return Err(Error::InvalidArgument("r and a must be positive".into()));
        }
        if self.m() > MAX_VARS {
            return Err(Error::InvalidArgument(format!("source dimension {} exceeds {MAX_VARS}", self.m())));
        }
        if !matches!(self.eps1, 1 | -1) || !matches!(self.eps2, 1 | -1) {
            return Err(Error::InvalidArgument("signs must be +1 or -1".into()));
        }
        Ok(())
    }
}

fn check(spec: &FormSpec, order: u32) -> Result<()> {
    spec.validate()?;
    let need = spec.r as u32 + 2;
    if order < need {
        return Err(Error::Truncation { have: order, need });
    }
    Ok(())
}

/// `(x_1, ..., x_{m-1}, h_1, ..., h_{a+1})` where `x_m` is the kernel
/// variable. The variables past `r(a+1) - 1` are regular coordinates only.
fn components(spec: &FormSpec, order: u32) -> Vec<Jet> {
    let (r, a, m) = (spec.r, spec.a, spec.m());
    let x = |k: usize| Jet::var(m, order, k - 1).expect("index in range");
    let xm = x(m);
    let powers: Vec<Jet> = (0..=r + 1).map(|j| xm.pow(j as u32)).collect();
    let mut out: Vec<Jet> = (1..m).map(x).collect();
    for i in 1..=a {
        let h = (1..=r).fold(Jet::zero(m, order), |acc, j| &acc + &(&x((i - 1) * r + j) * &powers[j]));
        out.push(h);
    }
    let last = (1..r).fold(powers[r + 1].clone(), |acc, j| &acc + &(&x(a * r + j) * &powers[j]));
    out.push(last);
    out
}

/// The Morin normal form `h_{0,r}`.
pub fn normal_form(spec: &FormSpec, order: u32) -> Result<MapJet> {
    check(spec, order)?;
    MapJet::new(spec.m(), components(spec, order))
}

/// `h_{r,(ε1,ε2)}`: like `h_{0,r}` with first component `ε1 x_1`,
/// component `m` equal to `ε1 x_1 x_m + Σ_{j>=2} x_j x_m^j`, and last
/// component multiplied by `ε2`.
pub fn isotopy_form(spec: &FormSpec, order: u32) -> Result<MapJet> {
    check(spec, order)?;
    let m = spec.m();
    let mut comps = components(spec, order);
    let e1 = Rat::from_int(spec.eps1 as i64);
    let e2 = Rat::from_int(spec.eps2 as i64);
    if spec.eps1 < 0 {
        comps[0] = comps[0].scale(&e1);
        let x1xm = &Jet::var(m, order, 0)? * &Jet::var(m, order, m - 1)?;
        comps[m - 1] = &comps[m - 1] - &x1xm.scale(&Rat::from_int(2));
    }
    let last = comps.len() - 1;
    comps[last] = comps[last].scale(&e2);
    MapJet::new(m, comps)
}

/// Diagonal linear map negating the coordinates in an even-sized index set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PiRotation {
    pub dim: usize,
    /// 1-based, strictly increasing.
    pub indices: Vec<usize>,
}

impl PiRotation {
    pub fn new(dim: usize, indices: &[usize]) -> Result<PiRotation> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("repeated index in a pi-rotation".into()));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i == 0 || i > dim) {
            return Err(Error::IndexOutOfRange { index: bad, num_vars: dim });
        }
        if !idx.len().is_multiple_of(2) {
            return Err(Error::OddRotation(idx.len()));
        }
        Ok(PiRotation { dim, indices: idx })
    }

    pub fn matrix(&self) -> RatMatrix {
        let diag: Vec<Rat> =
            (1..=self.dim).map(|i| Rat::from_int(if self.indices.contains(&i) { -1 } else { 1 })).collect();
        RatMatrix::diagonal(&diag)
    }

    pub fn to_map_jet(&self, order: u32) -> MapJet {
        MapJet::linear(&self.matrix(), order)
    }

    pub fn is_identity(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The π-rotation of `indices` (1-based) as a linear jet.
pub fn pi_rotation(dim: usize, indices: &[usize], order: u32) -> Result<MapJet> {
    Ok(PiRotation::new(dim, indices)?.to_map_jet(order))
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let num = rng.gen_range(-3i64..=3);
        if num != 0 {
            return Rat::new(num, rng.gen_range(1i64..=2));
        }
    }
}

/// Random diffeomorphism jet `(R^dim, 0) -> (R^dim, 0)` whose components
/// are polynomials of degree at most `degree`, stored at truncation order
/// `order`. Coefficients are `p/q` with `p` in `-3..=3` and `q` in `{1, 2}`;
/// each nonlinear monomial is present with probability 0.3.
pub fn random_diffeo(dim: usize, degree: u32, order: u32, seed: u64, orientation_preserving: bool) -> MapJet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lin = loop {
        let rows: Vec<Vec<Rat>> = (0..dim)
            .map(|_| (0..dim).map(|_| if rng.gen_bool(0.5) { random_coeff(&mut rng) } else { Rat::zero() }).collect())
            .collect();
        let mtx = RatMatrix::from_rows(rows).expect("square");
        if !mtx.det().expect("square").is_zero() {
            break mtx;
        }
    };
    if orientation_preserving && lin.det().expect("square").signum() < 0 {
        for j in 0..dim {
            lin[(0, j)] = -&lin[(0, j)];
        }
    }
    let nonlinear: Vec<_> = (2..=degree.min(order)).flat_map(|d| monomials_of_degree(dim, d)).collect();
    let comps = (0..dim)
        .map(|i| {
            let mut terms: Vec<(Vec<u32>, Rat)> = (0..dim)
                .filter(|&j| !lin[(i, j)].is_zero())
                .map(|j| {
                    let mut e = vec![0; dim];
                    e[j] = 1;
                    (e, lin[(i, j)].clone())
                })
                .collect();
            for mono in &nonlinear {
                if rng.gen_bool(0.3) {
                    terms.push((mono.exponents(dim), random_coeff(&mut rng)));
                }
            }
            Jet::from_terms(dim, order, terms).expect("valid exponents")
        })
        .collect();
    MapJet::new(dim, comps).expect("zero constant terms")
}

/// Inverse of a diffeomorphism jet to its truncation order.
pub fn invert_diffeo(phi: &MapJet) -> Result<MapJet> {
    let dim = phi.source_dim();
    if phi.target_dim() != dim {
        return Err(Error::Dimension("a diffeomorphism must be square".into()));
    }
    let lin = phi.linear_part();
    let inv = lin.inverse()?;
    let order = phi.order();
    let linear_map = MapJet::linear(&lin, order);
    // φ = L + N, so ψ = L^{-1}(y - N(ψ))
    let nonlinear: Vec<Jet> =
        phi.components().iter().zip(linear_map.components()).map(|(p, l)| p - l).collect();
    let nonlinear = MapJet::new(dim, nonlinear)?;
    let id = MapJet::identity(dim, order);
    let mut psi = MapJet::linear(&inv, order);
    for _ in 1..order {
        let n_psi = nonlinear.compose(&psi)?;
        let rhs: Vec<Jet> = id.components().iter().zip(n_psi.components()).map(|(y, n)| y - n).collect();
        psi = MapJet::new(dim, rhs)?.apply_linear(&inv)?;
    }
    Ok(psi)
}

/// `Φ ∘ f ∘ φ`.
pub fn conjugate(f: &MapJet, phi: &MapJet, big_phi: &MapJet) -> Result<MapJet> {
    big_phi.compose(&f.compose(phi)?)
}
