//! Map-germs, target adaptation, the vector `Λ` cutting out the singular
//! set, and the null vector field `η`.
//!
//! For a corank-one germ the target is first changed linearly so that the
//! first `m-1` components have independent differentials at the origin and the
//! remaining `n-m+1` components have none. `λ_i` is then the determinant of
//! the differentials of `f_1, ..., f_{m-1}, f_{m-1+i}`, and `η` spans the
//! kernel of `d(f_1, ..., f_{m-1})`, so that `η` spans `ker df` along the
//! singular set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::matrix::{jet_det_and_solve, RatMatrix};
use crate::rat::Rat;

/// A map-germ `(R^m, 0) -> (R^n, 0)` given by `n` jets in `m` variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MapJet {
    source_dim: usize,
    order: u32,
    components: Vec<Jet>,
}

impl MapJet {
    /// Components are truncated to their smallest common order. Every
    /// component must vanish at the origin.
    pub fn new(source_dim: usize, components: Vec<Jet>) -> Result<MapJet> {
        if components.is_empty() {
            return Err(Error::Dimension("a map-germ needs at least one component".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if c.num_vars() != source_dim {
                return Err(Error::Dimension(format!(
                    "component {} has {} variables, expected {source_dim}",
                    i + 1,
                    c.num_vars()
                )));
            }
            if !c.constant_term().is_zero() {
                return Err(Error::NonzeroConstant { component: i + 1 });
            }
        }
        let order = components.iter().map(Jet::order).min().unwrap_or(0);
        let components = components.into_iter().map(|c| c.truncate(order)).collect();
        Ok(MapJet { source_dim, order, components })
    }

    pub fn identity(dim: usize, order: u32) -> MapJet {
        let components = (0..dim).map(|k| Jet::var(dim, order, k).expect("index in range")).collect();
        MapJet { source_dim: dim, order, components }
    }

    /// The linear map `x -> M x`.
    pub fn linear(m: &RatMatrix, order: u32) -> MapJet {
        let comps = (0..m.rows())
            .map(|i| {
                let terms = (0..m.cols()).map(|j| {
                    let mut e = vec![0; m.cols()];
                    e[j] = 1;
                    (e, m[(i, j)].clone())
                });
                Jet::from_terms(m.cols(), order, terms).expect("well-formed exponents")
            })
            .collect();
        MapJet { source_dim: m.cols(), order, components: comps }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Jet {
        &self.components[i]
    }

    pub fn truncate(&self, order: u32) -> MapJet {
        let order = order.min(self.order);
        MapJet {
            source_dim: self.source_dim,
            order,
            components: self.components.iter().map(|c| c.truncate(order)).collect(),
        }
    }

    /// `df_0` as an `n x m` matrix.
    pub fn linear_part(&self) -> RatMatrix {
        RatMatrix::from_rows(self.components.iter().map(Jet::differential).collect())
            .expect("components share the variable count")
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MapJet) -> Result<MapJet> {
        if inner.target_dim() != self.source_dim {
            return Err(Error::Dimension(format!(
                "cannot compose a germ on R^{} after a germ into R^{}",
                self.source_dim,
                inner.target_dim()
            )));
        }
        let comps = self
            .components
            .iter()
            .map(|c| c.compose(&inner.components))
            .collect::<Result<Vec<_>>>()?;
        MapJet::new(inner.source_dim, comps)
    }

    /// `T ∘ self` for a constant `n' x n` matrix `T`.
    pub fn apply_linear(&self, t: &RatMatrix) -> Result<MapJet> {
        if t.cols() != self.target_dim() {
            return Err(Error::Dimension("linear map does not match the target".into()));
        }
        let comps = (0..t.rows())
            .map(|i| {
                self.components.iter().enumerate().fold(Jet::zero(self.source_dim, self.order), |acc, (j, c)| {
                    let coeff = &t[(i, j)];
                    if coeff.is_zero() {
                        acc
                    } else {
                        &acc + &c.scale(coeff)
                    }
                })
            })
            .collect();
        MapJet::new(self.source_dim, comps)
    }

    /// Rows of partial derivatives, one per component.
    pub fn jacobian(&self) -> Vec<Vec<Jet>> {
        self.components
            .iter()
            .map(|c| (0..self.source_dim).map(|k| c.derive_unchecked(k)).collect())
            .collect()
    }
}

/// `m - rank df_0`.
pub fn corank_at_origin(f: &MapJet) -> usize {
    f.source_dim() - f.linear_part().rank()
}

/// A germ after a linear change of target coordinates putting it in
/// adapted position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adaptation {
    pub adapted: MapJet,
    /// Invertible `n x n` matrix with `adapted = target_change ∘ f`.
    pub target_change: RatMatrix,
}

/// Chooses target coordinates in which the first `m-1` components have
/// independent differentials at 0 and the others have zero differential.
///
/// Pivot rule: target rows of `df_0` are scanned in order and the first
/// `m-1` rows that raise the rank become the leading coordinates, with their
/// signs kept. Each remaining coordinate has its projection onto those rows
/// subtracted. If the resulting change has negative determinant, the last
/// target coordinate is negated.
pub fn adapt_target(f: &MapJet) -> Result<Adaptation> {
    let m = f.source_dim();
    let n = f.target_dim();
    let df = f.linear_part();
    let corank = m - df.rank();
    if corank != 1 {
        return Err(Error::NotCorankOne(corank));
    }
    let mut pivots: Vec<usize> = Vec::with_capacity(m - 1);
    for i in 0..n {
        if pivots.len() == m - 1 {
            break;
        }
        let mut trial = pivots.clone();
        trial.push(i);
        if df.select_rows(&trial).rank() == trial.len() {
            pivots = trial;
        }
    }
    let rest: Vec<usize> = (0..n).filter(|i| !pivots.contains(i)).collect();
    let mut t = RatMatrix::zeros(n, n);
    for (row, &p) in pivots.iter().enumerate() {
        t[(row, p)] = Rat::one();
    }
    // coefficients c with df[q] = sum_k c_k df[p_k], solved through the
    // pivot columns of the pivot rows
    let pivot_block = df.select_rows(&pivots);
    let (_, pivot_cols) = pivot_block.rref();
    let square = pivot_block.select_cols(&pivot_cols).transpose();
    for (offset, &q) in rest.iter().enumerate() {
        let row = m - 1 + offset;
        t[(row, q)] = Rat::one();
        if m > 1 {
            let rhs: Vec<Rat> = pivot_cols.iter().map(|&c| df[(q, c)].clone()).collect();
            let coeffs = square.solve(&rhs)?;
            for (k, &p) in pivots.iter().enumerate() {
                t[(row, p)] = -&coeffs[k];
            }
        }
    }
    if t.det()?.signum() < 0 {
        for j in 0..n {
            t[(n - 1, j)] = -&t[(n - 1, j)];
        }
    }
    let adapted = f.apply_linear(&t)?;
    Ok(Adaptation { adapted, target_change: t })
}

/// True when the first `m-1` components have independent differentials at
/// the origin and the rest have vanishing differential.
pub fn is_adapted(f: &MapJet) -> bool {
    let m = f.source_dim();
    if f.target_dim() < m {
        return false;
    }
    let df = f.linear_part();
    let head: Vec<usize> = (0..m - 1).collect();
    df.select_rows(&head).rank() == m - 1 && (m - 1..f.target_dim()).all(|i| df.row(i).iter().all(Rat::is_zero))
}

/// Adapted germ with its `Λ`, cofactor field and null vector field.
#[derive(Clone, Debug)]
pub struct LambdaData {
    adaptation: Adaptation,
    lambda: Vec<Jet>,
    cofactor: Vec<Jet>,
    eta: Vec<Jet>,
    free_column: usize,
}

impl LambdaData {
    /// Adapts the target of a corank-one germ and builds `Λ` and `η`.
    pub fn new(f: &MapJet) -> Result<LambdaData> {
        Self::from_adaptation(adapt_target(f)?)
    }

    /// Uses a germ that already is in adapted position, with identity target change.
    pub fn from_adapted(f: &MapJet) -> Result<LambdaData> {
        if !is_adapted(f) {
            return Err(Error::InvalidArgument("germ is not in adapted position".into()));
        }
        let n = f.target_dim();
        Self::from_adaptation(Adaptation { adapted: f.clone(), target_change: RatMatrix::identity(n) })
    }

    fn from_adaptation(adaptation: Adaptation) -> Result<LambdaData> {
        let f = &adaptation.adapted;
        let m = f.source_dim();
        if f.order() < 1 {
            return Err(Error::Truncation { have: f.order(), need: 1 });
        }
        let jac = f.jacobian();
        // the tail has zero differential, so ∂F has valuation >= 1 and the
        // kernel field is only needed one degree below the Jacobian
        let order = f.order().saturating_sub(2);
        let head: Vec<Vec<Jet>> = jac[..m - 1].iter().map(|r| r.iter().map(|d| d.truncate(order)).collect()).collect();
        let j0 = RatMatrix::from_rows(head.iter().map(|r| r.iter().map(Jet::constant_term).collect()).collect())?;
        let (_, pivots) = j0.rref();
        let free_column = (0..m).find(|c| !pivots.contains(c)).ok_or(Error::NotCorankOne(0))?;
        let kept: Vec<usize> = (0..m).filter(|&c| c != free_column).collect();
        let nv = m;

        // η_cof spans the kernel of the head Jacobian; η_cof = η_cof[c] * κ with κ[c] = 1.
        let (minor, kappa) = if m == 1 {
            (Jet::one(nv, order), Vec::new())
        } else {
            let a: Vec<Vec<Jet>> = head.iter().map(|r| kept.iter().map(|&c| r[c].clone()).collect()).collect();
            let b: Vec<Jet> = head.iter().map(|r| -&r[free_column]).collect();
            jet_det_and_solve(&a, &b)?
        };
        let sign = if (m + free_column + 1).is_multiple_of(2) { Rat::one() } else { Rat::from_int(-1) };
        let lead = minor.scale(&sign);
        let mut cofactor = vec![Jet::zero(nv, order); m];
        cofactor[free_column] = lead.clone();
        for (k, &c) in kept.iter().enumerate() {
            cofactor[c] = &lead * &kappa[k];
        }
        // gauge: the free-column component of η is positive at the origin
        let gauge = if lead.constant_term().signum() > 0 { Rat::one() } else { Rat::from_int(-1) };
        let eta: Vec<Jet> = cofactor.iter().map(|c| c.scale(&gauge)).collect();

        // Laplace expansion along the last row: λ_i = Σ_k ∂_k f_{m-1+i} η_cof[k]
        let lambda_order = f.order() - 1;
        let lambda = jac[m - 1..]
            .iter()
            .map(|row| {
                row.iter().zip(&cofactor).fold(Jet::zero(nv, lambda_order), |acc, (d, c)| {
                    if d.is_zero() || c.is_zero() {
                        acc
                    } else {
                        &acc + &d.mul_sharp(c).truncate(lambda_order)
                    }
                })
            })
            .collect();
        Ok(LambdaData { adaptation, lambda, cofactor, eta, free_column })
    }

    pub fn adapted(&self) -> &MapJet {
        &self.adaptation.adapted
    }

    pub fn target_change(&self) -> &RatMatrix {
        &self.adaptation.target_change
    }

    pub fn adaptation(&self) -> &Adaptation {
        &self.adaptation
    }

    /// `(λ_1, ..., λ_{n-m+1})`.
    pub fn lambda(&self) -> &[Jet] {
        &self.lambda
    }

    /// Null vector field in the fixed gauge.
    pub fn eta(&self) -> &[Jet] {
        &self.eta
    }

    /// Signed minors `(-1)^{m+k} det(d(f_1..f_{m-1}) without column k)`.
    pub fn cofactor_field(&self) -> &[Jet] {
        &self.cofactor
    }

    /// Source coordinate along which `η(0)` is normalized to be positive.
    pub fn free_column(&self) -> usize {
        self.free_column
    }

    pub fn source_dim(&self) -> usize {
        self.adaptation.adapted.source_dim()
    }

    /// `n - m + 1`.
    pub fn lambda_len(&self) -> usize {
        self.lambda.len()
    }

    /// Directional derivative `η g`, componentwise.
    pub fn eta_derive(&self, g: &[Jet]) -> Vec<Jet> {
        g.iter()
            .map(|gi| {
                let order = gi.order().saturating_sub(1).min(self.eta[0].order());
                self.eta.iter().enumerate().fold(Jet::zero(gi.num_vars(), order), |acc, (k, e)| {
                    let d = gi.derive_unchecked(k);
                    if d.is_zero() || e.is_zero() {
                        acc
                    } else {
                        &acc + &(e * &d)
                    }
                })
            })
            .collect()
    }

    /// `η^j Λ` for `j = 0..=count-1`.
    pub fn eta_powers(&self, count: usize) -> Vec<Vec<Jet>> {
        let mut out = Vec::with_capacity(count);
        let mut cur = self.lambda.clone();
        for j in 0..count {
            if j > 0 {
                cur = self.eta_derive(&cur);
            }
            out.push(cur.clone());
        }
        out
    }

    /// Values and differential ranks of `Λ, ηΛ, ..., η^{r_max} Λ` at the origin.
    pub fn singular_chain(&self, r_max: usize) -> Result<SingularChainReport> {
        let need = r_max as u32 + 2;
        if self.adapted().order() < need {
            return Err(Error::Truncation { have: self.adapted().order(), need });
        }
        let powers = self.eta_powers(r_max + 1);
        let mut values = Vec::with_capacity(r_max + 1);
        let mut differentials: Vec<Vec<Vec<Rat>>> = Vec::with_capacity(r_max + 1);
        let mut ranks = Vec::with_capacity(r_max + 1);
        let mut stacked: Vec<Vec<Rat>> = Vec::new();
        for p in &powers {
            values.push(p.iter().map(Jet::constant_term).collect());
            let rows: Vec<Vec<Rat>> = p.iter().map(Jet::differential).collect();
            stacked.extend(rows.iter().cloned());
            ranks.push(RatMatrix::from_rows(stacked.clone())?.rank());
            differentials.push(rows);
        }
        Ok(SingularChainReport { eta_lambda_values: values, chain_ranks: ranks, differentials })
    }
}

/// `η^j Λ(0)` and `rank d(Λ, ηΛ, ..., η^j Λ)_0` for `j = 0..=r_max`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularChainReport {
    pub eta_lambda_values: Vec<Vec<Rat>>,
    pub chain_ranks: Vec<usize>,
    /// `differentials[j][i]` is the gradient of `η^j λ_i` at the origin.
    pub differentials: Vec<Vec<Vec<Rat>>>,
}

impl SingularChainReport {
    pub fn r_max(&self) -> usize {
        self.chain_ranks.len().saturating_sub(1)
    }

    /// Whether `η^j Λ(0)` vanishes.
    pub fn vanishes(&self, j: usize) -> bool {
        self.eta_lambda_values[j].iter().all(Rat::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(m: usize, d: u32, k: usize) -> Jet {
        Jet::var(m, d, k).unwrap()
    }

    fn int(v: i64) -> Rat {
        Rat::from_int(v)
    }

    fn umbrella(order: u32) -> MapJet {
        MapJet::new(2, vec![x(2, order, 0), &x(2, order, 0) * &x(2, order, 1), x(2, order, 1).pow(2)]).unwrap()
    }

    fn h02(order: u32) -> MapJet {
        let v = |k| x(4, order, k);
        MapJet::new(
            4,
            vec![
                v(0),
                v(1),
                v(2),
                &(&v(0) * &v(3)) + &(&v(1) * &v(3).pow(2)),
                &(&v(2) * &v(3)) + &v(3).pow(3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn corank_examples() {
        let o = 4;
        let f = MapJet::new(2, vec![x(2, o, 0), x(2, o, 1), x(2, o, 0).pow(2)]).unwrap();
        assert_eq!(corank_at_origin(&f), 0);
        assert_eq!(corank_at_origin(&umbrella(o)), 1);
        let g = MapJet::new(2, vec![x(2, o, 0).pow(2), x(2, o, 1).pow(2), &x(2, o, 0) * &x(2, o, 1)]).unwrap();
        assert_eq!(corank_at_origin(&g), 2);
        assert_eq!(adapt_target(&g).unwrap_err(), Error::NotCorankOne(2));
    }

    #[test]
    fn nonzero_constant_rejected() {
        let bad = &x(1, 2, 0) + &Jet::one(1, 2);
        assert_eq!(MapJet::new(1, vec![x(1, 2, 0), bad]).unwrap_err(), Error::NonzeroConstant { component: 2 });
    }

    #[test]
    fn adapted_input_keeps_identity() {
        let a = adapt_target(&h02(5)).unwrap();
        assert_eq!(a.target_change, RatMatrix::identity(5));
        assert_eq!(a.adapted, h02(5));
    }

    #[test]
    fn adaptation_swaps_and_fixes_sign() {
        // (x1 x2, x1, x2^2): pivot is target 2; the swap is odd so the last row flips
        let o = 4;
        let f = MapJet::new(2, vec![&x(2, o, 0) * &x(2, o, 1), x(2, o, 0), x(2, o, 1).pow(2)]).unwrap();
        let a = adapt_target(&f).unwrap();
        assert_eq!(a.target_change, RatMatrix::from_ints(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, -1]]));
        assert!(a.target_change.det().unwrap().signum() > 0);
        assert!(is_adapted(&a.adapted));
        assert_eq!(a.adapted.component(2), &(-&x(2, o, 1).pow(2)));
    }

    #[test]
    fn adaptation_eliminates_linear_terms() {
        // (x1, x1 + x2^2, x2^3) -> (x1, x2^2, x2^3)
        let o = 4;
        let f = MapJet::new(2, vec![x(2, o, 0), &x(2, o, 0) + &x(2, o, 1).pow(2), x(2, o, 1).pow(3)]).unwrap();
        let a = adapt_target(&f).unwrap();
        assert_eq!(a.target_change, RatMatrix::from_ints(&[&[1, 0, 0], &[-1, 1, 0], &[0, 0, 1]]));
        assert_eq!(a.adapted.component(1), &x(2, o, 1).pow(2));
    }

    #[test]
    fn lambda_of_whitney_umbrella() {
        let ld = LambdaData::new(&umbrella(4)).unwrap();
        assert_eq!(ld.lambda()[0], x(2, 3, 0));
        assert_eq!(ld.lambda()[1], x(2, 3, 1).scale(&int(2)));
        assert_eq!(ld.eta()[0], Jet::zero(2, 2));
        assert_eq!(ld.eta()[1], Jet::one(2, 2));
    }

    #[test]
    fn lambda_of_h02() {
        let ld = LambdaData::new(&h02(5)).unwrap();
        let v = |k| x(4, 4, k);
        assert_eq!(ld.lambda()[0], &v(0) + &(&v(1) * &v(3)).scale(&int(2)));
        assert_eq!(ld.lambda()[1], &v(2) + &v(3).pow(2).scale(&int(3)));
    }

    #[test]
    fn regular_tail_gives_zero_lambda() {
        let o = 3;
        let f = MapJet::new(2, vec![x(2, o, 0), Jet::zero(2, o), Jet::zero(2, o)]).unwrap();
        let ld = LambdaData::new(&f).unwrap();
        assert!(ld.lambda().iter().all(Jet::is_zero));
    }

    #[test]
    fn null_field_kernel_direction() {
        // (x2, x1 x2, x1^2): the kernel of d(x2) is spanned by (1, 0)
        let o = 4;
        let f = MapJet::new(2, vec![x(2, o, 1), &x(2, o, 0) * &x(2, o, 1), x(2, o, 0).pow(2)]).unwrap();
        let ld = LambdaData::new(&f).unwrap();
        assert_eq!(ld.free_column(), 0);
        assert_eq!(ld.eta()[0].constant_term(), int(1));
        assert_eq!(ld.eta()[1].constant_term(), int(0));
    }

    #[test]
    fn eta_derive_examples() {
        let ld = LambdaData::new(&umbrella(4)).unwrap();
        let d = ld.eta_derive(ld.lambda());
        assert_eq!(d[0].constant_term(), int(0));
        assert_eq!(d[1].constant_term(), int(2));
        let consts = vec![Jet::constant(2, 3, int(7))];
        assert!(ld.eta_derive(&consts)[0].is_zero());
    }

    #[test]
    fn singular_chain_examples() {
        // r = 1 normal form: ηΛ(0) = (0, 2), rank dΛ = 2
        let rep = LambdaData::new(&umbrella(4)).unwrap().singular_chain(1).unwrap();
        assert_eq!(rep.eta_lambda_values[1], vec![int(0), int(2)]);
        assert_eq!(rep.chain_ranks[0], 2);

        let rep = LambdaData::new(&h02(5)).unwrap().singular_chain(2).unwrap();
        assert!(rep.vanishes(1));
        assert!(!rep.vanishes(2));
        assert_eq!(rep.eta_lambda_values[2], vec![int(0), int(6)]);
        assert_eq!(rep.chain_ranks, vec![2, 4, 4]);

        // (x1, x2^2, x2^3): Λ = (2 x2, 3 x2^2), ηΛ(0) = (2, 0), rank dΛ = 1
        let o = 4;
        let f = MapJet::new(2, vec![x(2, o, 0), x(2, o, 1).pow(2), x(2, o, 1).pow(3)]).unwrap();
        let rep = LambdaData::new(&f).unwrap().singular_chain(1).unwrap();
        assert_eq!(rep.eta_lambda_values[1], vec![int(2), int(0)]);
        assert_eq!(rep.chain_ranks[0], 1);
    }

    #[test]
    fn singular_chain_needs_order() {
        let ld = LambdaData::new(&umbrella(3)).unwrap();
        assert_eq!(ld.singular_chain(2).unwrap_err(), Error::Truncation { have: 3, need: 4 });
    }
}
