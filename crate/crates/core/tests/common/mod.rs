#![allow(dead_code)]

use morin_core::jet::monomials_of_degree;
use morin_core::parse::{Expr, GermSource};
use morin_core::{Jet, MapJet, Rat, RatMatrix};
use rand::Rng;

pub fn small_rat<R: Rng>(rng: &mut R) -> Rat {
    Rat::new(rng.gen_range(-4i64..=4), rng.gen_range(1i64..=3))
}

/// Sparse random jet with `terms` monomials of degree in `lo..=hi`.
pub fn sparse_jet<R: Rng>(rng: &mut R, nv: usize, order: u32, lo: u32, hi: u32, terms: usize) -> Jet {
    let mut out = Jet::zero(nv, order);
    for _ in 0..terms {
        let deg = rng.gen_range(lo..=hi.min(order));
        let monos = monomials_of_degree(nv, deg);
        let m = monos[rng.gen_range(0..monos.len())];
        let t = Jet::from_terms(nv, order, [(m.exponents(nv), small_rat(rng))]).unwrap();
        out = &out + &t;
    }
    out
}

/// Random integer matrix with nonzero determinant.
pub fn invertible<R: Rng>(rng: &mut R, n: usize) -> RatMatrix {
    loop {
        let rows = (0..n).map(|_| (0..n).map(|_| Rat::from_int(rng.gen_range(-2..=2))).collect()).collect();
        let m = RatMatrix::from_rows(rows).unwrap();
        if !m.det().unwrap().is_zero() {
            return m;
        }
    }
}

/// Determinant of the gradients of the given components, rows in order.
pub fn gradient_det(f: &MapJet, rows: &[usize]) -> Jet {
    let jac = f.jacobian();
    let mat: Vec<Vec<Jet>> = rows.iter().map(|&i| jac[i].clone()).collect();
    morin_core::matrix::jet_det(&mat).unwrap()
}

fn random_expr<R: Rng>(rng: &mut R, m: usize, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return if rng.gen_bool(0.6) {
            Expr::Var(rng.gen_range(0..m))
        } else {
            let num = rng.gen_range(0i64..=12);
            let den = if rng.gen_bool(0.3) { rng.gen_range(2i64..=7) } else { 1 };
            Expr::Num(Rat::new(num, den))
        };
    }
    let sub = |rng: &mut R| Box::new(random_expr(rng, m, depth - 1));
    match rng.gen_range(0..5) {
        0 => Expr::Neg(sub(rng)),
        1 => Expr::Add(sub(rng), sub(rng)),
        2 => Expr::Sub(sub(rng), sub(rng)),
        3 => Expr::Mul(sub(rng), sub(rng)),
        _ => Expr::Pow(sub(rng), rng.gen_range(1..=3)),
    }
}

/// Random germ file contents with zero constant terms.
pub fn random_germ_source<R: Rng>(rng: &mut R) -> GermSource {
    let m = rng.gen_range(1..=4);
    let n = rng.gen_range(1..=5);
    let order = rng.gen_range(1..=5);
    let exprs = (0..n)
        .map(|_| {
            let e = random_expr(rng, m, 4);
            let c = e.to_jet(m, order).constant_term();
            match c.signum() {
                0 => e,
                s if s > 0 => Expr::Sub(Box::new(e), Box::new(Expr::Num(c))),
                _ => Expr::Add(Box::new(e), Box::new(Expr::Num(c.abs()))),
            }
        })
        .collect();
    GermSource { m, n, order, exprs }
}
