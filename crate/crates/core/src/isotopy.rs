//! The sign invariant `D`, isotopy class counts, and π-rotation witnesses
//! between isotopy forms.

use serde::{Deserialize, Serialize};

use crate::classify::{morin_classify, Verdict};
use crate::error::{Error, Result};
use crate::forms::{isotopy_form, FormSpec, PiRotation};
use crate::germ::{LambdaData, MapJet};
use crate::matrix::RatMatrix;

/// Which sign of `h_{r,(ε1,ε2)}` separates the two isotopy classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantLabel {
    Eps1,
    Eps2,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotopyReport {
    pub r: usize,
    pub a: usize,
    /// `r mod 4`.
    pub case_id: usize,
    pub suspension: bool,
    pub class_count: usize,
    pub invariant_label: InvariantLabel,
    /// Sign of `D` for a concrete germ; absent for suspensions or when no
    /// germ was supplied.
    pub d_sign: Option<i8>,
    /// Change of `D` when `η(0)` is reversed: `(-1)^{(r-1)r(a+1)/2}`.
    pub frame_factor: i8,
    /// Change of `D` under a target change reversing the orientation of the
    /// first `m-1` coordinates: `(-1)^{ar}`.
    pub target_factor: i8,
    pub gauge_note: String,
}

const GAUGE_NOTE: &str = "target adapted by the pivot rule with det T > 0; eta from the cofactor \
field, sign fixed so its free-column component is positive at 0; rows of the determinant ordered \
by component of Lambda, then by power of eta";

fn sign_pow(exp: usize) -> i8 {
    if exp.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Class count and invariant for the `A`-class of `r`-Morin germs with `a = n - m`.
pub fn isotopy_classify(r: usize, a: usize, suspension: bool) -> Result<IsotopyReport> {
    if r == 0 || a == 0 {
        return Err(Error::InvalidArgument("r and a must be positive".into()));
    }
    let frame_factor = sign_pow((r - 1) * r * (a + 1) / 2);
    let target_factor = sign_pow(a * r);
    let two = !suspension && frame_factor == 1 && target_factor == 1;
    let e1 = (a + 1) * r + 1;
    let invariant_label = match (two, e1 % 2, r % 2) {
        (false, _, _) => InvariantLabel::None,
        (true, 1, 0) => InvariantLabel::Eps1,
        (true, 0, 1) => InvariantLabel::Eps2,
        _ => return Err(Error::Inconsistent(format!("no sign label for r = {r}, a = {a}"))),
    };
    Ok(IsotopyReport {
        r,
        a,
        case_id: r % 4,
        suspension,
        class_count: if two { 2 } else { 1 },
        invariant_label,
        d_sign: None,
        frame_factor,
        target_factor,
        gauge_note: GAUGE_NOTE.to_string(),
    })
}

/// `sign det d(Λ, ηΛ, ..., η^{r-1}Λ)_0` for an `r`-Morin germ with `m = r(n-m+1)`.
///
/// Rows are grouped by component: `dλ_1, d(ηλ_1), ..., d(η^{r-1}λ_1)`, then
/// the same for `λ_2`, and so on.
pub fn d_invariant(f: &MapJet, r: usize) -> Result<i8> {
    let (m, n) = (f.source_dim(), f.target_dim());
    if m >= n {
        return Err(Error::Dimension(format!("need m < n, got m = {m}, n = {n}")));
    }
    let width = n - m + 1;
    if m > r * width {
        return Err(Error::NotApplicable(format!("suspension case m = {m} > r(n-m+1) = {}", r * width)));
    }
    if m < r * width {
        return Err(Error::NotApplicable(format!("an {r}-Morin germ needs m >= {}", r * width)));
    }
    let verdict = morin_classify(f, r)?.verdict;
    if verdict != (Verdict::Morin { r }) {
        return Err(Error::NotApplicable(format!("germ is not {r}-Morin ({verdict})")));
    }
    let ld = LambdaData::new(&f.truncate(r as u32 + 2))?;
    let powers = ld.eta_powers(r);
    let rows = (0..width).flat_map(|i| powers.iter().map(move |p| p[i].differential())).collect();
    let det = RatMatrix::from_rows(rows)?.det()?;
    match det.signum() {
        0 => Err(Error::Inconsistent("determinant vanishes for a Morin germ".into())),
        s => Ok(s as i8),
    }
}

/// Class data for a concrete `r`-Morin germ, including `D` when defined.
pub fn isotopy_of_germ(f: &MapJet, r: usize) -> Result<IsotopyReport> {
    let (m, n) = (f.source_dim(), f.target_dim());
    if m >= n {
        return Err(Error::Dimension(format!("need m < n, got m = {m}, n = {n}")));
    }
    let a = n - m;
    let suspension = m > r * (a + 1);
    let mut report = isotopy_classify(r, a, suspension)?;
    if !suspension {
        report.d_sign = Some(d_invariant(f, r)?);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Source,
    Target,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub side: Side,
    pub rotation: PiRotation,
}

/// A sequence of π-rotations taking `h_{r,from}` to `h_{r,to}`. Source
/// steps replace `g` by `g ∘ R`, target steps by `R ∘ g`, in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub spec: FormSpec,
    /// `(ε1, ε2)` of the starting form.
    pub from: (i8, i8),
    /// `(ε1, ε2)` of the resulting form; `(1, 1)` is `h_{0,r}`.
    pub to: (i8, i8),
    pub steps: Vec<WitnessStep>,
}

impl Witness {
    pub fn source_rotations(&self) -> Vec<&PiRotation> {
        self.steps.iter().filter(|s| s.side == Side::Source).map(|s| &s.rotation).collect()
    }

    pub fn target_rotations(&self) -> Vec<&PiRotation> {
        self.steps.iter().filter(|s| s.side == Side::Target).map(|s| &s.rotation).collect()
    }

    pub fn apply(&self, f: &MapJet) -> Result<MapJet> {
        let mut g = f.clone();
        for step in &self.steps {
            g = match step.side {
                Side::Source => g.compose(&step.rotation.to_map_jet(g.order()))?,
                Side::Target => g.apply_linear(&step.rotation.matrix())?,
            };
        }
        Ok(g)
    }

    /// Applies the steps to the starting form and compares with the
    /// resulting form exactly.
    pub fn verify(&self) -> Result<bool> {
        let order = self.spec.r as u32 + 2;
        let start = isotopy_form(&self.spec.with_signs(self.from.0, self.from.1), order)?;
        let goal = isotopy_form(&self.spec.with_signs(self.to.0, self.to.1), order)?;
        let even = self.steps.iter().all(|s| s.rotation.indices.len() % 2 == 0);
        Ok(even && self.apply(&start)? == goal)
    }
}

struct Builder {
    m: usize,
    n: usize,
    steps: Vec<WitnessStep>,
}

impl Builder {
    fn push(&mut self, side: Side, indices: Vec<usize>) -> Result<()> {
        let dim = if side == Side::Source { self.m } else { self.n };
        let rotation = PiRotation::new(dim, &indices)?;
        if !rotation.is_identity() {
            self.steps.push(WitnessStep { side, rotation });
        }
        Ok(())
    }
}

/// Odd offsets `1, 3, ...` up to `limit` inside block `i` (1-based) of size `r`.
fn offsets(r: usize, block: usize, first: usize, limit: usize) -> impl Iterator<Item = usize> {
    (first..=limit).step_by(2).map(move |j| (block - 1) * r + j)
}

/// Reduction of the forms attached to `spec` towards `h_{0,r}`.
/// Returns the signs reached and the steps taken.
fn reduce(spec: &FormSpec) -> Result<((i8, i8), Vec<WitnessStep>)> {
    spec.validate()?;
    let (r, a, m, n) = (spec.r, spec.a, spec.m(), spec.n());
    let (mut e1, mut e2) = (spec.eps1, spec.eps2);
    let mut b = Builder { m, n, steps: Vec::new() };
    let first_r: Vec<usize> = (1..=r).collect();
    let suspension = spec.is_suspension();
    if r % 2 == 0 {
        if e2 < 0 {
            b.push(Side::Target, vec![m, n])?;
            b.push(Side::Source, first_r.clone())?;
            b.push(Side::Target, first_r.clone())?;
            e2 = 1;
        }
        if e1 < 0 && suspension {
            let mut src: Vec<usize> = (2..=r).collect();
            src.push(m - 1);
            b.push(Side::Source, src)?;
            let mut tgt = first_r.clone();
            tgt.extend([m - 1, m]);
            b.push(Side::Target, tgt)?;
            e1 = 1;
        }
    } else {
        if e1 < 0 {
            b.push(Side::Source, (2..=r).collect())?;
            let mut tgt = first_r.clone();
            tgt.push(m);
            b.push(Side::Target, tgt)?;
            e1 = 1;
        }
        if e2 < 0 && suspension {
            b.push(Side::Target, vec![m, n])?;
            let mut src = first_r.clone();
            src.push(m - 1);
            b.push(Side::Source, src)?;
            let mut tgt = first_r.clone();
            tgt.push(m - 1);
            b.push(Side::Target, tgt)?;
            e2 = 1;
        }
    }
    if !suspension {
        match r % 4 {
            1 | 3 if e2 < 0 && (r % 4 == 3 || a % 2 == 1) => {
                let mut src: Vec<usize> = (1..=a).flat_map(|i| offsets(r, i, 1, r)).collect();
                src.extend(offsets(r, a + 1, 1, r.saturating_sub(2)));
                let mut tgt = src.clone();
                tgt.push(n);
                src.push(m);
                b.push(Side::Source, src)?;
                b.push(Side::Target, tgt)?;
                e2 = 1;
            }
            2 if e1 < 0 && a % 2 == 0 => {
                let mut src = vec![1];
                src.extend(offsets(r, 1, 2, r));
                src.extend((2..=a).flat_map(|i| offsets(r, i, 1, r - 1)));
                src.extend(offsets(r, a + 1, 2, r - 2));
                let mut tgt: Vec<usize> = src[1..].to_vec();
                tgt.extend([m, n]);
                src.push(m);
                b.push(Side::Source, src)?;
                b.push(Side::Target, tgt)?;
                e1 = 1;
            }
            _ => {}
        }
    }
    Ok(((e1, e2), b.steps))
}

/// π-rotations taking `h_{r,(ε1,ε2)}` to `h_{0,r}`. Fails with
/// [`Error::NoWitness`] when the form lies in the other isotopy class.
pub fn isotopy_witness(spec: &FormSpec) -> Result<Witness> {
    let (to, steps) = reduce(spec)?;
    if to != (1, 1) {
        let report = isotopy_classify(spec.r, spec.a, spec.is_suspension())?;
        let label = match report.invariant_label {
            InvariantLabel::Eps1 => "eps1",
            InvariantLabel::Eps2 => "eps2",
            InvariantLabel::None => "none",
        };
        return Err(Error::NoWitness(format!(
            "h_{{{},({},{})}} is separated from h_{{0,{}}} by the invariant {label}",
            spec.r, spec.eps1, spec.eps2, spec.r
        )));
    }
    Ok(Witness { spec: *spec, from: (spec.eps1, spec.eps2), to, steps })
}

/// π-rotations taking `h_{r,(ε1,ε2)}` to the canonical form of its class:
/// `h_{0,r}`, or the form with only the invariant sign negative.
pub fn isotopy_reduce(spec: &FormSpec) -> Result<Witness> {
    let (to, steps) = reduce(spec)?;
    Ok(Witness { spec: *spec, from: (spec.eps1, spec.eps2), to, steps })
}
