//! Freeness and rotundity of `L × W` over the coordinate subproducts
//! `B = ∏_{j∈S} Eⱼ`, and the cut-down `L'' ⊆ L` with `dim L'' + dim W = g`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{EacError, Result};
use crate::instance::{WDescriptor, WKind};
use crate::multiquad::{ComplexMQ, MultiQuad};
use crate::segre::{bidegree, ExpMap};
use crate::subspace::ComplexSubspace;
use crate::variety::ProductVariety;
use crate::weierstrass::Backend;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Indeterminate,
}

/// A violating subproduct, with 0-based factor indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub subset: Vec<usize>,
    pub side: &'static str,
    pub detail: String,
}

impl Witness {
    pub fn label(&self) -> String {
        subset_label(&self.subset)
    }
}

pub fn subset_label(s: &[usize]) -> String {
    if s.is_empty() {
        return "B = 0".into();
    }
    let names: Vec<String> = s.iter().map(|j| format!("E{}", j + 1)).collect();
    format!("B = {}", names.join(" x "))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreeVerdict {
    pub status: Tri,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotundRow {
    pub subset: Vec<usize>,
    pub required: usize,
    pub dim_pl: usize,
    pub dim_qw: Option<usize>,
    pub ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotundVerdict {
    pub status: Tri,
    pub rows: Vec<RotundRow>,
    pub witness: Option<RotundRow>,
}

/// Where the bidegree used by the checks came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BidegreeSource {
    Given,
    Sampled,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub free: FreeVerdict,
    pub rotund: RotundVerdict,
    pub g: usize,
    pub dim_l: usize,
    pub dim_w: usize,
    pub bidegree: Option<(u32, u32)>,
    pub bidegree_source: BidegreeSource,
}

impl Verdict {
    pub fn is_free_and_rotund(&self) -> bool {
        self.free.status == Tri::Yes && self.rotund.status == Tri::Yes
    }

    /// 0 = free and rotund, 2 = not, 3 = indeterminate.
    pub fn exit_code(&self) -> i32 {
        if self.free.status == Tri::No || self.rotund.status == Tri::No {
            2
        } else if self.is_free_and_rotund() {
            0
        } else {
            3
        }
    }
}

/// Nonempty proper subsets first by size, then lexicographically.
pub fn subsets(g: usize, proper_nonempty: bool) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..(1 << g))
        .map(|mask| (0..g).filter(|j| mask & (1 << j) != 0).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| !proper_nonempty || (!s.is_empty() && s.len() < g))
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

fn require_supported(a: &ProductVariety) -> Result<()> {
    if a.g() >= 2 && !a.pairwise_nonisogenous {
        return Err(EacError::Precondition(
            "factors must be asserted pairwise non-isogenous; other abelian subvarieties are not enumerated".into(),
        ));
    }
    Ok(())
}

/// Bidegree for the checks: the descriptor's, or, under `assert_free`, one
/// sampled from fibre counts (which must then be positive).
fn resolve_bidegree(w: &WDescriptor, a: &ProductVariety, seed: u64) -> Result<(Option<(u32, u32)>, BidegreeSource)> {
    let WKind::SegreHypersurface(f) = &w.kind else {
        return Ok((None, BidegreeSource::None));
    };
    if let Some(b) = w.bidegree {
        return Ok((Some(b), BidegreeSource::Given));
    }
    if w.assert_free != Some(true) {
        return Ok((None, BidegreeSource::None));
    }
    let exp = ExpMap::new(a, Backend::Theta)?;
    let (m, n) = bidegree(f, &exp, seed)?;
    if m == 0 || n == 0 {
        return Err(EacError::AssertionContradicted {
            sample: format!("fibre counts (m, n) = ({m}, {n})"),
            detail: "W lies in a translate of a factor".into(),
        });
    }
    Ok((Some((m, n)), BidegreeSource::Sampled))
}

fn free_with(l: &ComplexSubspace, w: &WDescriptor, a: &ProductVariety, bideg: Option<(u32, u32)>) -> FreeVerdict {
    let g = a.g();
    for s in subsets(g, true) {
        if ComplexSubspace::coordinate(g, &s).contains(l) {
            return FreeVerdict {
                status: Tri::No,
                witness: Some(Witness {
                    detail: format!("L lies in LB for {}", subset_label(&s)),
                    subset: s,
                    side: "L",
                }),
            };
        }
    }
    let w_side = match &w.kind {
        WKind::Whole => None,
        WKind::Point(_) => (g >= 2).then(|| Witness {
            subset: vec![0],
            side: "W",
            detail: "a point lies in a translate of every B".into(),
        }),
        WKind::SegreHypersurface(_) => match bideg {
            Some((m, 0)) => Some(Witness {
                subset: vec![1],
                side: "W",
                detail: format!("bidegree ({m}, 0): W is a union of translates of E2"),
            }),
            Some((0, n)) => Some(Witness {
                subset: vec![0],
                side: "W",
                detail: format!("bidegree (0, {n}): W is a union of translates of E1"),
            }),
            Some(_) => None,
            None => {
                return FreeVerdict {
                    status: if w.assert_free == Some(false) { Tri::No } else { Tri::Indeterminate },
                    witness: (w.assert_free == Some(false)).then(|| Witness {
                        subset: vec![],
                        side: "W",
                        detail: "asserted not free".into(),
                    }),
                }
            }
        },
    };
    match w_side {
        Some(wit) => FreeVerdict {
            status: Tri::No,
            witness: Some(wit),
        },
        None => FreeVerdict {
            status: Tri::Yes,
            witness: None,
        },
    }
}

/// `dim q(W)` for `q: A → A/B`, `B = ∏_{j∈S} Eⱼ`.
fn dim_qw(w: &WDescriptor, g: usize, s: &[usize], bideg: Option<(u32, u32)>) -> Option<usize> {
    let quotient = g - s.len();
    match &w.kind {
        WKind::Whole => Some(quotient),
        WKind::Point(_) => Some(0),
        WKind::SegreHypersurface(_) => match (s, bideg) {
            ([], _) => Some(1),
            ([_, _], _) => Some(0),
            // q(W) ⊂ A/E1 = E2 is a curve iff W is not a union of E1-translates
            ([0], Some((m, _))) => Some((m > 0) as usize),
            ([1], Some((_, n))) => Some((n > 0) as usize),
            _ => None,
        },
    }
}

fn rotund_with(l: &ComplexSubspace, w: &WDescriptor, a: &ProductVariety, bideg: Option<(u32, u32)>) -> RotundVerdict {
    let g = a.g();
    let mut rows = Vec::new();
    for s in subsets(g, false) {
        let required = g - s.len();
        let dim_pl = l.project_out(&s).dim();
        let dq = dim_qw(w, g, &s, bideg);
        let ok = if dim_pl >= required {
            Some(true)
        } else {
            dq.map(|d| dim_pl + d >= required)
        };
        rows.push(RotundRow {
            subset: s,
            required,
            dim_pl,
            dim_qw: dq,
            ok,
        });
    }
    let witness = rows.iter().find(|r| r.ok == Some(false)).cloned();
    let status = if witness.is_some() {
        Tri::No
    } else if rows.iter().all(|r| r.ok == Some(true)) {
        Tri::Yes
    } else {
        Tri::Indeterminate
    };
    RotundVerdict { status, rows, witness }
}

pub fn check_free(l: &ComplexSubspace, w: &WDescriptor, a: &ProductVariety) -> Result<FreeVerdict> {
    Ok(check(l, w, a)?.free)
}

pub fn check_rotund(l: &ComplexSubspace, w: &WDescriptor, a: &ProductVariety) -> Result<RotundVerdict> {
    Ok(check(l, w, a)?.rotund)
}

pub fn check(l: &ComplexSubspace, w: &WDescriptor, a: &ProductVariety) -> Result<Verdict> {
    check_seeded(l, w, a, 0)
}

pub fn check_seeded(l: &ComplexSubspace, w: &WDescriptor, a: &ProductVariety, seed: u64) -> Result<Verdict> {
    require_supported(a)?;
    w.validate(a.g())?;
    let (bideg, source) = resolve_bidegree(w, a, seed)?;
    Ok(Verdict {
        free: free_with(l, w, a, bideg),
        rotund: rotund_with(l, w, a, bideg),
        g: a.g(),
        dim_l: l.dim(),
        dim_w: w.dim,
        bidegree: bideg,
        bidegree_source: source,
    })
}

/// Maximum number of hyperplanes tried per cut.
pub const REDUCE_RETRIES: usize = 64;

/// Cuts `L` by seeded random integer hyperplanes until `dim L'' + dim W = g`,
/// keeping `L'' × W` free and rotund after every cut.
pub fn reduce_l(l: &ComplexSubspace, w: &WDescriptor, a: &ProductVariety, seed: u64) -> Result<ComplexSubspace> {
    let base = check_seeded(l, w, a, seed)?;
    if !base.is_free_and_rotund() {
        return Err(EacError::Precondition("reduce_L needs a free and rotund L × W".into()));
    }
    let g = a.g();
    let target = g.saturating_sub(w.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = l.clone();
    while cur.dim() > target {
        let mut next = None;
        for _ in 0..REDUCE_RETRIES {
            let ints: Vec<i64> = (0..g).map(|_| rng.gen_range(-4..=4)).collect();
            if ints.iter().all(|&k| k == 0) {
                continue;
            }
            let c: Vec<ComplexMQ> = ints
                .iter()
                .map(|&k| Complex::new(MultiQuad::from_int(k), MultiQuad::from_int(0)))
                .collect();
            let cut = cur.intersect_hyperplane(&c)?;
            if cut.dim() + 1 != cur.dim() {
                continue;
            }
            if check_seeded(&cut, w, a, seed)?.is_free_and_rotund() {
                next = Some(cut);
                break;
            }
        }
        cur = next.ok_or_else(|| EacError::GenericityFailure(format!("no admissible hyperplane in {REDUCE_RETRIES} draws")))?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiquad::parse_complex;
    use crate::segre::SegrePolynomial;
    use crate::variety::EllipticFactor;
    use num_rational::BigRational;
    use num_traits::One;

    fn variety() -> ProductVariety {
        ProductVariety::new(
            vec![
                EllipticFactor::imaginary(BigRational::one(), 2).unwrap(),
                EllipticFactor::imaginary(BigRational::one(), 5).unwrap(),
            ],
            true,
        )
        .unwrap()
    }

    fn line(a: &str, b: &str) -> ComplexSubspace {
        ComplexSubspace::new(2, vec![vec![parse_complex(a).unwrap(), parse_complex(b).unwrap()]]).unwrap()
    }

    fn curve(b: Option<(u32, u32)>) -> WDescriptor {
        let f = SegrePolynomial::linear(&[(4, Complex::new(1.0, 0.0)), (0, Complex::new(-1.0, 0.0))]);
        WDescriptor::hypersurface(f, b)
    }

    #[test]
    fn worked_example_is_free_and_rotund() {
        let v = check(&line("1", "1"), &curve(Some((2, 2))), &variety()).unwrap();
        assert!(v.is_free_and_rotund());
        let required: Vec<usize> = v.rotund.rows.iter().map(|r| r.required).collect();
        assert_eq!(required, vec![2, 1, 1, 0]);
        assert_eq!(v.exit_code(), 0);
    }

    #[test]
    fn coordinate_line_is_not_free() {
        let v = check(&line("1", "0"), &curve(Some((2, 2))), &variety()).unwrap();
        assert_eq!(v.free.status, Tri::No);
        assert_eq!(v.free.witness.unwrap().label(), "B = E1");
    }

    #[test]
    fn fibre_is_not_free() {
        let v = check(&line("1", "1"), &curve(Some((1, 0))), &variety()).unwrap();
        assert_eq!(v.free.status, Tri::No);
        assert_eq!(v.free.witness.unwrap().label(), "B = E2");
    }

    #[test]
    fn point_is_not_rotund() {
        let e = ProductVariety::new(vec![EllipticFactor::imaginary(BigRational::one(), 1).unwrap()], true)
            .unwrap();
        let w = WDescriptor::point(vec![Complex::new(0.1, 0.2)]);
        let v = check(&ComplexSubspace::zero(1), &w, &e).unwrap();
        assert_eq!(v.rotund.status, Tri::No);

        let w = WDescriptor::point(vec![Complex::new(0.1, 0.2), Complex::new(0.3, 0.1)]);
        let v = check(&line("1", "1"), &w, &variety()).unwrap();
        let wit = v.rotund.witness.unwrap();
        assert!(wit.subset.is_empty());
        assert_eq!((wit.required, wit.dim_pl + wit.dim_qw.unwrap()), (2, 1));
    }

    #[test]
    fn missing_bidegree_is_indeterminate() {
        let v = check(&line("1", "1"), &curve(None), &variety()).unwrap();
        assert_eq!(v.exit_code(), 3);
        let mut w = curve(None);
        w.assert_free = Some(true);
        let v = check(&line("1", "1"), &w, &variety()).unwrap();
        assert_eq!(v.bidegree, Some((2, 2)));
        assert_eq!(v.exit_code(), 0);
    }

    #[test]
    fn isogenous_factors_are_refused() {
        let mut a = variety();
        a.pairwise_nonisogenous = false;
        assert!(check(&line("1", "1"), &curve(Some((2, 2))), &a).is_err());
    }

    #[test]
    fn reduce_examples() {
        let a = variety();
        let w = curve(Some((2, 2)));
        let l = line("1", "1");
        assert_eq!(reduce_l(&l, &w, &a, 3).unwrap(), l);
        let cut = reduce_l(&ComplexSubspace::full(2), &w, &a, 3).unwrap();
        assert_eq!(cut.dim(), 1);
        assert!(check(&cut, &w, &a).unwrap().is_free_and_rotund());
        let fibre = curve(Some((1, 0)));
        assert!(reduce_l(&l, &fibre, &a, 3).is_err());
    }
}
