//! Width-reducing surrogates of objectives.
//!
//! A function `g` is an `(η, γ)`-reduction of `f` when `g <= min{f, η}` and
//! `g(X) = f(X)` wherever `g(X)` is below `γη`. The multiplicative weights
//! engine works with these surrogates so that every per-iteration loss lies
//! in `[0, 1]` after dividing by `η`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{check_distribution, ElementSet, Objective, ProblemInstance, MAX_TABLE_GROUND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// `min{f(X), η}`, valid with `γ = 1` for monotone submodular `f`.
    Truncate,
    /// `sum_{e in X} min{w_e, η/|E|}` for linear `f`, `γ = 1/|E|`.
    LinearClip,
    /// `min_{Z ⊆ X} f(Z) + η|X \ Z|/|E|` for submodular `f`, `γ = 1/|E|`.
    SubmodularInf,
    /// `f` itself, valid with `γ = 1` when `f <= η` everywhere.
    Identity,
}

/// How a family of objectives is reduced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReductionRule {
    /// Per objective: linear ones are clipped, monotone submodular ones
    /// truncated, non-monotone tables use the infimal construction and
    /// cardinality ratios are kept as they are.
    #[default]
    Auto,
    Force(Construction),
}

#[derive(Clone, Debug)]
pub struct ReducedObjective {
    base: Objective,
    eta: f64,
    gamma: f64,
    construction: Construction,
    clipped: Option<Vec<f64>>,
    table: Option<Vec<f64>>,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::Precondition(format!("η = {eta} must be positive")));
    }
    Ok(())
}

/// `min{f, η}` for a monotone submodular objective.
pub fn reduce_monotone_submodular(f: &Objective, eta: f64) -> Result<ReducedObjective> {
    check_eta(eta)?;
    if !f.is_monotone() {
        return Err(Error::Precondition("truncation requires a monotone objective".into()));
    }
    if matches!(f, Objective::CardinalityRatio(_)) {
        return Err(Error::Unsupported(
            "cardinality ratios are not submodular; use the identity reduction".into(),
        ));
    }
    Ok(ReducedObjective {
        base: f.clone(),
        eta,
        gamma: 1.0,
        construction: Construction::Truncate,
        clipped: None,
        table: None,
    })
}

/// Clips every weight of a linear objective at `η/|E|`.
pub fn reduce_linear(f: &Objective, eta: f64) -> Result<ReducedObjective> {
    check_eta(eta)?;
    let Some(w) = f.linear_weights() else {
        return Err(Error::Precondition(format!(
            "weight clipping requires a linear objective, got `{}`",
            f.kind_name()
        )));
    };
    let size = w.len();
    let cap = eta / size as f64;
    Ok(ReducedObjective {
        base: f.clone(),
        eta,
        gamma: 1.0 / size as f64,
        construction: Construction::LinearClip,
        clipped: Some(w.iter().map(|&x| x.min(cap)).collect()),
        table: None,
    })
}

/// `g(X) = min_{Z ⊆ X} f(Z) + η|X \ Z|/|E|` for a possibly non-monotone
/// submodular objective, tabulated over all subsets.
pub fn reduce_general_submodular(f: &Objective, eta: f64) -> Result<ReducedObjective> {
    check_eta(eta)?;
    if matches!(f, Objective::CardinalityRatio(_)) {
        return Err(Error::Unsupported("cardinality ratios are not submodular".into()));
    }
    let size = f.ground_size();
    if size > MAX_TABLE_GROUND {
        return Err(Error::SizeLimit {
            what: "infimal reduction ground set",
            limit: MAX_TABLE_GROUND,
            actual: size,
        });
    }
    let table = if eta.is_finite() {
        let step = eta / size as f64;
        let mut g = vec![0.0; 1 << size];
        for mask in 1u64..(1 << size) {
            let mut best = f.eval(&ElementSet::from_mask(mask));
            let mut rest = mask;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                best = best.min(g[(mask & !bit) as usize] + step);
                rest &= rest - 1;
            }
            g[mask as usize] = best;
        }
        Some(g)
    } else {
        None
    };
    Ok(ReducedObjective {
        base: f.clone(),
        eta,
        gamma: 1.0 / size as f64,
        construction: Construction::SubmodularInf,
        clipped: None,
        table,
    })
}

/// `f` unchanged, declared as an `(η, 1)`-reduction. Valid only when `f`
/// never exceeds `η`, as for cardinality ratios with `η = 1`.
pub fn identity_reduction(f: &Objective, eta: f64) -> Result<ReducedObjective> {
    check_eta(eta)?;
    Ok(ReducedObjective {
        base: f.clone(),
        eta,
        gamma: 1.0,
        construction: Construction::Identity,
        clipped: None,
        table: None,
    })
}

pub fn reduce(f: &Objective, construction: Construction, eta: f64) -> Result<ReducedObjective> {
    match construction {
        Construction::Truncate => reduce_monotone_submodular(f, eta),
        Construction::LinearClip => reduce_linear(f, eta),
        Construction::SubmodularInf => reduce_general_submodular(f, eta),
        Construction::Identity => identity_reduction(f, eta),
    }
}

/// The construction [`ReductionRule::Auto`] picks for `f`.
pub fn auto_construction(f: &Objective) -> Construction {
    match f {
        Objective::Linear(_) => Construction::LinearClip,
        Objective::CardinalityRatio(_) => Construction::Identity,
        f if f.is_monotone() => Construction::Truncate,
        _ => Construction::SubmodularInf,
    }
}

impl ReducedObjective {
    pub fn base(&self) -> &Objective {
        &self.base
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn eval(&self, set: &ElementSet) -> f64 {
        match self.construction {
            Construction::Truncate => self.base.eval(set).min(self.eta),
            Construction::LinearClip => {
                let w = self.clipped.as_ref().expect("clipped weights are built");
                set.iter().map(|e| w[e]).sum()
            }
            Construction::SubmodularInf => match &self.table {
                Some(t) => t[set.to_mask().expect("ground set has at most 20 elements") as usize],
                None => self.base.eval(set),
            },
            Construction::Identity => self.base.eval(set),
        }
    }

    /// Weights when the reduced function is linear.
    pub fn linear_weights(&self) -> Option<&[f64]> {
        match self.construction {
            Construction::LinearClip => self.clipped.as_deref(),
            Construction::Identity => self.base.linear_weights(),
            Construction::Truncate if self.eta == f64::INFINITY => self.base.linear_weights(),
            _ => None,
        }
    }

    pub fn is_monotone(&self) -> bool {
        match self.construction {
            Construction::LinearClip => true,
            _ => self.base.is_monotone(),
        }
    }
}

static NEXT_FAMILY_ID: AtomicU64 = AtomicU64::new(1);

/// Reduced objectives sharing one `η`; `γ` is the smallest member value.
#[derive(Clone, Debug)]
pub struct ReducedFamily {
    objectives: Vec<ReducedObjective>,
    eta: f64,
    gamma: f64,
    id: u64,
}

impl ReducedFamily {
    pub fn new(objectives: Vec<ReducedObjective>) -> Result<Self> {
        let Some(first) = objectives.first() else {
            return Err(Error::Precondition("empty objective family".into()));
        };
        let eta = first.eta;
        if objectives.iter().any(|g| g.eta != eta) {
            return Err(Error::Precondition("family members use different η".into()));
        }
        let gamma = objectives.iter().map(|g| g.gamma).fold(1.0, f64::min);
        Ok(ReducedFamily {
            objectives,
            eta,
            gamma,
            id: NEXT_FAMILY_ID.fetch_add(1, Ordering::Relaxed),
        })
    }

    /// Reduces every objective of `inst` at the common threshold `eta`.
    pub fn for_instance(inst: &ProblemInstance, rule: ReductionRule, eta: f64) -> Result<Self> {
        let objectives = inst
            .objectives()
            .iter()
            .map(|f| {
                let c = match rule {
                    ReductionRule::Auto => auto_construction(f),
                    ReductionRule::Force(c) => c,
                };
                reduce(f, c, eta)
            })
            .collect::<Result<Vec<_>>>()?;
        ReducedFamily::new(objectives)
    }

    pub fn objectives(&self) -> &[ReducedObjective] {
        &self.objectives
    }

    pub fn len(&self) -> usize {
        self.objectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objectives.is_empty()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Unique per constructed family; lets oracles cache evaluations.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn values(&self, set: &ElementSet) -> Vec<f64> {
        self.objectives.iter().map(|g| g.eval(set)).collect()
    }

    /// `sum_k q_k g_k(X)`.
    pub fn mixture(&self, q: &[f64], set: &ElementSet) -> f64 {
        self.objectives
            .iter()
            .zip(q)
            .map(|(g, &qk)| if qk == 0.0 { 0.0 } else { qk * g.eval(set) })
            .sum()
    }

    /// Mixed weights `sum_k q_k w_ke` when every member is linear.
    pub fn mixed_linear_weights(&self, q: &[f64]) -> Option<Vec<f64>> {
        let size = self.objectives[0].base.ground_size();
        let mut out = vec![0.0; size];
        for (g, &qk) in self.objectives.iter().zip(q) {
            let w = g.linear_weights()?;
            for (o, &x) in out.iter_mut().zip(w) {
                *o += qk * x;
            }
        }
        Some(out)
    }

    pub(crate) fn check_weights(&self, q: &[f64]) -> Result<()> {
        check_distribution(q, self.len())
    }
}

/// A set on which one of the two reduction conditions fails.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionViolation {
    pub set: ElementSet,
    /// `1` for `g <= min{f, η}`, `2` for `g < γη => g = f`.
    pub condition: u8,
    pub f: f64,
    pub g: f64,
}

/// Checks both reduction conditions on every subset when the ground set has
/// at most 12 elements, otherwise on `samples` seeded random subsets.
///
/// The second condition is tested in its strict form `g(X) < γη`: every
/// construction above meets the threshold with equality on sets where it
/// differs from `f` (for instance a truncated set with `g(X) = η`).
pub fn check_reduction(
    f: impl Fn(&ElementSet) -> f64,
    g: impl Fn(&ElementSet) -> f64,
    ground: usize,
    eta: f64,
    gamma: f64,
    samples: usize,
) -> std::result::Result<(), ReductionViolation> {
    let check = |set: ElementSet| {
        let fv = f(&set);
        let gv = g(&set);
        let tol = 1e-12 * fv.abs().max(1.0);
        if gv > fv.min(eta) + tol {
            return Err(ReductionViolation {
                set,
                condition: 1,
                f: fv,
                g: gv,
            });
        }
        if gv < gamma * eta - tol && (gv - fv).abs() > tol {
            return Err(ReductionViolation {
                set,
                condition: 2,
                f: fv,
                g: gv,
            });
        }
        Ok(())
    };
    if ground <= 12 {
        for mask in 0u64..(1 << ground) {
            check(ElementSet::from_mask(mask))?;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4ed);
        for _ in 0..samples {
            let set: ElementSet = (0..ground).filter(|_| rng.gen_bool(0.5)).collect();
            check(set)?;
        }
    }
    Ok(())
}
