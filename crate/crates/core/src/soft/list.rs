use nalgebra::DMatrix;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::gamma;

use super::{Candidate, CandidateList, ListPolicy};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::lattice::TriangularSystem;
use crate::search::{
    sphere_decode, BestFirst, Branching, Dfs, Enumeration, Flow, RadiusPolicy, SearchLimits,
    SearchProblem, SearchStats,
};

/// Confidence level behind [`default_zeta`].
const ZETA_CONFIDENCE: f64 = 0.99;

/// Soft-output spherical-bound stack decoder.
///
/// Runs the SB-Stack search with squared radius `c2` and, instead of
/// stopping at the first leaf, moves every leaf reaching the stack top into
/// the list and keeps searching until the policy is met or the stack runs
/// empty. With `bias = 0` leaves arrive in nondecreasing cost order, so the
/// list holds exactly the closest in-sphere points. A sphere holding no
/// point at all is enlarged (doubling `c2`) and searched again; a sphere
/// holding fewer points than requested yields a shorter, flagged list.
pub fn soft_sb_stack(
    system: &TriangularSystem,
    alphabet: &Constellation,
    c2: f64,
    policy: ListPolicy,
    bias: f64,
    limits: SearchLimits,
) -> Result<CandidateList> {
    policy.validate()?;
    crate::search::validate_bias(bias)?;
    let growth = RadiusPolicy::fixed(c2);
    let mut c2 = crate::search::initial_radius(&growth, system)?;
    let problem = SearchProblem::new(system, Some(alphabet));
    let (wanted, ceiling) = match policy {
        ListPolicy::FixedSize(n) => (Some(n), None),
        ListPolicy::CostCeiling(c) => (None, Some(c)),
    };
    let mut stats = SearchStats::default();
    loop {
        let engine = BestFirst {
            problem: &problem,
            branching: Branching::Sphere { c2 },
            bias,
            cap: None,
            ceiling,
            limits,
        };
        let mut list = CandidateList::default();
        engine.run(&mut stats, |leaf| {
            list.entries.push(Candidate {
                point: problem.point(&leaf.path),
                raw_cost: leaf.raw_cost,
            });
            if wanted == Some(list.entries.len()) {
                Flow::Stop
            } else {
                Flow::Continue
            }
        })?;
        if !list.is_empty() {
            list.truncated = wanted.is_some_and(|n| list.len() < n);
            list.stats = stats;
            list.sort();
            return Ok(list);
        }
        c2 = crate::search::grow_radius(c2, &growth)?;
        stats.restarts += 1;
    }
}

/// List sphere decoder with the radius of [`list_radius`].
pub fn list_sphere_decode(
    system: &TriangularSystem,
    alphabet: &Constellation,
    n_p: usize,
    zeta: f64,
    limits: SearchLimits,
) -> Result<CandidateList> {
    let c2 = list_radius(system, n_p, zeta)?;
    list_sphere_decode_with_radius(system, alphabet, n_p, c2, limits)
}

/// Depth-first search with a fixed squared radius `c2` that keeps the
/// `n_p` best points met so far: a new point enters while the list has
/// room or when it beats the current worst entry, which it then replaces.
/// An empty sphere is doubled and searched again.
pub fn list_sphere_decode_with_radius(
    system: &TriangularSystem,
    alphabet: &Constellation,
    n_p: usize,
    c2: f64,
    limits: SearchLimits,
) -> Result<CandidateList> {
    ListPolicy::FixedSize(n_p).validate()?;
    let growth = RadiusPolicy::fixed(c2);
    let mut c2 = crate::search::initial_radius(&growth, system)?;
    let problem = SearchProblem::new(system, Some(alphabet));
    let mut dfs = Dfs::new(&problem, Enumeration::Pohst, c2, limits);
    loop {
        let mut kept: Vec<(Vec<i64>, f64)> = Vec::with_capacity(n_p);
        dfs.c2 = c2;
        dfs.run(&mut |leaf| {
            if kept.len() < n_p {
                kept.push((leaf.path.clone(), leaf.raw_cost));
            } else {
                let (worst, worst_cost) = kept
                    .iter()
                    .enumerate()
                    .map(|(i, k)| (i, k.1))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("list is full");
                if leaf.raw_cost < worst_cost {
                    kept[worst] = (leaf.path.clone(), leaf.raw_cost);
                }
            }
            c2
        })?;
        if !kept.is_empty() {
            let mut list = CandidateList {
                truncated: kept.len() < n_p,
                entries: kept
                    .into_iter()
                    .map(|(path, raw_cost)| Candidate {
                        point: problem.point(&path),
                        raw_cost,
                    })
                    .collect(),
                stats: dfs.stats,
            };
            list.sort();
            return Ok(list);
        }
        c2 = crate::search::grow_radius(c2, &growth)?;
        dfs.stats.restarts += 1;
    }
}

/// Squared list radius `2σ²ζN_p - ‖P⊥ y‖²`, where `σ²` is the noise
/// variance per real dimension and `‖P⊥ y‖²` the received energy outside
/// the column space. A nonpositive result falls back to `σ²`.
pub fn list_radius(system: &TriangularSystem, n_p: usize, zeta: f64) -> Result<f64> {
    if !(zeta > 1.0) || !zeta.is_finite() {
        return Err(Error::InvalidParameter(format!("ζ must exceed 1, got {zeta}")));
    }
    if n_p == 0 {
        return Err(Error::InvalidParameter("list size must be at least 1".into()));
    }
    let sigma2 = system.noise_var();
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "list radius needs σ² > 0, got {sigma2}"
        )));
    }
    let c2 = 2.0 * sigma2 * zeta * n_p as f64 - system.residual();
    Ok(if c2 > 0.0 { c2 } else { sigma2 })
}

/// `ζ` such that `2ζN_p` is the 99% quantile of a chi-square variable with
/// `2N_p` degrees of freedom.
pub fn default_zeta(n_p: usize) -> f64 {
    let dof = 2.0 * n_p.max(1) as f64;
    let chi = ChiSquared::new(dof).expect("positive degrees of freedom");
    chi.inverse_cdf(ZETA_CONFIDENCE) / dof
}

/// Volume of the unit ball in `n` real dimensions, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma(half + 1.0)
}

/// Radius of the ball expected to hold `n_p` points of the lattice spanned
/// by the columns of `generator`: `(n_p |det G| / V_n)^{1/n}`.
pub fn shifted_list_radius(generator: &DMatrix<f64>, n_p: f64) -> Result<f64> {
    if !generator.is_square() || generator.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "generator must be square, got {}x{}",
            generator.nrows(),
            generator.ncols()
        )));
    }
    if !(n_p > 0.0) {
        return Err(Error::InvalidParameter(format!("N_p must be positive, got {n_p}")));
    }
    let n = generator.nrows();
    let det = generator.clone().determinant().abs();
    let scale = generator.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(det > f64::EPSILON * scale.powi(n as i32)) {
        return Err(Error::Singular);
    }
    Ok((n_p * det / unit_ball_volume(n)).powf(1.0 / n as f64))
}

/// Candidate list centred on the ML point.
///
/// Finds the ML point, then enumerates the constellation points within the
/// ball around it whose squared radius is `multiplier` times the square of
/// [`shifted_list_radius`] for the searched lattice, and keeps the `n_p`
/// closest to the received point.
pub fn shifted_list_decode(
    system: &TriangularSystem,
    alphabet: &Constellation,
    n_p: usize,
    multiplier: f64,
    limits: SearchLimits,
) -> Result<CandidateList> {
    ListPolicy::FixedSize(n_p).validate()?;
    if !(multiplier > 0.0) || !multiplier.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius multiplier must be positive, got {multiplier}"
        )));
    }
    let searched = system.shifted(alphabet);
    let policy = if system.noise_var() > 0.0 {
        RadiusPolicy::noise_and_fading()
    } else {
        RadiusPolicy::fixed(searched.min_column_energy())
    };
    let ml = sphere_decode(system, &policy, Some(alphabet), limits)?;
    let radius = shifted_list_radius(searched.r(), n_p as f64)?;
    let c2 = multiplier * radius * radius;

    let x = nalgebra::DVector::from_iterator(ml.point.len(), ml.point.iter().map(|&v| v as f64));
    let centred = TriangularSystem::new(system.r().clone(), system.r() * x, system.noise_var())?;
    let problem = SearchProblem::new(&centred, Some(alphabet));
    let mut dfs = Dfs::new(&problem, Enumeration::Pohst, c2, limits);
    let mut entries = Vec::new();
    dfs.run(&mut |leaf| {
        let point = problem.point(&leaf.path);
        let raw_cost = system.metric(&point);
        entries.push(Candidate { point, raw_cost });
        c2
    })?;
    let mut stats = ml.stats;
    stats.merge(&dfs.stats);
    let mut list = CandidateList {
        entries,
        truncated: false,
        stats,
    };
    list.sort();
    list.truncated = list.len() < n_p;
    list.entries.truncate(n_p);
    Ok(list)
}
