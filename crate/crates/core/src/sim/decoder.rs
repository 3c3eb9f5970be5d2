//! Decoder specifications of the form `name[:key=value]*`.

use std::fmt;
use std::str::FromStr;

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::lattice::{babai_point, brute_force_ml, zf_decision, TriangularSystem};
use crate::search::{
    initial_radius, neighbor_stack_decode, sb_stack_decode, sphere_decode_with, stack_decode,
    Enumeration, RadiusPolicy, SearchLimits, SearchRegion, SearchStats,
};
use crate::soft::{
    default_zeta, list_radius, list_sphere_decode_with_radius, shifted_list_decode, soft_sb_stack,
    Candidate, CandidateList, ListPolicy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    /// Exhaustive search (finite alphabet) or unbounded sphere search
    /// (lattice domain).
    Ml,
    Zf,
    ZfDfe,
    Sphere,
    SbStack,
    /// Stack decoder over the full tree; `k` caps the stack (K-best).
    Stack,
    NeighborStack,
    SoftSbStack,
    Lsd,
    Ssd,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 10] = [
        DecoderKind::Ml,
        DecoderKind::Zf,
        DecoderKind::ZfDfe,
        DecoderKind::Sphere,
        DecoderKind::SbStack,
        DecoderKind::Stack,
        DecoderKind::NeighborStack,
        DecoderKind::SoftSbStack,
        DecoderKind::Lsd,
        DecoderKind::Ssd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Ml => "ml",
            DecoderKind::Zf => "zf",
            DecoderKind::ZfDfe => "zf-dfe",
            DecoderKind::Sphere => "sphere",
            DecoderKind::SbStack => "sb-stack",
            DecoderKind::Stack => "stack",
            DecoderKind::NeighborStack => "neighbor-stack",
            DecoderKind::SoftSbStack => "soft-sb-stack",
            DecoderKind::Lsd => "lsd",
            DecoderKind::Ssd => "ssd",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            DecoderKind::Ml => "exact ML by exhaustive search (lattice domain: unbounded sphere search)",
            DecoderKind::Zf => "zero forcing, componentwise rounding",
            DecoderKind::ZfDfe => "ZF-DFE / Babai nearest plane",
            DecoderKind::Sphere => "depth-first sphere decoder with shrinking radius",
            DecoderKind::SbStack => "spherical-bound stack decoder (fixed radius, best first)",
            DecoderKind::Stack => "stack decoder over the full QAM tree; k=K keeps the K best nodes",
            DecoderKind::NeighborStack => "stack decoder over a box of half-width t around the Babai point",
            DecoderKind::SoftSbStack => "soft-output SB-Stack: the list=N closest points",
            DecoderKind::Lsd => "list sphere decoder with worst-entry replacement",
            DecoderKind::Ssd => "list centred on the ML point with a lattice-volume radius",
        }
    }

    /// Parameters accepted after the name.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            DecoderKind::Ml | DecoderKind::Zf | DecoderKind::ZfDfe => &["domain", "m"],
            DecoderKind::Sphere => &["domain", "radius", "growth", "order", "m"],
            DecoderKind::SbStack => &["domain", "radius", "growth", "bias", "m"],
            DecoderKind::Stack => &["bias", "k", "m"],
            DecoderKind::NeighborStack => &["t", "bias", "m"],
            DecoderKind::SoftSbStack => &["list", "radius", "zeta", "growth", "bias", "m"],
            DecoderKind::Lsd => &["list", "radius", "zeta", "growth", "m"],
            DecoderKind::Ssd => &["list", "alpha", "m"],
        }
    }

    pub fn is_list(self) -> bool {
        matches!(self, DecoderKind::SoftSbStack | DecoderKind::Lsd | DecoderKind::Ssd)
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kbest" | "k-best" => Ok(DecoderKind::Stack),
            _ => DecoderKind::ALL
                .into_iter()
                .find(|k| k.name() == s)
                .ok_or_else(|| Error::UnknownDecoder(s.to_string())),
        }
    }
}

/// Where the search runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Domain {
    /// Inside the QAM alphabet.
    #[default]
    Qam,
    /// On the unbounded shifted lattice; decisions outside the alphabet
    /// count as errors.
    Lattice,
}

/// Squared-radius rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusChoice {
    /// `2nσ²`.
    Noise,
    /// `min(2nσ², min diag(HᵀH))`.
    Fading,
    /// `2σ²ζN_p` less the out-of-span energy.
    List,
    Fixed(f64),
}

impl FromStr for RadiusChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise" => Ok(RadiusChoice::Noise),
            "fading" => Ok(RadiusChoice::Fading),
            "list" => Ok(RadiusChoice::List),
            _ => s
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(RadiusChoice::Fixed)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown radius rule {s:?}"))),
        }
    }
}

/// A parsed decoder specification.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderSpec {
    pub label: String,
    pub kind: DecoderKind,
    pub domain: Domain,
    pub radius: RadiusChoice,
    pub growth: f64,
    pub order: Enumeration,
    /// Bias in units of the per-dimension noise variance.
    pub bias: f64,
    pub k: Option<usize>,
    pub t: u32,
    pub list: usize,
    pub zeta: Option<f64>,
    pub alpha: f64,
    /// LLR quantization bits (coded runs only).
    pub llr_bits: Option<u32>,
}

impl fmt::Display for DecoderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad value {value:?} for {key}")))
}

impl FromStr for DecoderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind: DecoderKind = parts.next().unwrap_or_default().parse()?;
        let mut spec = DecoderSpec {
            label: s.trim().to_string(),
            kind,
            domain: if kind == DecoderKind::NeighborStack {
                Domain::Lattice
            } else {
                Domain::Qam
            },
            radius: if kind.is_list() {
                RadiusChoice::List
            } else {
                RadiusChoice::Fading
            },
            growth: 2.0,
            order: Enumeration::Pohst,
            bias: 0.0,
            k: None,
            t: 1,
            list: 6,
            zeta: None,
            alpha: 1.0,
            llr_bits: None,
        };
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got {part:?}")))?;
            if !kind.keys().contains(&key) {
                return Err(Error::InvalidParameter(format!(
                    "{} does not take {key:?} (accepts {:?})",
                    kind.name(),
                    kind.keys()
                )));
            }
            match key {
                "domain" => {
                    spec.domain = match value {
                        "qam" => Domain::Qam,
                        "lattice" => Domain::Lattice,
                        _ => return Err(Error::InvalidParameter(format!("unknown domain {value:?}"))),
                    }
                }
                "radius" => spec.radius = value.parse()?,
                "growth" => spec.growth = parse_value(key, value)?,
                "order" => {
                    spec.order = match value {
                        "pohst" => Enumeration::Pohst,
                        "se" | "schnorr-euchner" => Enumeration::SchnorrEuchner,
                        _ => return Err(Error::InvalidParameter(format!("unknown order {value:?}"))),
                    }
                }
                "bias" => spec.bias = parse_value(key, value)?,
                "k" => spec.k = Some(parse_value(key, value)?),
                "t" => spec.t = parse_value(key, value)?,
                "list" => spec.list = parse_value(key, value)?,
                "zeta" => spec.zeta = Some(parse_value(key, value)?),
                "alpha" => spec.alpha = parse_value(key, value)?,
                "m" => spec.llr_bits = Some(parse_value(key, value)?),
                _ => unreachable!("key list and match arms agree"),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl DecoderSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("{}: {msg}", self.label)));
        if !(self.bias >= 0.0) || !self.bias.is_finite() {
            return bad(format!("bias must be nonnegative, got {}", self.bias));
        }
        if !(self.growth > 1.0) {
            return bad(format!("growth must exceed 1, got {}", self.growth));
        }
        if self.k == Some(0) || self.list == 0 {
            return bad("k and list must be at least 1".into());
        }
        if self.zeta.is_some_and(|z| !(z > 1.0)) {
            return bad("zeta must exceed 1".into());
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive".into());
        }
        if self.llr_bits.is_some_and(|m| m < 2) {
            return bad("LLR quantization needs at least 2 bits".into());
        }
        if self.radius == RadiusChoice::List && !self.kind.is_list() {
            return bad("radius=list applies to list decoders only".into());
        }
        Ok(())
    }

    fn policy(&self, system: &TriangularSystem, searched: &TriangularSystem) -> Result<RadiusPolicy> {
        let policy = match self.radius {
            RadiusChoice::Noise => RadiusPolicy::noise_scaled(),
            RadiusChoice::Fading => RadiusPolicy::noise_and_fading(),
            RadiusChoice::Fixed(c2) => RadiusPolicy::fixed(c2),
            RadiusChoice::List => RadiusPolicy::fixed(list_radius(
                system,
                self.list,
                self.zeta.unwrap_or_else(|| default_zeta(self.list)),
            )?),
        };
        // Resolve the rule once so list decoders get a concrete radius.
        Ok(RadiusPolicy::fixed(initial_radius(&policy, searched)?).with_growth(self.growth))
    }

    /// Hard decision in amplitudes (may leave the alphabet in the lattice
    /// domain).
    pub fn decide(
        &self,
        system: &TriangularSystem,
        alphabet: &Constellation,
        limits: SearchLimits,
    ) -> Result<(Vec<i64>, SearchStats)> {
        if self.kind.is_list() {
            let list = self.candidates(system, alphabet, limits)?;
            let best = list.entries.into_iter().next().ok_or(Error::EmptyList)?;
            return Ok((best.point, list.stats));
        }
        let n = system.dimension() as u64;
        let direct_stats = SearchStats {
            nodes_generated: n,
            nodes_visited: n,
            real_mults: n * (n + 1) / 2,
            restarts: 0,
        };
        let shifted = system.shifted(alphabet);
        let unshift = |u: Vec<i64>| -> Vec<i64> { u.into_iter().map(|v| alphabet.unshift(v)).collect() };
        let lattice = self.domain == Domain::Lattice;
        let bias = self.bias * system.noise_var();
        Ok(match self.kind {
            DecoderKind::Ml if lattice => {
                let policy = self.policy(system, &shifted)?;
                let d = sphere_decode_with(&shifted, &policy, None, Enumeration::SchnorrEuchner, limits)?;
                (unshift(d.point), d.stats)
            }
            DecoderKind::Ml => (brute_force_ml(system, alphabet)?.0, SearchStats::default()),
            DecoderKind::Zf if lattice => (unshift(zf_decision(&shifted, None)), direct_stats),
            DecoderKind::Zf => (zf_decision(system, Some(alphabet)), direct_stats),
            DecoderKind::ZfDfe if lattice => (unshift(babai_point(&shifted, None)), direct_stats),
            DecoderKind::ZfDfe => (babai_point(system, Some(alphabet)), direct_stats),
            DecoderKind::Sphere => {
                let policy = self.policy(system, &shifted)?;
                if lattice {
                    let d = sphere_decode_with(&shifted, &policy, None, self.order, limits)?;
                    (unshift(d.point), d.stats)
                } else {
                    let d = sphere_decode_with(system, &policy, Some(alphabet), self.order, limits)?;
                    (d.point, d.stats)
                }
            }
            DecoderKind::SbStack => {
                let policy = self.policy(system, &shifted)?;
                if lattice {
                    let d = sb_stack_decode(&shifted, &policy, bias, None, limits)?;
                    (unshift(d.point), d.stats)
                } else {
                    let d = sb_stack_decode(system, &policy, bias, Some(alphabet), limits)?;
                    (d.point, d.stats)
                }
            }
            DecoderKind::Stack => {
                let d = stack_decode(system, alphabet, bias, self.k, limits)?;
                (d.point, d.stats)
            }
            DecoderKind::NeighborStack => {
                let region = SearchRegion::uniform(system.dimension(), self.t);
                let d = neighbor_stack_decode(&shifted, &region, bias, limits)?;
                (unshift(d.point), d.stats)
            }
            DecoderKind::SoftSbStack | DecoderKind::Lsd | DecoderKind::Ssd => {
                unreachable!("list decoders handled above")
            }
        })
    }

    /// Candidate list; hard decoders yield their decision alone.
    pub fn candidates(
        &self,
        system: &TriangularSystem,
        alphabet: &Constellation,
        limits: SearchLimits,
    ) -> Result<CandidateList> {
        let bias = self.bias * system.noise_var();
        match self.kind {
            DecoderKind::SoftSbStack | DecoderKind::Lsd => {
                let shifted = system.shifted(alphabet);
                let c2 = initial_radius(&self.policy(system, &shifted)?, &shifted)?;
                if self.kind == DecoderKind::Lsd {
                    list_sphere_decode_with_radius(system, alphabet, self.list, c2, limits)
                } else {
                    soft_sb_stack(system, alphabet, c2, ListPolicy::FixedSize(self.list), bias, limits)
                }
            }
            DecoderKind::Ssd => shifted_list_decode(system, alphabet, self.list, self.alpha, limits),
            _ => {
                let (point, stats) = self.decide(system, alphabet, limits)?;
                let point: Vec<i64> = point.into_iter().map(|x| alphabet.nearest(x as f64)).collect();
                let raw_cost = system.metric(&point);
                Ok(CandidateList {
                    entries: vec![Candidate { point, raw_cost }],
                    truncated: false,
                    stats,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names_and_parameters() {
        let s: DecoderSpec = "sb-stack:bias=0.5:radius=noise:domain=lattice".parse().unwrap();
        assert_eq!(s.kind, DecoderKind::SbStack);
        assert_eq!(s.bias, 0.5);
        assert_eq!(s.radius, RadiusChoice::Noise);
        assert_eq!(s.domain, Domain::Lattice);
        assert_eq!(s.label, "sb-stack:bias=0.5:radius=noise:domain=lattice");

        let s: DecoderSpec = "kbest:k=4".parse().unwrap();
        assert_eq!((s.kind, s.k), (DecoderKind::Stack, Some(4)));
        let s: DecoderSpec = "lsd:list=2".parse().unwrap();
        assert_eq!((s.radius, s.list), (RadiusChoice::List, 2));
        let s: DecoderSpec = "sphere:radius=12.5:order=se".parse().unwrap();
        assert_eq!(s.radius, RadiusChoice::Fixed(12.5));
        assert_eq!(s.order, Enumeration::SchnorrEuchner);
        assert_eq!("neighbor-stack:t=3".parse::<DecoderSpec>().unwrap().t, 3);
    }

    #[test]
    fn rejects_unknown_or_misplaced_parameters() {
        assert!(matches!("viterbi".parse::<DecoderSpec>(), Err(Error::UnknownDecoder(_))));
        assert!("sphere:bias=1".parse::<DecoderSpec>().is_err());
        assert!("sb-stack:bias=-1".parse::<DecoderSpec>().is_err());
        assert!("sb-stack:radius=list".parse::<DecoderSpec>().is_err());
        assert!("stack:k=0".parse::<DecoderSpec>().is_err());
        assert!("lsd:zeta=0.5".parse::<DecoderSpec>().is_err());
        assert!("zf:m=1".parse::<DecoderSpec>().is_err());
        assert!("sphere:radius".parse::<DecoderSpec>().is_err());
    }

    #[test]
    fn every_kind_round_trips_its_name() {
        for k in DecoderKind::ALL {
            assert_eq!(k.name().parse::<DecoderKind>().unwrap(), k);
        }
    }
}
