//! Builds core objects from a validated configuration.

use naifs_pressure::measures::{BorelMeasure, Generator, Integration, MeasureParams};
use naifs_pressure::pressure::CoverParams;
use naifs_pressure::{
    MapSpec, Metric, NaifsSystem, Point, Potential, SampleSet, StateSpace, TargetSet, TreeBudget,
};

use crate::config::{
    Config, ConfigError, ConfigErrors, FamilyKind, IntegrationConfig, MapConfig, MeasuresConfig, MetricConfig,
    PointConfig, PotentialKindConfig, SpaceKind, TargetKind,
};

/// Everything a task needs, built once per run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: Config,
    pub sys: NaifsSystem,
    pub phi: Potential,
    pub target: TargetSet,
    /// Finite sample of the target set.
    pub z: SampleSet,
    /// Ball centres for covers; contains `z`.
    pub pool: SampleSet,
    /// Sample for separated-set counts.
    pub entropy_sample: SampleSet,
    pub metric: Metric,
    pub budget: TreeBudget,
    pub cover: CoverParams,
    pub measures: Option<MeasureSetup>,
}

#[derive(Debug, Clone)]
pub struct MeasureSetup {
    pub family: Vec<(String, BorelMeasure)>,
    pub params: MeasureParams,
}

fn space_of(cfg: &Config) -> StateSpace {
    let s = &cfg.system;
    match s.space {
        SpaceKind::Circle => StateSpace::Circle,
        SpaceKind::Interval => StateSpace::Interval,
        SpaceKind::Torus => StateSpace::Torus { dim: s.dim.unwrap_or(1) },
        SpaceKind::Symbolic => StateSpace::Symbolic { alphabet: s.alphabet.unwrap_or(2), length: s.length.unwrap_or(1) },
    }
}

pub fn map_spec(m: &MapConfig) -> MapSpec {
    let (spec, lip) = match m {
        MapConfig::AffineMod1 { slope, offset, lipschitz } => (MapSpec::affine_mod1(*slope, *offset), lipschitz),
        MapConfig::PiecewiseLinear { breakpoints, slopes, left_values, lipschitz } => {
            (MapSpec::piecewise_linear(breakpoints.clone(), slopes.clone(), left_values.clone()), lipschitz)
        }
        MapConfig::ContinuousPiecewiseLinear { breakpoints, slopes, start, lipschitz } => {
            (MapSpec::continuous_piecewise_linear(breakpoints.clone(), slopes.clone(), *start), lipschitz)
        }
        MapConfig::AffineContraction { matrix, offset, lipschitz } => {
            (MapSpec::affine_contraction(matrix.clone(), offset.clone()), lipschitz)
        }
        MapConfig::Shift { fill, lipschitz } => (MapSpec::shift(*fill), lipschitz),
    };
    match lip {
        Some(l) => spec.with_lipschitz(*l),
        None => spec,
    }
}

fn point_of(space: &StateSpace, p: &PointConfig) -> Result<Point, String> {
    match (space, p) {
        (StateSpace::Symbolic { length, .. }, PointConfig::List(v)) => {
            let mut s = Vec::with_capacity(v.len());
            for &c in v {
                if c < 0.0 || c.fract() != 0.0 || c > 255.0 {
                    return Err(format!("symbol {c} is not a small nonnegative integer"));
                }
                s.push(c as u8);
            }
            if s.len() != *length {
                return Err(format!("symbol string has length {}, expected {length}", s.len()));
            }
            Ok(Point::Symbols(s))
        }
        (StateSpace::Symbolic { .. }, _) => Err("symbolic points are lists of symbols".into()),
        (StateSpace::Torus { .. }, PointConfig::List(v)) => Ok(Point::Vector(v.clone())),
        (_, PointConfig::Real(x)) => Ok(Point::Real(*x)),
        (_, PointConfig::Int(x)) => Ok(Point::Real(*x as f64)),
        (_, PointConfig::List(_)) => Err("expected a number".into()),
    }
}

fn points_of(space: &StateSpace, path: &str, pts: &[PointConfig], errs: &mut Vec<ConfigError>) -> Vec<Point> {
    let mut out = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        match point_of(space, p).and_then(|q| space.contains(&q).map(|_| q).map_err(|e| e.to_string())) {
            Ok(q) => out.push(q),
            Err(m) => errs.push(ConfigError::new(format!("{path}[{i}]"), m)),
        }
    }
    out
}

fn potential_of(cfg: &Config) -> Result<Potential, String> {
    let p = &cfg.potential;
    let missing = |k: &str| format!("`{k}` is required for this kind");
    let base = match p.kind {
        PotentialKindConfig::Zero => Potential::zero(),
        PotentialKindConfig::Constant => Potential::constant(p.value.ok_or_else(|| missing("value"))?),
        PotentialKindConfig::Affine => {
            Potential::affine(p.weights.clone().ok_or_else(|| missing("weights"))?, p.offset.unwrap_or(0.0))
        }
        PotentialKindConfig::SymbolTable => Potential::symbol_table(p.values.clone().ok_or_else(|| missing("values"))?),
        PotentialKindConfig::Grid => {
            Potential::grid(p.nodes.ok_or_else(|| missing("nodes"))?, p.values.clone().ok_or_else(|| missing("values"))?)
        }
    };
    Ok(if p.shift != 0.0 { base.shifted(p.shift) } else { base })
}

fn family_of(space: &StateSpace, m: &MeasuresConfig, seed: u64, errs: &mut Vec<ConfigError>) -> Vec<(String, BorelMeasure)> {
    let mut fam = Vec::new();
    match m.family {
        FamilyKind::Bernoulli => {
            for p in m.probs.iter().flatten() {
                fam.push((format!("bernoulli{p:?}"), BorelMeasure::bernoulli(p.clone())));
            }
        }
        FamilyKind::BernoulliSweep => {
            let steps = m.steps.unwrap_or(0);
            for k in 1..=steps {
                let p = k as f64 / (steps + 1) as f64;
                fam.push((format!("bernoulli(p1={p})"), BorelMeasure::bernoulli(vec![1.0 - p, p])));
            }
        }
        FamilyKind::UniformSample => {
            match BorelMeasure::sampled(space, Generator::Uniform, m.count.unwrap_or(0), seed) {
                Ok(mu) => fam.push(("uniform_sample".into(), mu)),
                Err(e) => errs.push(ConfigError::new("measures.count", e.to_string())),
            }
        }
        FamilyKind::Atomic => {
            let pts = points_of(space, "measures.points", m.points.as_deref().unwrap_or(&[]), errs);
            let w = m.weights.clone().unwrap_or_default();
            fam.push(("atomic".into(), BorelMeasure::Atomic { points: pts, weights: w }));
        }
    }
    if fam.is_empty() {
        errs.push(ConfigError::new("measures", "the measure family is empty"));
    }
    for (i, (_, mu)) in fam.iter().enumerate() {
        if let Err(e) = mu.validate(space) {
            errs.push(ConfigError::new(format!("measures[{i}]"), e.to_string()));
        }
    }
    fam
}

impl Experiment {
    pub fn build(config: &Config) -> Result<Experiment, ConfigErrors> {
        let mut errs = Vec::new();
        let space = space_of(config);
        let families = |list: &[Vec<MapConfig>]| list.iter().map(|f| f.iter().map(map_spec).collect()).collect();
        let sys = match NaifsSystem::new(space.clone(), families(&config.system.preamble), families(&config.system.period)) {
            Ok(s) => Some(s),
            Err(e) => {
                errs.push(ConfigError::new("system", e.to_string()));
                None
            }
        };
        let phi = match potential_of(config).and_then(|p| p.validate(&space).map(|_| p).map_err(|e| e.to_string())) {
            Ok(p) => Some(p),
            Err(m) => {
                errs.push(ConfigError::new("potential", m));
                None
            }
        };
        let t = &config.target;
        let mut target_errs = Vec::new();
        let (target, z) = match t.kind {
            TargetKind::Whole => (TargetSet::Whole, TargetSet::Whole.sample(&space, t.resolution, t.fill)),
            TargetKind::Cylinders => {
                let ts = TargetSet::Cylinders(t.words.clone().unwrap_or_default());
                let z = ts.sample(&space, t.resolution, t.fill);
                (ts, z)
            }
            TargetKind::Points => {
                let pts = points_of(&space, "target.points", t.points.as_deref().unwrap_or(&[]), &mut target_errs);
                let ts = TargetSet::Points(pts);
                let z = ts.sample(&space, t.resolution, t.fill);
                (ts, z)
            }
            TargetKind::Arc => {
                let z = SampleSet::segment(&space, t.start.unwrap_or(0.0), t.length.unwrap_or(1.0), t.count.unwrap_or(t.resolution));
                match &z {
                    Ok(s) => (TargetSet::Points(s.points().to_vec()), z),
                    Err(_) => (TargetSet::Whole, z),
                }
            }
        };
        errs.extend(target_errs);
        let z = match z {
            Ok(z) => Some(z),
            Err(e) => {
                errs.push(ConfigError::new("target", e.to_string()));
                None
            }
        };
        let g = &config.grids;
        let sample_at = |res: usize| -> Result<SampleSet, String> {
            match t.kind {
                TargetKind::Whole | TargetKind::Cylinders => target.sample(&space, res, t.fill).map_err(|e| e.to_string()),
                _ => Err("only whole-space and cylinder targets can be resampled".into()),
            }
        };
        let entropy_sample = match (g.sample_resolution, &z) {
            (Some(res), _) => match sample_at(res) {
                Ok(s) => Some(s),
                Err(m) => {
                    errs.push(ConfigError::new("grids.sample_resolution", m));
                    None
                }
            },
            (None, z) => z.clone(),
        };
        let pool = match (g.pool_resolution, &z) {
            (Some(res), Some(z)) => match TargetSet::Whole.sample(&space, res, t.fill) {
                Ok(extra) => Some(z.union(&space, &extra)),
                Err(e) => {
                    errs.push(ConfigError::new("grids.pool_resolution", e.to_string()));
                    None
                }
            },
            (_, z) => z.clone(),
        };
        let budget = TreeBudget { node_budget: g.node_budget, beam_width: g.beam_width };
        let cover = CoverParams { window: g.window, tol: g.tol, max_expansions: g.max_expansions, budget };
        let measures = config.measures.as_ref().map(|m| {
            let family = family_of(&space, m, config.seed, &mut errs);
            let integration = match m.integration {
                IntegrationConfig::MonteCarlo => Integration::MonteCarlo { count: m.samples, seed: config.seed },
                IntegrationConfig::ExactAtomic => Integration::ExactAtomic,
            };
            let params = MeasureParams { r_grid: m.r_grid.clone(), n_window: (m.n_window[0], m.n_window[1]), integration, budget };
            MeasureSetup { family, params }
        });
        let metric = match g.metric {
            MetricConfig::Dn => Metric::Dn,
            MetricConfig::DnStar => Metric::DnStar,
        };
        match (sys, phi, z, entropy_sample, pool) {
            (Some(sys), Some(phi), Some(z), Some(entropy_sample), Some(pool)) if errs.is_empty() => Ok(Experiment {
                config: config.clone(),
                sys,
                phi,
                target,
                z,
                pool,
                entropy_sample,
                metric,
                budget,
                cover,
                measures,
            }),
            _ => Err(ConfigErrors(errs)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    #[test]
    fn invalid_maps_and_targets_are_collected() {
        let text = r#"
[system]
space = "circle"
period = [[{ kind = "shift" }]]

[target]
kind = "cylinders"
words = [[0]]

[grids]
n_range = [1]
eps_grid = [0.5]

[task]
kind = "sup_entropy"
"#;
        let errs = Experiment::build(&parse(text).unwrap()).unwrap_err();
        let paths: Vec<&str> = errs.0.iter().map(|e| e.path.as_str()).collect();
        assert!(paths.contains(&"system") && paths.contains(&"target"), "{errs}");
    }
}
