//! Two-parameter grids of average cooperation, evaluated with either engine.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::abm::{average_cooperation_abm, AbmConfig};
use crate::error::{Error, Result};
use crate::params::{GameParams, ParamName};
use crate::payoff::PopulationState;
use crate::replicator::{run_outcome, IntegratorConfig};

/// One grid axis: `steps` evenly spaced values of `param` from `min` to `max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub param: ParamName,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(param: ParamName, min: f64, max: f64, steps: usize) -> Self {
        Axis {
            param,
            min,
            max,
            steps,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidConfig(format!(
                "axis {} needs at least 2 steps",
                self.param
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "axis {} bounds must be finite",
                self.param
            )));
        }
        Ok(())
    }
}

/// Parses `name:min:max:steps`, e.g. `c_i:0:0.5:21`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [name, min, max, steps] = parts[..] else {
            return Err(Error::InvalidConfig(format!(
                "axis `{s}` must look like name:min:max:steps"
            )));
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad number `{v}` in axis `{s}`")))
        };
        Ok(Axis {
            param: name.parse()?,
            min: num(min)?,
            max: num(max)?,
            steps: steps
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad step count in axis `{s}`")))?,
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.param, self.min, self.max, self.steps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Engine {
    /// Time-averaged `eta` of one integration from `start`.
    Replicator {
        config: IntegratorConfig,
        start: PopulationState,
    },
    /// Post-burn-in `eta` averaged over replicates; `config.seed` is the
    /// base seed of the whole sweep.
    Abm { config: AbmConfig },
}

impl Engine {
    pub fn replicator(config: IntegratorConfig) -> Self {
        Engine::Replicator {
            config,
            start: PopulationState::uniform(0.5),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Replicator { .. } => "replicator",
            Engine::Abm { .. } => "abm",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis_x: Axis,
    pub axis_y: Axis,
    pub base: GameParams,
    pub engine: Engine,
}

impl SweepSpec {
    pub fn validate(self) -> Result<Self> {
        self.axis_x.validate()?;
        self.axis_y.validate()?;
        if self.axis_x.param == self.axis_y.param {
            return Err(Error::InvalidConfig(format!(
                "both axes vary {}",
                self.axis_x.param
            )));
        }
        match self.engine {
            Engine::Replicator { config, start } => {
                config.validate()?;
                start.check(config.simplex_tolerance)?;
            }
            Engine::Abm { config } => {
                config.validate()?;
            }
        }
        Ok(self)
    }

    pub fn cell_count(&self) -> usize {
        self.axis_x.steps * self.axis_y.steps
    }

    /// Cells are ordered x-major: index `ix * y_steps + iy`.
    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        ix * self.axis_y.steps + iy
    }

    pub fn cell_params(&self, ix: usize, iy: usize) -> GameParams {
        self.base
            .with(self.axis_x.param, self.axis_x.value(ix))
            .with(self.axis_y.param, self.axis_y.value(iy))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepCell {
    pub x_value: f64,
    pub y_value: f64,
    /// NaN for invalid cells.
    pub eta_mean: f64,
    /// Spread over replicates; zero for the deterministic engine.
    pub eta_std: f64,
    pub n_replicates: usize,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub x_param: ParamName,
    pub y_param: ParamName,
    pub x_steps: usize,
    pub y_steps: usize,
    /// x-major, see [`SweepSpec::cell_index`].
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, ix: usize, iy: usize) -> &SweepCell {
        &self.cells[ix * self.y_steps + iy]
    }
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Base seed of a cell's replicates; replicate `r` then uses `cell_seed + r`.
pub fn cell_seed(base_seed: u64, cell_index: usize) -> u64 {
    mix64(base_seed ^ mix64(cell_index as u64))
}

fn invalid_cell(x_value: f64, y_value: f64, why: &Error) -> SweepCell {
    log::warn!("sweep cell ({x_value}, {y_value}) invalid: {why}");
    SweepCell {
        x_value,
        y_value,
        eta_mean: f64::NAN,
        eta_std: f64::NAN,
        n_replicates: 0,
        valid: false,
    }
}

/// Evaluates a single grid cell. Gives the same value as the cell in a full
/// [`run_sweep`].
pub fn evaluate_cell(spec: &SweepSpec, ix: usize, iy: usize) -> SweepCell {
    let x_value = spec.axis_x.value(ix);
    let y_value = spec.axis_y.value(iy);
    let p = match spec.cell_params(ix, iy).validate() {
        Ok(p) => p,
        Err(e) => return invalid_cell(x_value, y_value, &e),
    };
    let evaluated = match spec.engine {
        Engine::Replicator { config, start } => {
            run_outcome(&start, &p, &config).map(|o| (o.time_averaged_eta, 0.0, 1))
        }
        Engine::Abm { config } => {
            let cfg = AbmConfig {
                seed: cell_seed(config.seed, spec.cell_index(ix, iy)),
                ..config
            };
            average_cooperation_abm(&p, &cfg).map(|s| (s.mean, s.std, cfg.replicates))
        }
    };
    match evaluated {
        Ok((eta_mean, eta_std, n_replicates)) if eta_mean.is_finite() => SweepCell {
            x_value,
            y_value,
            eta_mean,
            eta_std,
            n_replicates,
            valid: true,
        },
        Ok((eta, ..)) => invalid_cell(
            x_value,
            y_value,
            &Error::Malformed(format!("non-finite eta {eta}")),
        ),
        Err(e) => invalid_cell(x_value, y_value, &e),
    }
}

/// Evaluates every cell on the current rayon pool. Cells that fail are
/// marked invalid instead of aborting the grid.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let spec = spec.validate()?;
    let ny = spec.axis_y.steps;
    let cells = (0..spec.cell_count())
        .into_par_iter()
        .map(|k| evaluate_cell(&spec, k / ny, k % ny))
        .collect();
    Ok(SweepResult {
        x_param: spec.axis_x.param,
        y_param: spec.axis_y.param,
        x_steps: spec.axis_x.steps,
        y_steps: ny,
        cells,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineComparison {
    /// `|eta_a - eta_b|` per cell, x-major; NaN where either cell is invalid.
    pub differences: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    /// Cells entering `max` and `mean`.
    pub compared: usize,
}

/// Cellwise absolute difference between two sweeps over the same grid.
pub fn compare_engines(a: &SweepResult, b: &SweepResult) -> Result<EngineComparison> {
    if a.x_param != b.x_param
        || a.y_param != b.y_param
        || a.x_steps != b.x_steps
        || a.y_steps != b.y_steps
    {
        return Err(Error::GridMismatch(format!(
            "{}x{} over ({}, {}) vs {}x{} over ({}, {})",
            a.x_steps, a.y_steps, a.x_param, a.y_param, b.x_steps, b.y_steps, b.x_param, b.y_param
        )));
    }
    let close = |u: f64, v: f64| (u - v).abs() <= 1e-9 * u.abs().max(v.abs()).max(1.0);
    let mut differences = Vec::with_capacity(a.cells.len());
    for (ca, cb) in a.cells.iter().zip(&b.cells) {
        if !close(ca.x_value, cb.x_value) || !close(ca.y_value, cb.y_value) {
            return Err(Error::GridMismatch(format!(
                "cell ({}, {}) vs ({}, {})",
                ca.x_value, ca.y_value, cb.x_value, cb.y_value
            )));
        }
        differences.push(if ca.valid && cb.valid {
            (ca.eta_mean - cb.eta_mean).abs()
        } else {
            f64::NAN
        });
    }
    let finite: Vec<f64> = differences.iter().copied().filter(|d| d.is_finite()).collect();
    let compared = finite.len();
    let max = finite.iter().copied().fold(0.0, f64::max);
    let mean = if compared == 0 {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / compared as f64
    };
    Ok(EngineComparison {
        differences,
        max,
        mean,
        compared,
    })
}

/// Where cooperation collapses along a 1-D scan: the first crossing of
/// `threshold` from above, linearly interpolated between grid points.
/// `None` when `eta` never falls below the threshold after being above it.
pub fn collapse_point(xs: &[f64], etas: &[f64], threshold: f64) -> Option<f64> {
    xs.windows(2)
        .zip(etas.windows(2))
        .find(|(_, e)| e[0] >= threshold && e[1] < threshold)
        .map(|(x, e)| x[0] + (x[1] - x[0]) * (e[0] - threshold) / (e[0] - e[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_replicator() -> Engine {
        Engine::replicator(IntegratorConfig {
            step_size: 0.1,
            horizon: 200.0,
            ..IntegratorConfig::default()
        })
    }

    fn spec(engine: Engine) -> SweepSpec {
        SweepSpec {
            axis_x: Axis::new(ParamName::CI, 0.0, 0.5, 2),
            axis_y: Axis::new(ParamName::CC, 0.0, 0.5, 2),
            base: GameParams::default(),
            engine,
        }
    }

    #[test]
    fn axis_parsing_and_values() {
        let a: Axis = "c_i:0:0.5:21".parse().unwrap();
        assert_eq!(a.param, ParamName::CI);
        assert_eq!(a.steps, 21);
        assert_eq!(a.values()[20], 0.5);
        assert!((a.value(7) - 0.175).abs() < 1e-15);
        assert_eq!(a.to_string(), "c_i:0:0.5:21");
        assert!("c_i:0:0.5".parse::<Axis>().is_err());
        assert!("zeta:0:1:3".parse::<Axis>().is_err());
        assert!("q:0:x:3".parse::<Axis>().is_err());
    }

    #[test]
    fn spec_validation() {
        let good = spec(quick_replicator());
        assert!(good.validate().is_ok());
        let mut same = good;
        same.axis_y.param = ParamName::CI;
        assert!(same.validate().is_err());
        let mut short = good;
        short.axis_x.steps = 1;
        assert!(short.validate().is_err());
    }

    #[test]
    fn small_grid_equals_independent_cells() {
        let s = spec(quick_replicator());
        let r = run_sweep(&s).unwrap();
        assert_eq!(r.cells.len(), 4);
        for ix in 0..2 {
            for iy in 0..2 {
                let p = s.cell_params(ix, iy);
                let Engine::Replicator { config, start } = s.engine else {
                    unreachable!()
                };
                let direct = run_outcome(&start, &p, &config).unwrap().time_averaged_eta;
                assert_eq!(r.cell(ix, iy).eta_mean, direct);
                assert!(r.cell(ix, iy).valid);
            }
        }
        assert_eq!(r.cell(1, 0).x_value, 0.5);
        assert_eq!(r.cell(1, 0).y_value, 0.0);
    }

    #[test]
    fn out_of_range_cells_are_marked_invalid() {
        let mut s = spec(quick_replicator());
        s.axis_x = Axis::new(ParamName::Q, 0.5, 1.5, 2);
        let r = run_sweep(&s).unwrap();
        assert!(r.cell(0, 0).valid);
        assert!(!r.cell(1, 0).valid);
        assert!(r.cell(1, 1).eta_mean.is_nan());
    }

    #[test]
    fn abm_cells_reproduce_in_isolation() {
        let cfg = AbmConfig {
            generations: 10,
            replicates: 3,
            seed: 9,
            ..AbmConfig::with_sizes(20, 10)
        };
        let s = spec(Engine::Abm { config: cfg });
        let r = run_sweep(&s).unwrap();
        for ix in 0..2 {
            for iy in 0..2 {
                assert_eq!(*r.cell(ix, iy), evaluate_cell(&s, ix, iy));
                assert_eq!(r.cell(ix, iy).n_replicates, 3);
            }
        }
        assert_ne!(cell_seed(9, 0), cell_seed(9, 1));
        assert_ne!(cell_seed(9, 0), cell_seed(10, 0));
    }

    #[test]
    fn comparison() {
        let r = run_sweep(&spec(quick_replicator())).unwrap();
        let same = compare_engines(&r, &r).unwrap();
        assert!(same.differences.iter().all(|&d| d == 0.0));
        assert_eq!((same.max, same.mean, same.compared), (0.0, 0.0, 4));

        let mut other = spec(quick_replicator());
        other.axis_x.steps = 3;
        let r3 = run_sweep(&other).unwrap();
        assert!(matches!(compare_engines(&r, &r3), Err(Error::GridMismatch(_))));

        let mut shifted = spec(quick_replicator());
        shifted.axis_x.max = 0.4;
        let rs = run_sweep(&shifted).unwrap();
        assert!(compare_engines(&r, &rs).is_err());
    }

    #[test]
    fn collapse_point_interpolates() {
        let xs = [0.0, 0.1, 0.2, 0.3];
        let etas = [0.8, 0.6, 0.0, 0.0];
        let c = collapse_point(&xs, &etas, 0.3).unwrap();
        assert!((c - 0.15).abs() < 1e-12);
        assert_eq!(collapse_point(&xs, &[0.8; 4], 0.3), None);
    }
}
