//! Parameter sweeps: a [`Probe`] evaluated on every point of a [`Grid`].

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::differentiate::derivative;
use crate::analytic::gr;
use crate::ed::{ground_state, measure_occupations, SolverOptions};
use crate::entropy::{entropy_from_occupations, OccupationSet};
use crate::fock::Sector;
use crate::hamiltonian::{assemble, gr_chain, hubbard_chain, Boundary, ModelSpec};
use crate::{Error, Execution, Result};

/// Minimum number of grid points in a sweep.
pub const MIN_GRID_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Driver {
    U,
    Mu,
    H,
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Driver::U => "u",
            Driver::Mu => "mu",
            Driver::H => "h",
        })
    }
}

impl FromStr for Driver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" => Ok(Driver::U),
            "mu" => Ok(Driver::Mu),
            "h" => Ok(Driver::H),
            _ => Err(Error::domain(format!("unknown driver '{s}' (expected u, mu or h)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Ed,
    Analytic,
    Synthetic,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Ed => "ed",
            Source::Analytic => "analytic",
            Source::Synthetic => "synthetic",
        })
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ed" => Ok(Source::Ed),
            "analytic" => Ok(Source::Analytic),
            "synthetic" => Ok(Source::Synthetic),
            _ => Err(Error::domain(format!("unknown source '{s}'"))),
        }
    }
}

/// Strictly increasing, finite parameter values.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(Vec<f64>);

impl Grid {
    /// `steps` equally spaced points from `min` to `max` inclusive.
    pub fn uniform(min: f64, max: f64, steps: usize) -> Result<Grid> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::domain(format!("degenerate grid [{min}, {max}]")));
        }
        if steps < MIN_GRID_POINTS {
            return Err(Error::domain(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {steps}"
            )));
        }
        let h = (max - min) / (steps - 1) as f64;
        let mut values: Vec<f64> = (0..steps).map(|i| min + i as f64 * h).collect();
        values[steps - 1] = max;
        Grid::from_values(values)
    }

    pub fn from_values(values: Vec<f64>) -> Result<Grid> {
        if values.len() < MIN_GRID_POINTS {
            return Err(Error::domain(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("grid must be finite and strictly increasing"));
        }
        Ok(Grid(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The common spacing, if all spacings agree to `1e-9` relative.
    pub fn step(&self) -> Option<f64> {
        let v = &self.0;
        let h = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
        v.windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(v[0].abs().max(1.0) * 1e-6))
            .then_some(h)
    }
}

/// Per-point annotations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFlags {
    /// The ground level is degenerate (within a sector, or across sectors).
    pub degenerate: bool,
    /// The filling was clamped to an end of the allowed range.
    pub saturated: bool,
}

impl PointFlags {
    pub fn any(&self) -> bool {
        self.degenerate || self.saturated
    }
}

impl fmt::Display for PointFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.degenerate, "degenerate"), (self.saturated, "saturated")]
            .into_iter()
            .filter_map(|(on, name)| on.then_some(name))
            .collect();
        f.write_str(&names.join(";"))
    }
}

impl FromStr for PointFlags {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut flags = PointFlags::default();
        for name in s.split(';').filter(|t| !t.is_empty()) {
            match name {
                "degenerate" => flags.degenerate = true,
                "saturated" => flags.saturated = true,
                _ => return Err(Error::domain(format!("unknown point flag '{name}'"))),
            }
        }
        Ok(flags)
    }
}

/// Observables at one grid point. Synthetic signals carry only an entropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    /// Ground-state energy per site, including the `-mu N - h (N_up - N_down)/2` terms.
    pub e0: Option<f64>,
    pub occupations: Option<OccupationSet>,
    pub entropy: f64,
    pub flags: PointFlags,
}

impl Record {
    pub fn from_occupations(e0: f64, occ: OccupationSet, flags: PointFlags) -> Record {
        Record {
            e0: Some(e0),
            occupations: Some(occ),
            entropy: entropy_from_occupations(&occ),
            flags,
        }
    }

    pub fn signal(entropy: f64) -> Record {
        Record {
            e0: None,
            occupations: None,
            entropy,
            flags: PointFlags::default(),
        }
    }

    pub fn value(&self, column: Column) -> Option<f64> {
        let occ = self.occupations;
        match column {
            Column::Entropy => Some(self.entropy),
            Column::E0 => self.e0,
            Column::N => occ.map(|o| o.n()),
            Column::M => occ.map(|o| o.m()),
            Column::W0 => occ.map(|o| o.w0),
            Column::WUp => occ.map(|o| o.w_up),
            Column::WDown => occ.map(|o| o.w_down),
            Column::W2 => occ.map(|o| o.w2),
        }
    }
}

/// A per-point observable that can be differentiated or classified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Entropy,
    E0,
    N,
    M,
    W0,
    WUp,
    WDown,
    W2,
}

impl Column {
    pub const ALL: [Column; 8] = [
        Column::E0,
        Column::N,
        Column::M,
        Column::W0,
        Column::WUp,
        Column::WDown,
        Column::W2,
        Column::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::Entropy => "entropy",
            Column::E0 => "e0",
            Column::N => "n",
            Column::M => "m",
            Column::W0 => "w0",
            Column::WUp => "w_up",
            Column::WDown => "w_down",
            Column::W2 => "w2",
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Column::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown column '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub driver: Driver,
    pub source: Source,
    pub grid: Grid,
    pub records: Vec<Record>,
    /// `d^j entropy / dg^j` for `j = 1, 2, 3`, present on uniform grids.
    pub entropy_derivatives: [Option<Vec<f64>>; 3],
}

impl SweepResult {
    /// Assembles a result and fills the entropy derivative columns.
    pub fn new(driver: Driver, source: Source, grid: Grid, records: Vec<Record>) -> Result<SweepResult> {
        if records.len() != grid.len() {
            return Err(Error::domain(format!(
                "{} records for {} grid points",
                records.len(),
                grid.len()
            )));
        }
        let mut sweep = SweepResult {
            driver,
            source,
            grid,
            records,
            entropy_derivatives: [None, None, None],
        };
        if let Some(h) = sweep.grid.step() {
            let e = sweep.entropy();
            for j in 1..=3 {
                sweep.entropy_derivatives[j - 1] = derivative(&e, h, j).ok();
            }
        }
        Ok(sweep)
    }

    pub fn entropy(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.entropy).collect()
    }

    /// The column at every point, or `None` if any point lacks it.
    pub fn column(&self, column: Column) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.value(column)).collect()
    }

    /// `d^order column / dg^order` on the (uniform) grid.
    pub fn differentiate(&self, column: Column, order: usize) -> Result<Vec<f64>> {
        let h = self
            .grid
            .step()
            .ok_or_else(|| Error::domain("differentiation needs a uniform grid"))?;
        let values = self
            .column(column)
            .ok_or_else(|| Error::domain(format!("column {column} is not available for this sweep")))?;
        derivative(&values, h, order)
    }
}

/// Evaluates observables at one value of the driving parameter.
pub trait Probe: Sync {
    fn driver(&self) -> Driver;
    fn source(&self) -> Source;
    fn evaluate(&self, g: f64) -> Result<Record>;
}

/// Evaluates `probe` on every grid point. Points may run in parallel; the
/// result is in grid order either way.
pub fn sweep(probe: &dyn Probe, grid: &Grid, exec: Execution) -> Result<SweepResult> {
    let records = evaluate_all(probe, grid.values(), exec)?;
    SweepResult::new(probe.driver(), probe.source(), grid.clone(), records)
}

pub(crate) fn evaluate_all(probe: &dyn Probe, points: &[f64], exec: Execution) -> Result<Vec<Record>> {
    exec.map(points, |&g| probe.evaluate(g))
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Sweep {
                index,
                g: points[index],
                source: Box::new(e),
            })
        })
        .collect()
}

/// The closed-form solution at zero magnetization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrProbe {
    pub driver: Driver,
    pub u: f64,
    pub mu: f64,
    /// Filling used when the driver is `u`.
    pub n: f64,
}

impl GrProbe {
    pub fn new(driver: Driver, u: f64, mu: f64, n: f64) -> Result<GrProbe> {
        if driver == Driver::H {
            return Err(Error::domain("the closed-form model has no magnetic-field solution"));
        }
        if !(0.0..=1.0).contains(&n) {
            return Err(Error::domain(format!("filling {n} outside [0, 1]")));
        }
        Ok(GrProbe { driver, u, mu, n })
    }
}

impl Probe for GrProbe {
    fn driver(&self) -> Driver {
        self.driver
    }

    fn source(&self) -> Source {
        Source::Analytic
    }

    fn evaluate(&self, g: f64) -> Result<Record> {
        let (u, mu, n, saturated) = match self.driver {
            Driver::U => (g, self.mu, self.n, false),
            Driver::Mu => {
                let filling = gr::gr_n_of_mu(self.u, g)?;
                (self.u, g, filling.n, filling.saturation.is_some())
            }
            Driver::H => return Err(Error::domain("the closed-form model has no magnetic-field solution")),
        };
        let occ = gr::gr_occupations(u, n)?;
        let e0 = gr::gr_e0(u, n)? - mu * n;
        Ok(Record::from_occupations(
            e0,
            occ,
            PointFlags {
                saturated,
                ..Default::default()
            },
        ))
    }
}

/// Hamiltonian family for exact diagonalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Hubbard,
    Gr,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hubbard" => Ok(Family::Hubbard),
            "gr" => Ok(Family::Gr),
            _ => Err(Error::domain(format!("unknown model family '{s}'"))),
        }
    }
}

#[derive(Clone, Debug)]
struct SectorGround {
    /// Lowest energy at `mu = 0`.
    energy: f64,
    particles: usize,
    multiplicity: usize,
    occupations: OccupationSet,
}

/// Exact diagonalization of a finite chain.
///
/// For `u` and `h` drivers the ground state is taken in one fixed sector
/// (half filling, `N_up = ceil(L/2)`, unless set). For the `mu` driver every
/// sector is solved once at `mu = 0` and each grid point picks the sector
/// minimizing `E - mu N`; ties average over the tied sectors.
#[derive(Debug)]
pub struct EdProbe {
    family: Family,
    boundary: Boundary,
    sites: usize,
    u: f64,
    mu: f64,
    h: f64,
    driver: Driver,
    sector: (usize, usize),
    site: usize,
    solver: SolverOptions,
    cache: Vec<OnceLock<Result<SectorGround>>>,
}

impl EdProbe {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        family: Family,
        boundary: Boundary,
        sites: usize,
        u: f64,
        mu: f64,
        h: f64,
        driver: Driver,
    ) -> Result<EdProbe> {
        // Validates the size and parameters once.
        Self::spec(family, boundary, sites, u, mu, h)?;
        let sectors = (sites + 1) * (sites + 1);
        Ok(EdProbe {
            family,
            boundary,
            sites,
            u,
            mu,
            h,
            driver,
            sector: (sites.div_ceil(2), sites / 2),
            site: (sites - 1) / 2,
            solver: SolverOptions {
                residual_tol: 1e-12,
                ..Default::default()
            },
            cache: (0..sectors).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Fixed `(N_up, N_down)` for `u` and `h` drivers.
    pub fn with_sector(mut self, n_up: usize, n_down: usize) -> Result<EdProbe> {
        Sector::enumerate(self.sites, n_up, n_down)?;
        self.sector = (n_up, n_down);
        Ok(self)
    }

    pub fn with_site(mut self, site: usize) -> Result<EdProbe> {
        if site >= self.sites {
            return Err(Error::domain(format!("site {site} outside chain of {}", self.sites)));
        }
        self.site = site;
        Ok(self)
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> EdProbe {
        self.solver = solver;
        self
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    fn spec(family: Family, boundary: Boundary, sites: usize, u: f64, mu: f64, h: f64) -> Result<ModelSpec> {
        match family {
            Family::Hubbard => hubbard_chain(sites, u, mu, h, boundary),
            Family::Gr => gr_chain(sites, u, mu, h),
        }
    }

    fn solve(&self, spec: &ModelSpec, n_up: usize, n_down: usize) -> Result<SectorGround> {
        let sector = Sector::enumerate(self.sites, n_up, n_down)?;
        let h = assemble(spec, &sector)?;
        let gs = ground_state(&h, &sector, &self.solver)?;
        Ok(SectorGround {
            energy: gs.energy,
            particles: n_up + n_down,
            multiplicity: gs.manifold.len(),
            occupations: measure_occupations(&gs, self.site)?,
        })
    }

    fn sector_ground(&self, n_up: usize, n_down: usize) -> Result<&SectorGround> {
        let slot = &self.cache[n_up * (self.sites + 1) + n_down];
        slot.get_or_init(|| {
            let spec = Self::spec(self.family, self.boundary, self.sites, self.u, 0.0, self.h)?;
            self.solve(&spec, n_up, n_down)
        })
        .as_ref()
        .map_err(Clone::clone)
    }

    fn grand_canonical(&self, mu: f64) -> Result<Record> {
        let l = self.sites;
        let mut levels = Vec::with_capacity((l + 1) * (l + 1));
        for n_up in 0..=l {
            for n_down in 0..=l {
                let s = self.sector_ground(n_up, n_down)?;
                levels.push((s.energy - mu * s.particles as f64, s));
            }
        }
        let best = levels.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
        let tol = self.solver.degeneracy_tol * best.abs().max(1.0);
        let tied: Vec<&SectorGround> = levels
            .iter()
            .filter(|(e, _)| *e - best <= tol)
            .map(|(_, s)| *s)
            .collect();
        let weight: usize = tied.iter().map(|s| s.multiplicity).sum();
        let mut w = [0.0; 4];
        for s in &tied {
            for (acc, p) in w.iter_mut().zip(s.occupations.probabilities()) {
                *acc += p * s.multiplicity as f64 / weight as f64;
            }
        }
        let occ = OccupationSet::from_probabilities(w[0], w[1], w[2], w[3])?;
        let flags = PointFlags {
            degenerate: weight > 1,
            saturated: tied.iter().all(|s| s.particles == 0 || s.particles == 2 * l),
        };
        Ok(Record::from_occupations(best / l as f64, occ, flags))
    }
}

impl Probe for EdProbe {
    fn driver(&self) -> Driver {
        self.driver
    }

    fn source(&self) -> Source {
        Source::Ed
    }

    fn evaluate(&self, g: f64) -> Result<Record> {
        let (mut u, mut h) = (self.u, self.h);
        match self.driver {
            Driver::Mu => return self.grand_canonical(g),
            Driver::U => u = g,
            Driver::H => h = g,
        }
        let spec = Self::spec(self.family, self.boundary, self.sites, u, self.mu, h)?;
        let s = self.solve(&spec, self.sector.0, self.sector.1)?;
        let flags = PointFlags {
            degenerate: s.multiplicity > 1,
            saturated: false,
        };
        Ok(Record::from_occupations(
            s.energy / self.sites as f64,
            s.occupations,
            flags,
        ))
    }
}

/// Constructed test signals with known singular structure at `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Signal {
    /// `amplitude |g - center|^exponent`
    Power { center: f64, exponent: f64, amplitude: f64 },
    /// `|g - center|^exponent |ln |g - center||`
    LogPower { center: f64, exponent: f64 },
    /// `slope_left (g - center)` below the center, `slope_right (g - center)` above.
    Kink {
        center: f64,
        slope_left: f64,
        slope_right: f64,
    },
    /// `sin(g) + height` for `g > center`.
    Step { center: f64, height: f64 },
    /// `sin(g) + g^2 / 10`
    Smooth,
}

impl Signal {
    pub fn value(&self, g: f64) -> f64 {
        match *self {
            Signal::Power {
                center,
                exponent,
                amplitude,
            } => amplitude * (g - center).abs().powf(exponent),
            Signal::LogPower { center, exponent } => {
                let x = (g - center).abs();
                x.powf(exponent) * x.ln().abs()
            }
            Signal::Kink {
                center,
                slope_left,
                slope_right,
            } => {
                let x = g - center;
                if x < 0.0 {
                    slope_left * x
                } else {
                    slope_right * x
                }
            }
            Signal::Step { center, height } => g.sin() + if g > center { height } else { 0.0 },
            Signal::Smooth => g.sin() + 0.1 * g * g,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticProbe {
    pub signal: Signal,
    pub driver: Driver,
}

impl SyntheticProbe {
    pub fn new(signal: Signal) -> SyntheticProbe {
        SyntheticProbe {
            signal,
            driver: Driver::U,
        }
    }
}

impl Probe for SyntheticProbe {
    fn driver(&self) -> Driver {
        self.driver
    }

    fn source(&self) -> Source {
        Source::Synthetic
    }

    fn evaluate(&self, g: f64) -> Result<Record> {
        let v = self.signal.value(g);
        if v.is_finite() {
            Ok(Record::signal(v))
        } else {
            Err(Error::domain(format!("signal is not finite at {g}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_shape() {
        let g = Grid::uniform(0.0, 8.0, 161).unwrap();
        assert_eq!(g.len(), 161);
        assert_eq!(g.values()[160], 8.0);
        assert!((g.step().unwrap() - 0.05).abs() < 1e-15);
        assert!(Grid::uniform(4.0, 4.0, 5).is_err());
        assert!(Grid::uniform(0.0, 1.0, 4).is_err());
        assert!(Grid::from_values(vec![0.0, 1.0, 1.0, 2.0, 3.0]).is_err());
        assert!(Grid::from_values(vec![0.0, 1.0, 1.5, 2.0, 3.0])
            .unwrap()
            .step()
            .is_none());
    }

    #[test]
    fn flag_text_round_trip() {
        for flags in [
            PointFlags::default(),
            PointFlags {
                degenerate: true,
                saturated: false,
            },
            PointFlags {
                degenerate: true,
                saturated: true,
            },
        ] {
            assert_eq!(flags.to_string().parse::<PointFlags>().unwrap(), flags);
        }
        assert!("bogus".parse::<PointFlags>().is_err());
    }

    #[test]
    fn gr_sweep_entropy_starts_at_two_and_decreases() {
        let probe = GrProbe::new(Driver::U, 0.0, 0.0, 1.0).unwrap();
        let grid = Grid::uniform(0.0, 8.0, 161).unwrap();
        let s = sweep(&probe, &grid, Execution::Sequential).unwrap();
        let e = s.entropy();
        assert_eq!(e[0], 2.0);
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        for r in &s.records {
            let sum: f64 = r.occupations.unwrap().probabilities().iter().sum();
            assert!((sum - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let probe = GrProbe::new(Driver::Mu, 3.0 * gr::U_C, 0.0, 1.0).unwrap();
        let grid = Grid::uniform(-4.0, 4.0, 101).unwrap();
        let a = sweep(&probe, &grid, Execution::Sequential).unwrap();
        let b = sweep(&probe, &grid, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors_carry_the_grid_index() {
        let probe = SyntheticProbe::new(Signal::Power {
            center: 1.0,
            exponent: -0.5,
            amplitude: 1.0,
        });
        let grid = Grid::uniform(0.0, 2.0, 5).unwrap();
        match sweep(&probe, &grid, Execution::Sequential) {
            Err(Error::Sweep { index, g, .. }) => assert_eq!((index, g), (2, 1.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gr_has_no_field_solution() {
        assert!(GrProbe::new(Driver::H, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn ed_mu_staircase() {
        let probe = EdProbe::new(Family::Hubbard, Boundary::Periodic, 4, 4.0, 0.0, 0.0, Driver::Mu).unwrap();
        let grid = Grid::uniform(-4.0, 8.0, 121).unwrap();
        let s = sweep(&probe, &grid, Execution::Sequential).unwrap();
        let n = s.column(Column::N).unwrap();
        assert!(n.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(n
            .iter()
            .all(|x| (4.0 * x - (4.0 * x).round()).abs() < 1e-9 || s.records.iter().any(|r| r.flags.degenerate)));
        let e = s.entropy();
        for i in 1..n.len() {
            if (n[i] - n[i - 1]).abs() < 1e-12 && !s.records[i].flags.degenerate && !s.records[i - 1].flags.degenerate {
                assert!((e[i] - e[i - 1]).abs() < 1e-10);
            }
        }
        let e0 = s.column(Column::E0).unwrap();
        assert!(e0.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(s.records[0].flags.saturated && n[0] == 0.0);
        assert!(s.records[120].flags.saturated && n[120] == 2.0);
    }
}
