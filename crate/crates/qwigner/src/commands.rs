//! The work behind each CLI subcommand.

use std::fmt;
use std::path::PathBuf;

use qwigner_core::observables::{series_grid, NegativityAccumulator};
use qwigner_core::walk::for_each_step;
use qwigner_core::wigner::{field_grid_for, FieldEvolver, WignerTransform};
use qwigner_core::{
    coin_matrix, entropy_series, evolve, momentum_amplitudes, momentum_matrix, negativity_series,
    position_distribution, position_marginal, position_sigma, wigner_from_state, CoinOperator,
    EvolutionMethod, HermitianMatrix2, InitialStateSpec, KGrid, WalkState, WignerField,
};

use crate::config::{ExperimentConfig, LabelledInitial};
use crate::error::{CliError, Result};
use crate::fast::FftTransform;
use crate::format::{self, DistributionRow, FieldWriter, SeriesRow};

/// Rows computed per parallel batch when streaming a field to disk.
const ROW_CHUNK: usize = 64;

fn coin(config: &ExperimentConfig) -> Result<CoinOperator> {
    Ok(coin_matrix(config.theta)?)
}

fn k_grid(config: &ExperimentConfig) -> Result<KGrid> {
    Ok(KGrid::full_period(config.k_points())?)
}

/// Requested times, sorted and deduplicated; defaults to the last step.
fn times(config: &ExperimentConfig) -> Result<Vec<u64>> {
    let mut times = config.times.clone().unwrap_or_else(|| vec![config.steps]);
    if let Some(&bad) = times.iter().find(|&&t| t > config.steps) {
        return Err(CliError::InvalidArgument(format!(
            "requested time {bad} exceeds the number of steps {}",
            config.steps
        )));
    }
    times.sort_unstable();
    times.dedup();
    Ok(times)
}

fn initial_state(init: &InitialStateSpec, steps: u64) -> Result<WalkState> {
    Ok(init.build(init.window_for(steps))?)
}

/// All occupied sites share one parity, so the field lives on even rows.
fn single_parity(state: &WalkState) -> bool {
    let dist = position_distribution(state);
    dist.windows(2).all(|w| (w[1].0 - w[0].0).rem_euclid(2) == 0)
}

/// Writes `distribution` (t, n, p) at the requested times and `sigma`
/// (t, σ) for the same times.
pub fn run_simulate(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let coin = coin(config)?;
    let times = times(config)?;
    let mut files = Vec::new();
    for init in &config.initials {
        let state = initial_state(&init.spec, config.steps)?;
        let (mut dist, mut sigma) = (Vec::new(), Vec::new());
        for_each_step(&state, &coin, config.steps, |s| {
            if times.binary_search(&s.t()).is_ok() {
                dist.extend(position_distribution(s).into_iter().map(|(n, p)| DistributionRow { t: s.t(), n, p }));
                sigma.push(SeriesRow { t: s.t(), value: position_sigma(s) });
            }
            Ok(())
        })?;
        let path = config.output_file("distribution", init);
        format::write_distribution(&path, config.format, &dist)?;
        files.push(path);
        let path = config.output_file("sigma", init);
        format::write_series(&path, config.format, &sigma)?;
        files.push(path);
    }
    Ok(files)
}

/// One exported field snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExport {
    pub t: u64,
    pub path: PathBuf,
    pub rows: usize,
    /// `Σ_n ∫_{−π/2}^{π/2} Tr W dk`, when the k grid tiles that range.
    pub normalization: Option<f64>,
    pub negativity: Option<f64>,
}

struct RowStats(Option<NegativityAccumulator>);

impl RowStats {
    fn new(k: &KGrid) -> Self {
        RowStats(NegativityAccumulator::new(k).ok())
    }

    fn add(&mut self, row: &[HermitianMatrix2]) {
        if let Some(acc) = &mut self.0 {
            acc.add_row(row);
        }
    }

    fn finish(self) -> (Option<f64>, Option<f64>) {
        match self.0 {
            Some(acc) => (Some(acc.normalization()), acc.finish().ok()),
            None => (None, None),
        }
    }
}

/// Writes `wigner_t<t>` for every requested time. The amplitude route
/// (default) evolves the state and streams FFT-evaluated rows straight to
/// disk; the recursion route advances one field in phase space.
pub fn run_wigner_field(config: &ExperimentConfig) -> Result<Vec<FieldExport>> {
    let coin = coin(config)?;
    let times = times(config)?;
    let k = k_grid(config)?;
    let mut exports = Vec::new();
    for init in &config.initials {
        let state = initial_state(&init.spec, config.steps)?;
        let even_only = single_parity(&state);
        let path_for = |t: u64| config.output_file(&format!("wigner_t{t}"), init);
        match config.method.unwrap_or(EvolutionMethod::Amplitude) {
            EvolutionMethod::Amplitude => {
                let mut s = state;
                for &t in &times {
                    s = evolve(&s, &coin, t - s.t());
                    let path = path_for(t);
                    let mut w = FieldWriter::create(&path, config.format, t, &k)?;
                    let mut stats = RowStats::new(&k);
                    FftTransform.for_each_row(&s, &k, ROW_CHUNK, even_only, |n, row| {
                        stats.add(row);
                        w.write_row(n, row)
                    })?;
                    let rows = w.finish()?;
                    let (normalization, negativity) = stats.finish();
                    exports.push(FieldExport { t, path, rows, normalization, negativity });
                }
            }
            EvolutionMethod::Recursion => {
                let grid = series_grid(&init.spec, config.steps, k)?;
                let mut ev = FieldEvolver::new(FftTransform.transform(&state, &grid)?);
                for &t in &times {
                    while ev.field().t() < t {
                        ev.advance(&coin);
                    }
                    let field = ev.field();
                    let path = path_for(t);
                    let rows = format::write_field(&path, config.format, field, field.support(), even_only)?;
                    let mut stats = RowStats::new(&k);
                    field.rows().for_each(|(_, row)| stats.add(row));
                    let (normalization, negativity) = stats.finish();
                    exports.push(FieldExport { t, path, rows, normalization, negativity });
                }
            }
        }
    }
    Ok(exports)
}

/// Writes `negativity` rows (t, δ) for t = 0..=steps.
pub fn run_negativity_series(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let coin = coin(config)?;
    let method = config.method.unwrap_or(EvolutionMethod::Recursion);
    let mut files = Vec::new();
    for init in &config.initials {
        let series = negativity_series(&init.spec, &coin, config.steps, config.k_points(), method, &FftTransform)?;
        let rows: Vec<_> = series.into_iter().map(|(t, value)| SeriesRow { t, value }).collect();
        let path = config.output_file("negativity", init);
        format::write_series(&path, config.format, &rows)?;
        files.push(path);
    }
    Ok(files)
}

/// Writes `entropy` rows (t, S) for t = 0..=steps.
pub fn run_entropy_series(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let coin = coin(config)?;
    let mut files = Vec::new();
    for init in &config.initials {
        let rows: Vec<_> = entropy_series(&init.spec, &coin, config.steps)?
            .into_iter()
            .map(|(t, value)| SeriesRow { t, value })
            .collect();
        let path = config.output_file("entropy", init);
        format::write_series(&path, config.format, &rows)?;
        files.push(path);
    }
    Ok(files)
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_deviation < self.tolerance
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    fn push(&mut self, name: String, max_deviation: f64, tolerance: f64) {
        self.checks.push(Check { name, max_deviation, tolerance });
    }

    pub fn into_result(self) -> Result<VerifyReport> {
        if self.passed() {
            return Ok(self);
        }
        let failed: Vec<_> = self.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {:<44} max deviation {:.3e} (tolerance {:.0e})", c.name, c.max_deviation, c.tolerance)?;
        }
        Ok(())
    }
}

/// Test hooks for [`run_verify`].
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyHooks {
    /// Perturbs the phase-space field before it is evolved, which must make
    /// the recursion check fail.
    pub corrupt_field: bool,
}

/// Cross-checks the two evolution routes, the marginal identities, the
/// conservation of `P(k)` and the FFT transform at the configured size.
pub fn run_verify(config: &ExperimentConfig, hooks: VerifyHooks) -> Result<VerifyReport> {
    let coin = coin(config)?;
    let k = k_grid(config)?;
    let mut report = VerifyReport::default();
    for init in &config.initials {
        let prefix = if config.sweep { format!("[{}] ", init.label) } else { String::new() };
        verify_one(init, config.steps, &coin, &k, hooks, &prefix, &mut report)?;
    }
    Ok(report)
}

fn verify_one(
    init: &LabelledInitial,
    steps: u64,
    coin: &CoinOperator,
    k: &KGrid,
    hooks: VerifyHooks,
    prefix: &str,
    report: &mut VerifyReport,
) -> Result<()> {
    let mut state = initial_state(&init.spec, steps)?;
    let grid = field_grid_for(&state, *k);
    let mut ev = FieldEvolver::new(wigner_from_state(&state, &grid)?);
    if hooks.corrupt_field {
        let n = ev.field().support().map_or(0, |s| s.0);
        ev.field_mut().row_mut(n).expect("support row")[0].rr += 1e-6;
    }
    let p0: Vec<f64> = momentum_amplitudes(&state, k)
        .iter()
        .map(|(_, [a, b])| a.norm_sqr() + b.norm_sqr())
        .collect();

    let (mut recursion, mut parity, mut even, mut odd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut momentum, mut drift, mut norm) = (0.0f64, 0.0f64, 0.0f64);
    let parity_ok = k.count().is_multiple_of(2);
    let norm_ok = NegativityAccumulator::new(k).is_ok();
    let mut direct = ev.field().clone();
    for t in 0..=steps {
        if t > 0 {
            state = qwigner_core::step(&state, coin);
            ev.advance(coin);
            direct = wigner_from_state(&state, &grid)?;
            recursion = recursion.max(ev.field().max_abs_diff(&direct)?);
        }
        if parity_ok {
            parity = parity.max(direct.parity_defect()?);
        }
        if norm_ok {
            norm = norm.max((direct.half_range_normalization()? - 1.0).abs());
        }
        let (e, o) = marginal_deviation(&direct, &state)?;
        even = even.max(e);
        odd = odd.max(o);
        let amps = momentum_amplitudes(&state, k);
        for ((_, m), (_, [a, b])) in momentum_matrix(&direct).iter().zip(&amps) {
            let outer = HermitianMatrix2::new(2.0 * a.norm_sqr(), 2.0 * b.norm_sqr(), a * b.conj() * 2.0);
            momentum = momentum.max(m.max_abs_diff(&outer));
        }
        for ((_, m), p) in momentum_matrix(&direct).iter().zip(&p0) {
            drift = drift.max((0.5 * m.trace() - p).abs());
        }
    }
    let fast = FftTransform.transform(&state, &grid)?;
    report.push(format!("{prefix}recursion vs transform of evolved state"), recursion, 1e-10);
    if parity_ok {
        report.push(format!("{prefix}parity W(n,k+pi) = (-1)^n W(n,k)"), parity, 1e-10);
    }
    if norm_ok {
        report.push(format!("{prefix}normalization over [-pi/2, pi/2)"), norm, 1e-9);
    }
    report.push(format!("{prefix}even-row marginal vs site density"), even, 1e-9);
    report.push(format!("{prefix}odd-row marginal"), odd, 1e-9);
    report.push(format!("{prefix}momentum matrix vs amplitudes"), momentum, 1e-9);
    report.push(format!("{prefix}P(k) drift"), drift, 1e-9);
    report.push(format!("{prefix}fft vs direct transform"), fast.max_abs_diff(&direct)?, 1e-10);
    Ok(())
}

/// Largest deviation of the even-row marginals from `2ψ(m)ψ(m)†` and of
/// the odd-row marginals from zero.
pub fn marginal_deviation(field: &WignerField, state: &WalkState) -> Result<(f64, f64)> {
    let (mut even, mut odd) = (0.0f64, 0.0f64);
    for (n, m) in position_marginal(field)? {
        if n.rem_euclid(2) == 0 {
            let (a, b) = state.amplitude(n / 2);
            let block = HermitianMatrix2::new(2.0 * a.norm_sqr(), 2.0 * b.norm_sqr(), a * b.conj() * 2.0);
            even = even.max(m.max_abs_diff(&block));
        } else {
            odd = odd.max(m.max_abs());
        }
    }
    Ok((even, odd))
}
