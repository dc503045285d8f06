//! Scenario-driven front end: JSON configs, run orchestration, persistence
//! of traces, reports, and plot data.
//!
//! A scenario names a catalog example (or defines one inline), picks the
//! lattice size, flow parameters, group kind, and output paths, and fixes a
//! seed for the initial metric. `run_scenario` executes
//! build -> verify -> verdict -> flow -> reconcile -> certificates and
//! writes three artifacts: a CSV trace, a JSON report (validating against
//! schema/report.schema.json), and a two-column plot-data file (t dev_sup).
//! Reruns with identical config and seed are byte-identical.

use crate::bundle::{catalog_lookup, seeded_positive_metric, ExampleSpec, MetricField};
use crate::error::{Error, Result};
use crate::flow::{run_flow_observed, Classification, FlowConfig, FlowStatus, FlowTrace};
use crate::gauge::{hym_constant_for, mean_curvature};
use crate::lie::{
    principal_ahym_certificate, reduction_residual, traceless_part, GroupFamily,
    ReductiveGroupData,
};
use crate::numerics::CMat;
use crate::stability::{reconcile, verdict, SubbundleDescriptor, VerdictClass};
use crate::surface::LatticeSurface;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub surface: SurfaceCfg,
    pub example: ExampleRef,
    #[serde(default)]
    pub flow: FlowCfg,
    #[serde(default)]
    pub group: Option<GroupCfg>,
    /// Center coefficient tau for the principal certificate; defaults to the
    /// HYM constant for GL and to 0 for SL.
    #[serde(default)]
    pub tau: Option<f64>,
    pub outputs: OutputsCfg,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceCfg {
    pub n: usize,
    pub l: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ExampleRef {
    Named(String),
    Inline(InlineExample),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineExample {
    pub name: String,
    pub rank: usize,
    pub flux: Vec<i64>,
    /// Constant Higgs matrix as rows of [re, im] entries.
    pub higgs: Vec<Vec<[f64; 2]>>,
    pub expected_verdict: VerdictClassCfg,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictClassCfg {
    Stable,
    StrictlySemistable,
    Polystable,
    Unstable,
}

impl From<VerdictClassCfg> for VerdictClass {
    fn from(v: VerdictClassCfg) -> Self {
        match v {
            VerdictClassCfg::Stable => VerdictClass::Stable,
            VerdictClassCfg::StrictlySemistable => VerdictClass::StrictlySemistable,
            VerdictClassCfg::Polystable => VerdictClass::Polystable,
            VerdictClassCfg::Unstable => VerdictClass::Unstable,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowCfg {
    pub dt_init: f64,
    pub dt_max: f64,
    pub t_max: f64,
    pub max_steps: usize,
    pub deviation_target: f64,
    pub eig_floor: f64,
    pub monotonicity_slack: f64,
    pub quad_points: usize,
    pub classify_budget: f64,
    pub classify_floor: f64,
    /// Amplitude of the seeded initial-metric perturbation (seed 0 starts
    /// from the identity metric regardless).
    pub seed_amplitude: f64,
}

impl Default for FlowCfg {
    fn default() -> Self {
        let d = FlowConfig::<f64>::default();
        FlowCfg {
            dt_init: d.dt_init,
            dt_max: d.dt_max,
            t_max: d.t_max,
            max_steps: d.max_steps,
            deviation_target: d.deviation_target,
            eig_floor: d.eig_floor,
            monotonicity_slack: d.monotonicity_slack,
            quad_points: d.quad_points,
            classify_budget: d.classify_budget,
            classify_floor: d.classify_floor,
            seed_amplitude: 0.25,
        }
    }
}

impl FlowCfg {
    pub fn to_flow_config(&self) -> FlowConfig<f64> {
        FlowConfig {
            dt_init: self.dt_init,
            dt_max: self.dt_max,
            t_max: self.t_max,
            max_steps: self.max_steps,
            deviation_target: self.deviation_target,
            eig_floor: self.eig_floor,
            monotonicity_slack: self.monotonicity_slack,
            quad_points: self.quad_points,
            classify_budget: self.classify_budget,
            classify_floor: self.classify_floor,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupCfg {
    pub family: GroupFamily,
    pub m: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsCfg {
    pub trace_path: PathBuf,
    pub report_path: PathBuf,
    pub plotdata_path: PathBuf,
}

/// CLI-level adjustments that do not live in the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub verbose: bool,
    pub max_steps: Option<usize>,
    /// Rebase output files into this directory (used by tests and suites).
    pub output_dir: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Report structures (serialized to the JSON report; see schema/).
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlopeDto {
    pub num: i64,
    pub den: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictDto {
    pub class: VerdictClass,
    pub slope_ambient: SlopeDto,
    pub slope_witness: Option<SlopeDto>,
    pub destabilizer: Option<SubbundleDescriptor>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowSummary {
    pub status: FlowStatus,
    pub steps: usize,
    pub t_final: f64,
    pub l_final: f64,
    pub dev_sup_initial: f64,
    pub dev_sup_final: f64,
    pub dev_l2_final: f64,
    pub min_eig_final: f64,
    pub degree: f64,
    pub degree_drift_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconciliationDto {
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualsDto {
    pub samples: Vec<(f64, f64)>,
    pub max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateDto {
    pub group: String,
    pub tau_coefficient: f64,
    pub holds: bool,
    pub norm: f64,
    pub xi: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: serde_json::Value,
    pub example: String,
    pub verdict: VerdictDto,
    pub flow: FlowSummary,
    pub classification: Classification,
    pub reconciliation: ReconciliationDto,
    pub reduction_residuals: ResidualsDto,
    pub certificate: CertificateDto,
}

pub struct RunOutcome {
    pub pass: bool,
    pub report: Report,
    pub trace: FlowTrace<f64>,
}

fn slope_dto(s: crate::stability::Slope) -> SlopeDto {
    SlopeDto { num: *s.numer(), den: *s.denom() }
}

fn resolve_example(cfg: &ScenarioConfig) -> Result<ExampleSpec<f64>> {
    match &cfg.example {
        ExampleRef::Named(name) => catalog_lookup::<f64>(name),
        ExampleRef::Inline(inline) => {
            if inline.higgs.len() != inline.rank
                || inline.higgs.iter().any(|row| row.len() != inline.rank)
            {
                return Err(Error::Validation(
                    "inline example: higgs matrix must be rank x rank".into(),
                ));
            }
            let rows: Vec<Vec<(f64, f64)>> = inline
                .higgs
                .iter()
                .map(|row| row.iter().map(|e| (e[0], e[1])).collect())
                .collect();
            Ok(ExampleSpec {
                name: inline.name.clone(),
                rank: inline.rank,
                flux: inline.flux.clone(),
                higgs: CMat::from_rows_f64(&rows),
                expected_verdict: inline.expected_verdict.into(),
                expected_destabilizer: None,
            })
        }
    }
}

fn rebased(path: &Path, dir: &Option<PathBuf>) -> PathBuf {
    match dir {
        Some(d) => {
            let name = path.file_name().unwrap_or_else(|| path.as_os_str());
            d.join(name)
        }
        None => path.to_path_buf(),
    }
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Evenly thinned snapshot store: keeps at most `cap` metrics by doubling
/// the keep-stride whenever the buffer would overflow.
struct SnapshotStore {
    cap: usize,
    stride: usize,
    items: Vec<(f64, MetricField<f64>)>,
}

impl SnapshotStore {
    fn new(cap: usize) -> Self {
        SnapshotStore { cap, stride: 1, items: Vec::new() }
    }

    fn offer(&mut self, step: usize, t: f64, h: &MetricField<f64>) {
        if step % self.stride != 0 {
            return;
        }
        self.items.push((t, h.clone()));
        if self.items.len() > self.cap {
            let mut kept = Vec::with_capacity(self.cap / 2 + 1);
            for (i, item) in self.items.drain(..).enumerate() {
                if i % 2 == 0 {
                    kept.push(item);
                }
            }
            self.items = kept;
            self.stride *= 2;
        }
    }
}

/// Execute one scenario config file. Returns the outcome; the caller maps
/// pass/fail onto process exit codes.
pub fn run_scenario(config_path: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let raw = std::fs::read_to_string(config_path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg: ScenarioConfig = serde_json::from_str(&raw)
        .map_err(|e| Error::Validation(format!("{}: {e}", config_path.display())))?;
    let echo: serde_json::Value = serde_json::from_str(&raw)?;
    run_parsed_scenario(&cfg, echo, overrides)
}

pub fn run_parsed_scenario(
    cfg: &ScenarioConfig,
    scenario_echo: serde_json::Value,
    overrides: &Overrides,
) -> Result<RunOutcome> {
    let surface = LatticeSurface::<f64>::new(cfg.surface.n, cfg.surface.l)?;
    let example = resolve_example(cfg)?;
    let (bundle, phi) = example.build(surface)?;

    let mut flow_config = cfg.flow.to_flow_config();
    if let Some(ms) = overrides.max_steps {
        flow_config.max_steps = ms;
    }
    flow_config.validate()?;

    let group_cfg = cfg.group.clone().unwrap_or(GroupCfg {
        family: GroupFamily::Gl,
        m: example.rank,
    });
    if group_cfg.m != example.rank {
        return Err(Error::Validation(format!(
            "group rank m = {} does not match example rank {}",
            group_cfg.m, example.rank
        )));
    }
    let group = ReductiveGroupData::<f64>::new(group_cfg.family, group_cfg.m)?;

    let h0 = seeded_positive_metric(&surface, example.rank, cfg.seed, cfg.flow.seed_amplitude)?;
    let k = h0.clone();

    if overrides.verbose {
        println!(
            "scenario '{}': N = {}, L = {}, seed = {}, xi = {:e}",
            example.name, cfg.surface.n, cfg.surface.l, cfg.seed, flow_config.deviation_target
        );
    }

    // Flow with snapshots for the reduction-residual samples.
    let mut store = SnapshotStore::new(48);
    let mut last_h = h0.clone();
    let verbose = overrides.verbose;
    let mut trace = run_flow_observed(&bundle, &phi, &h0, &k, &flow_config, |step, t, h| {
        store.offer(step, t, h);
        last_h = h.clone();
        if verbose && step % 200 == 0 && step > 0 {
            println!("  step {step}: t = {t:.5}");
        }
    })?;
    trace.label = example.name.clone();

    let rec = reconcile(&example, &trace, &flow_config)?;
    let v = verdict(&example)?;
    let classification = crate::flow::classify(&trace, &flow_config)?;

    // Reduction residual along the sampled metrics (at most 20 reported).
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let step_cap = 20usize.min(store.items.len().max(1));
    let take_every = (store.items.len().max(1) + step_cap - 1) / step_cap;
    let mut max_residual = 0.0_f64;
    for (i, (t, h)) in store.items.iter().enumerate() {
        if i % take_every != 0 {
            continue;
        }
        let r = reduction_residual(&bundle, h, &phi, &group)?;
        max_residual = max_residual.max(r);
        samples.push((*t, r));
    }

    // Certificate on the final metric.
    let h_final = last_h;
    let c = hym_constant_for(&bundle);
    let k_field = mean_curvature(&bundle, &h_final, &phi)?;
    let (cert_field, tau_mat, tau_coeff) = match group.family {
        GroupFamily::Sl => {
            if let Some(t) = cfg.tau {
                if t != 0.0 {
                    return Err(Error::Validation(
                        "tau must vanish for SL: the center of the Lie algebra is trivial".into(),
                    ));
                }
            }
            (k_field.map(traceless_part), CMat::<f64>::zeros(example.rank), 0.0)
        }
        GroupFamily::Gl => {
            let t = cfg.tau.unwrap_or(c);
            (k_field.clone(), CMat::identity(example.rank).scale_re(t), t)
        }
    };
    let cert =
        principal_ahym_certificate(&group, &cert_field, &tau_mat, flow_config.deviation_target)?;

    let first = trace.rows.first().expect("trace has rows");
    let last = trace.rows.last().expect("trace has rows");
    let degree = crate::gauge::degree(&bundle, &h_final)?;
    let drift_max = trace
        .rows
        .iter()
        .map(|r| r.degree_drift)
        .fold(0.0_f64, f64::max);

    let report = Report {
        schema_version: 1,
        scenario: scenario_echo,
        example: example.name.clone(),
        verdict: VerdictDto {
            class: v.class,
            slope_ambient: slope_dto(v.slope_ambient),
            slope_witness: v.slope_witness.map(slope_dto),
            destabilizer: v.destabilizer.clone(),
        },
        flow: FlowSummary {
            status: trace.status,
            steps: trace.rows.len() - 1,
            t_final: last.t,
            l_final: last.l_value,
            dev_sup_initial: first.dev_sup,
            dev_sup_final: last.dev_sup,
            dev_l2_final: last.dev_l2,
            min_eig_final: last.min_eig_h,
            degree,
            degree_drift_max: drift_max,
        },
        classification,
        reconciliation: ReconciliationDto { pass: rec.pass, detail: rec.detail.clone() },
        reduction_residuals: ResidualsDto { samples, max: max_residual },
        certificate: CertificateDto {
            group: format!(
                "{}({})",
                match group.family {
                    GroupFamily::Gl => "GL",
                    GroupFamily::Sl => "SL",
                },
                group.m
            ),
            tau_coefficient: tau_coeff,
            holds: cert.holds,
            norm: cert.norm,
            xi: cert.xi,
            margin: cert.margin,
        },
    };

    // Persist the three artifacts.
    let trace_path = rebased(&cfg.outputs.trace_path, &overrides.output_dir);
    let report_path = rebased(&cfg.outputs.report_path, &overrides.output_dir);
    let plot_path = rebased(&cfg.outputs.plotdata_path, &overrides.output_dir);
    write_output(&trace_path, &trace.to_csv())?;
    let mut plot = String::new();
    for row in &trace.rows {
        plot.push_str(&format!("{:.16e} {:.16e}\n", row.t, row.dev_sup));
    }
    write_output(&plot_path, &plot)?;
    let report_json = serde_json::to_string_pretty(&report)? + "\n";
    write_output(&report_path, &report_json)?;

    if overrides.verbose {
        println!(
            "  {}: status {:?}, classification {:?}, reconcile {}",
            example.name,
            trace.status,
            classification,
            if rec.pass { "PASS" } else { "FAIL" }
        );
    }

    Ok(RunOutcome { pass: rec.pass, report, trace })
}

#[derive(Clone, Debug)]
pub enum SuiteRow {
    Pass(String),
    Fail(String),
    Error(String, String),
}

pub struct SuiteSummary {
    pub rows: Vec<SuiteRow>,
}

impl SuiteSummary {
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(|r| matches!(r, SuiteRow::Error(..))) {
            1
        } else if self.rows.iter().any(|r| matches!(r, SuiteRow::Fail(_))) {
            2
        } else {
            0
        }
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            match row {
                SuiteRow::Pass(name) => out.push_str(&format!("PASS  {name}\n")),
                SuiteRow::Fail(name) => out.push_str(&format!("FAIL  {name}\n")),
                SuiteRow::Error(name, msg) => out.push_str(&format!("ERROR {name}: {msg}\n")),
            }
        }
        out
    }
}

/// Run every scenario (*.json) in a directory; failures and errors in one
/// scenario do not stop the others.
pub fn run_suite(dir: &Path, overrides: &Overrides) -> Result<SuiteSummary> {
    let mut configs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    configs.sort();
    if configs.is_empty() {
        return Err(Error::Validation(format!(
            "no scenario configs (*.json) found in {}",
            dir.display()
        )));
    }
    let mut rows = Vec::new();
    for config in configs {
        let name = config
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| config.display().to_string());
        match run_scenario(&config, overrides) {
            Ok(outcome) if outcome.pass => rows.push(SuiteRow::Pass(name)),
            Ok(_) => rows.push(SuiteRow::Fail(name)),
            Err(e) => rows.push(SuiteRow::Error(name, e.to_string())),
        }
    }
    Ok(SuiteSummary { rows })
}
