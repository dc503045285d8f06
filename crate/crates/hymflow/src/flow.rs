//! Donaldson functional and heat flow.
//!
//! The flow evolves the metric by the exponential update
//!
//!   h_{t+dt} = h_t exp(-dt (K_t - c Id)),
//!
//! which preserves hermiticity exactly and positivity for every dt (the
//! update is h^{1/2} exp(-dt Xi) h^{1/2} with Hermitian Xi). The step
//! controller halves dt when a step is rejected (eigenvalue floor or a
//! functional increase beyond the monotonicity slack) and grows dt by 1.2x
//! after ten consecutive accepted steps, capped at dt_max.
//!
//! The functional is evaluated two ways that agree to quadrature accuracy:
//! `donaldson_functional` integrates tr(eta (K_s - c Id)) along the
//! exponential path h_s = k exp(s eta) on Gauss-Legendre nodes, and
//! `gauge::functional_value` reads the exact lattice potential difference.
//! Trace rows record the exact potential, so monotonicity is checked
//! against a machine-precision Lyapunov value.

use crate::bundle::{BackgroundBundle, HiggsField, MetricField};
use crate::error::{Error, Result};
use crate::gauge::{analyze, functional_value, hym_constant_for};
use crate::numerics::{gauss_legendre_01, hermitian_eig, pos_inv_sqrt, pos_log, pos_pow,
    pos_sqrt, r, CMat, Real};
use crate::surface::MatrixField;
use serde::Serialize;

/// Flow parameters. All tolerances are pinned here; the scenario layer maps
/// config files onto this struct.
#[derive(Clone, Debug)]
pub struct FlowConfig<S: Real> {
    pub dt_init: S,
    pub dt_max: S,
    pub t_max: S,
    pub max_steps: usize,
    /// Deviation target xi: the flow stops once dev_sup <= xi.
    pub deviation_target: S,
    pub eig_floor: S,
    /// Relative slack for the monotonicity check: accepted steps may not
    /// increase L by more than slack * (1 + |L|).
    pub monotonicity_slack: S,
    /// Quadrature nodes for the functional (Gauss-Legendre).
    pub quad_points: usize,
    /// classify(): a run is diverging once L has dropped by more than
    /// budget * (1 + |L_0|) while dev_sup stayed above the floor.
    pub classify_budget: S,
    pub classify_floor: S,
}

impl<S: Real> Default for FlowConfig<S> {
    fn default() -> Self {
        FlowConfig {
            dt_init: r(1e-4),
            dt_max: r(5e-2),
            t_max: r(3.0),
            max_steps: 10_000,
            deviation_target: r(1e-4),
            eig_floor: r(1e-10),
            monotonicity_slack: r(1e-10),
            quad_points: 33,
            classify_budget: r(10.0),
            classify_floor: r(1e-2),
        }
    }
}

impl<S: Real> FlowConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > S::zero()) || self.dt_init > self.dt_max {
            return Err(Error::Validation("flow requires 0 < dt_init <= dt_max".into()));
        }
        if self.max_steps < 1 {
            return Err(Error::Validation("flow requires max_steps >= 1".into()));
        }
        if !(self.deviation_target > S::zero()) {
            return Err(Error::Validation("deviation target xi must be positive".into()));
        }
        if !(self.t_max > S::zero()) {
            return Err(Error::Validation("t_max must be positive".into()));
        }
        if self.quad_points < 2 {
            return Err(Error::Validation("quadrature needs at least 2 nodes".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    ReachedTarget,
    /// Also reported when the step budget is exhausted before t_max.
    ReachedTMax,
    StepFailure,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow<S: Real> {
    pub t: S,
    pub l_value: S,
    pub dev_sup: S,
    pub dev_l2: S,
    pub min_eig_h: S,
    pub degree_drift: S,
    pub dt_used: S,
}

#[derive(Clone, Debug)]
pub struct FlowTrace<S: Real> {
    /// Example or scenario name; checked by reconcile().
    pub label: String,
    pub rows: Vec<TraceRow<S>>,
    pub status: FlowStatus,
    /// Deviation target the run used (echoed for classify()).
    pub deviation_target: S,
    pub failure_note: Option<String>,
}

impl<S: Real> FlowTrace<S> {
    /// CSV export: header plus one row per step, full double precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,L,dev_sup,dev_l2,min_eig,deg_drift,dt\n");
        for row in &self.rows {
            let f = |x: S| format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN));
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                f(row.t),
                f(row.l_value),
                f(row.dev_sup),
                f(row.dev_l2),
                f(row.min_eig_h),
                f(row.degree_drift),
                f(row.dt_used)
            ));
        }
        out
    }

    pub fn final_row(&self) -> Option<&TraceRow<S>> {
        self.rows.last()
    }

    pub fn min_dev_sup(&self) -> S {
        self.rows
            .iter()
            .map(|r| r.dev_sup)
            .fold(S::infinity(), |a, b| a.min(b))
    }
}

/// Donaldson functional L(h, k) evaluated along the exponential path
/// h_s = k exp(s eta), eta = log(k^-1 h), as the Gauss-Legendre quadrature
/// of integral_0^1 integrate(tr(eta (K_{h_s} - c Id))) ds.
pub fn donaldson_functional<S: Real>(
    bundle: &BackgroundBundle<S>,
    phi: &HiggsField<S>,
    h: &MetricField<S>,
    k: &MetricField<S>,
    c: S,
    quad_points: usize,
) -> Result<S> {
    if quad_points < 2 {
        return Err(Error::Validation("quadrature needs at least 2 nodes".into()));
    }
    let surface = &bundle.surface;
    let sites = surface.site_count();
    let rank = bundle.rank();
    if h.site_count() != sites || k.site_count() != sites || h.rank() != rank || k.rank() != rank {
        return Err(Error::Dimension("metric shape mismatch".into()));
    }
    let a2 = surface.spacing() * surface.spacing();

    // Per-site: k^{1/2}, and the eigensystem of Sigma = k^{-1/2} h k^{-1/2}.
    struct PathSite<S: Real> {
        ksq: CMat<S>,
        sigma: crate::numerics::HermEig<S>,
        eta: CMat<S>,
    }
    let mut path: Vec<PathSite<S>> = Vec::with_capacity(sites);
    for idx in 0..sites {
        let ke = hermitian_eig(k.at(idx))?;
        if ke.min_eig() <= S::zero() {
            return Err(Error::Conditioning("reference metric not positive".into()));
        }
        let ksq = pos_sqrt(&ke);
        let kisq = pos_inv_sqrt(&ke);
        let sigma_mat = (&(&kisq * h.at(idx)) * &kisq).hermitize();
        let sigma = hermitian_eig(&sigma_mat)?;
        if sigma.min_eig() <= S::zero() {
            return Err(Error::Conditioning(
                "k^-1 h does not have positive spectrum".into(),
            ));
        }
        // eta = log(k^-1 h) = k^{-1/2} log(Sigma) k^{1/2}.
        let eta = &(&kisq * &pos_log(&sigma)) * &ksq;
        path.push(PathSite { ksq, sigma, eta });
    }

    let (nodes, weights) = gauss_legendre_01::<S>(quad_points);
    let mut total = S::zero();
    for (s_node, w) in nodes.iter().zip(weights.iter()) {
        let field = MatrixField::from_fn(sites, rank, |idx| {
            let p = &path[idx];
            let pw = pos_pow(&p.sigma, *s_node);
            &(&p.ksq * &pw) * &p.ksq
        });
        let hs = MetricField::new(field, k.eig_floor.min(h.eig_floor))?;
        let analysis = analyze(bundle, &hs, phi)?;
        let mut integrand = S::zero();
        for idx in 0..sites {
            let kmat = analysis.mean_curvature.at(idx);
            let eta = &path[idx].eta;
            let mut tr = (eta * kmat).trace().re;
            tr = tr - c * eta.trace().re;
            integrand = integrand + tr;
        }
        total = total + *w * integrand * a2;
    }
    Ok(total)
}

/// One exponential flow step (standalone operation).
pub fn flow_step<S: Real>(
    bundle: &BackgroundBundle<S>,
    phi: &HiggsField<S>,
    h: &MetricField<S>,
    c: S,
    dt: S,
) -> Result<MetricField<S>> {
    if !(dt > S::zero()) {
        return Err(Error::Validation("flow step needs dt > 0".into()));
    }
    let analysis = analyze(bundle, h, phi)?;
    analysis.step(h, c, dt)
}

/// Adaptive Donaldson heat flow. The observer is invoked on the initial
/// metric and after every accepted step with (accepted_steps, t, h).
pub fn run_flow_observed<S: Real>(
    bundle: &BackgroundBundle<S>,
    phi: &HiggsField<S>,
    h0: &MetricField<S>,
    k: &MetricField<S>,
    config: &FlowConfig<S>,
    mut observer: impl FnMut(usize, S, &MetricField<S>),
) -> Result<FlowTrace<S>> {
    config.validate()?;
    let surface = &bundle.surface;
    let c = hym_constant_for(bundle);
    let k_analysis = analyze(bundle, k, phi)?;
    let deg0 = crate::gauge::degree(bundle, h0)?;

    let mut h = h0.clone();
    let mut analysis = analyze(bundle, &h, phi)?;
    let mut l = functional_value(surface, &analysis, &k_analysis, c);
    let (dev_sup, dev_l2) = analysis.deviation(c);

    let mut dt = config.dt_init;
    let mut rows = vec![TraceRow {
        t: S::zero(),
        l_value: l,
        dev_sup,
        dev_l2,
        min_eig_h: analysis.min_eig(),
        degree_drift: S::zero(),
        dt_used: dt,
    }];
    observer(0, S::zero(), &h);
    if dev_sup <= config.deviation_target {
        return Ok(FlowTrace {
            label: String::new(),
            rows,
            status: FlowStatus::ReachedTarget,
            deviation_target: config.deviation_target,
            failure_note: None,
        });
    }

    let mut t = S::zero();
    let mut accepted = 0usize;
    let mut streak = 0usize;
    let dt_min = r::<S>(1e-12);
    let status;
    'outer: loop {
        if t >= config.t_max || accepted >= config.max_steps {
            status = FlowStatus::ReachedTMax;
            break;
        }
        // Do not step past t_max.
        let step_dt = dt.min(config.t_max - t);
        let trial = analysis.step(&h, c, step_dt);
        let (h_new, analysis_new, l_new) = match trial {
            Ok(h_new) => {
                if h_new.min_eigenvalue < config.eig_floor {
                    // Positivity floor: reject.
                    (None, None, S::zero())
                } else {
                    let an = analyze(bundle, &h_new, phi)?;
                    let ln = functional_value(surface, &an, &k_analysis, c);
                    if ln > l + config.monotonicity_slack * (S::one() + l.abs()) {
                        (None, None, S::zero())
                    } else {
                        (Some(h_new), Some(an), ln)
                    }
                }
            }
            Err(Error::Conditioning(_)) => (None, None, S::zero()),
            Err(e) => return Err(e),
        };
        match (h_new, analysis_new) {
            (Some(h_acc), Some(an)) => {
                t = t + step_dt;
                h = h_acc;
                analysis = an;
                l = l_new;
                accepted += 1;
                streak += 1;
                let (dev_sup, dev_l2) = analysis.deviation(c);
                let deg = crate::gauge::degree(bundle, &h)?;
                rows.push(TraceRow {
                    t,
                    l_value: l,
                    dev_sup,
                    dev_l2,
                    min_eig_h: analysis.min_eig(),
                    degree_drift: (deg - deg0).abs(),
                    dt_used: step_dt,
                });
                observer(accepted, t, &h);
                if dev_sup <= config.deviation_target {
                    status = FlowStatus::ReachedTarget;
                    break 'outer;
                }
                if streak >= 10 {
                    dt = (dt * r(1.2)).min(config.dt_max);
                    streak = 0;
                }
            }
            _ => {
                dt = dt * r(0.5);
                streak = 0;
                if dt < dt_min {
                    return Ok(FlowTrace {
                        label: String::new(),
                        rows,
                        status: FlowStatus::StepFailure,
                        deviation_target: config.deviation_target,
                        failure_note: Some(format!(
                            "step size collapsed below {:e} at t = {:e} (accepted {accepted})",
                            dt_min.to_f64().unwrap_or(f64::NAN),
                            t.to_f64().unwrap_or(f64::NAN)
                        )),
                    });
                }
            }
        }
    }
    Ok(FlowTrace {
        label: String::new(),
        rows,
        status,
        deviation_target: config.deviation_target,
        failure_note: None,
    })
}

pub fn run_flow<S: Real>(
    bundle: &BackgroundBundle<S>,
    phi: &HiggsField<S>,
    h0: &MetricField<S>,
    k: &MetricField<S>,
    config: &FlowConfig<S>,
) -> Result<FlowTrace<S>> {
    run_flow_observed(bundle, phi, h0, k, config, |_, _, _| {})
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GradientCheck<S: Real> {
    /// -(L2 deviation norm)^2: the analytic derivative of L along the flow.
    pub analytic: S,
    /// Finite-difference slope (L(h_plus, k) - L(h, k)) / dt_fd.
    pub numeric: S,
    pub rel_err: S,
}

/// Compare the analytic gradient identity dL/dt = -||K - c||_{L2}^2 against
/// a finite difference of the quadrature functional along one flow step.
pub fn gradient_check<S: Real>(
    bundle: &BackgroundBundle<S>,
    phi: &HiggsField<S>,
    h: &MetricField<S>,
    k: &MetricField<S>,
    c: S,
    dt_fd: S,
) -> Result<GradientCheck<S>> {
    let analysis = analyze(bundle, h, phi)?;
    let (_, dev_l2) = analysis.deviation(c);
    let analytic = -(dev_l2 * dev_l2);
    let h_plus = analysis.step(h, c, dt_fd)?;
    let quad = 33;
    let l0 = donaldson_functional(bundle, phi, h, k, c, quad)?;
    let l1 = donaldson_functional(bundle, phi, &h_plus, k, c, quad)?;
    let numeric = (l1 - l0) / dt_fd;
    let rel_err = (analytic - numeric).abs() / (analytic.abs() + r(1e-15));
    Ok(GradientCheck { analytic, numeric, rel_err })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ApproxHymReached,
    BoundedBelowPlateau,
    Diverging,
}

/// Outcome classification of a finished trace. Thresholds are heuristics
/// from the config and are reported alongside the raw data.
pub fn classify<S: Real>(trace: &FlowTrace<S>, config: &FlowConfig<S>) -> Result<Classification> {
    if trace.rows.is_empty() {
        return Err(Error::Validation("cannot classify an empty trace".into()));
    }
    let reached = trace.status == FlowStatus::ReachedTarget
        || trace.rows.iter().any(|r| r.dev_sup <= trace.deviation_target);
    if reached {
        return Ok(Classification::ApproxHymReached);
    }
    let first = trace.rows.first().unwrap();
    let last = trace.rows.last().unwrap();
    let drop = first.l_value - last.l_value;
    if drop > config.classify_budget * (S::one() + first.l_value.abs())
        && trace.min_dev_sup() >= config.classify_floor
    {
        return Ok(Classification::Diverging);
    }
    Ok(Classification::BoundedBelowPlateau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{build_background, catalog, seeded_positive_metric, HiggsField};
    use crate::gauge::{deviation_norm_sup, hym_constant, mean_curvature};
    use crate::numerics::SplitMix64;
    use crate::surface::LatticeSurface;
    use std::f64::consts::PI;

    fn surf(n: usize) -> LatticeSurface<f64> {
        LatticeSurface::new(n, 1.0).unwrap()
    }

    #[test]
    fn functional_zero_for_equal_metrics() {
        let s = surf(6);
        let b = build_background(s, 2, &[0, 0]).unwrap();
        let phi = HiggsField::zero(&b);
        let h = seeded_positive_metric(&s, 2, 3, 0.3).unwrap();
        let v = donaldson_functional(&b, &phi, &h, &h, 0.0, 5).unwrap();
        assert!(v.abs() < 1e-13);
    }

    #[test]
    fn functional_zero_for_flat_line_rescaling() {
        // rank 1, flux 0, k = 1, h = e^lambda constant, c = 0: K vanishes
        // along the whole path, so L = 0.
        let s = surf(8);
        let b = build_background(s, 1, &[0]).unwrap();
        let phi = HiggsField::zero(&b);
        let k = MetricField::identity(&s, 1);
        let h = MetricField::new(
            crate::surface::MatrixField::constant(64, CMat::identity(1).scale_re(1.7_f64.exp())),
            1e-10,
        )
        .unwrap();
        let v = donaldson_functional(&b, &phi, &h, &k, 0.0, 9).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
    }

    #[test]
    fn functional_antisymmetric_and_path_independent() {
        let s = surf(6);
        let e = catalog::<f64>().into_iter().find(|e| e.name == "nilpotent").unwrap();
        let (b, phi) = e.build(s).unwrap();
        let c = 0.0;
        let h = seeded_positive_metric(&s, 2, 41, 0.25).unwrap();
        let k = seeded_positive_metric(&s, 2, 42, 0.25).unwrap();
        let lhk = donaldson_functional(&b, &phi, &h, &k, c, 33).unwrap();
        let lkh = donaldson_functional(&b, &phi, &k, &h, c, 33).unwrap();
        assert!(
            (lhk + lkh).abs() <= 1e-9 * (1.0 + lhk.abs()),
            "antisymmetry defect {}",
            lhk + lkh
        );

        // Two-segment path through a random midpoint.
        let mid = seeded_positive_metric(&s, 2, 43, 0.25).unwrap();
        let via = donaldson_functional(&b, &phi, &mid, &k, c, 33).unwrap()
            + donaldson_functional(&b, &phi, &h, &mid, c, 33).unwrap();
        assert!(
            (via - lhk).abs() <= 1e-6 * (1.0 + lhk.abs()),
            "path dependence {} vs {}",
            via,
            lhk
        );

        // Quadrature agrees with the exact potential difference.
        let ah = analyze(&b, &h, &phi).unwrap();
        let ak = analyze(&b, &k, &phi).unwrap();
        let exact = functional_value(&s, &ah, &ak, c);
        assert!((lhk - exact).abs() <= 1e-9 * (1.0 + exact.abs()), "{lhk} vs {exact}");
    }

    #[test]
    fn flow_step_fixed_point_and_scalar_closed_form() {
        let s = surf(8);
        // Fixed point: flux d with matched c.
        let b = build_background(s, 1, &[2]).unwrap();
        let phi = HiggsField::zero(&b);
        let h = MetricField::identity(&s, 1);
        let c = hym_constant(2.0, s.volume(), 1);
        let h2 = flow_step(&b, &phi, &h, c, 0.05).unwrap();
        for idx in 0..s.site_count() {
            assert!((h2.at(idx) - h.at(idx)).fro_norm() < 1e-13);
        }
        // Mismatched c: constant rescaling by exp(-dt (2 pi d / V - c)).
        let c_off = c - 1.0;
        let dt = 0.02;
        let h3 = flow_step(&b, &phi, &h, c_off, dt).unwrap();
        let expect = (-dt * 1.0_f64).exp();
        for idx in [0usize, 17, 63] {
            assert!((h3.at(idx)[(0, 0)].re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn flow_step_preserves_hermiticity() {
        let s = surf(6);
        let e = catalog::<f64>().into_iter().find(|e| e.name == "diag-polystable").unwrap();
        let (b, phi) = e.build(s).unwrap();
        let mut rng = SplitMix64::new(4);
        for seed in [9u64, 10, 11] {
            let h = seeded_positive_metric(&s, 2, seed, 0.35).unwrap();
            let dt = 0.01 * (1.0 + rng.next_sym::<f64>()).abs() + 1e-4;
            let h2 = flow_step(&b, &phi, &h, 0.0, dt).unwrap();
            assert!(h2.hermiticity_defect() <= 1e-12);
            assert!(h2.min_eigenvalue > 0.0);
        }
    }

    #[test]
    fn flat_line_flow_terminates_immediately() {
        let s = surf(8);
        let b = build_background(s, 1, &[0]).unwrap();
        let phi = HiggsField::zero(&b);
        let h = MetricField::identity(&s, 1);
        let cfg = FlowConfig::default();
        let trace = run_flow(&b, &phi, &h, &h, &cfg).unwrap();
        assert_eq!(trace.status, FlowStatus::ReachedTarget);
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.rows[0].dev_sup, 0.0);
        let cls = classify(&trace, &cfg).unwrap();
        assert_eq!(cls, Classification::ApproxHymReached);
    }

    #[test]
    fn nilpotent_flow_decays_to_target() {
        let s = surf(8);
        let e = catalog::<f64>().into_iter().find(|e| e.name == "nilpotent").unwrap();
        let (b, phi) = e.build(s).unwrap();
        let h0 = MetricField::identity(&s, 2);
        // Initial deviation is 2 sqrt(2) e^{2u}|_{u=0}.
        let k0 = mean_curvature(&b, &h0, &phi).unwrap();
        let dev0 = deviation_norm_sup(&s, &k0, 0.0, &h0).unwrap();
        assert!((dev0 - 2.0 * 2.0_f64.sqrt()).abs() < 1e-12);
        let mut cfg = FlowConfig::<f64>::default();
        cfg.deviation_target = 0.1 * dev0;
        let trace = run_flow(&b, &phi, &h0, &h0, &cfg).unwrap();
        assert_eq!(trace.status, FlowStatus::ReachedTarget, "{:?}", trace.final_row());
        // Monotone L and conserved degree along the way.
        for w in trace.rows.windows(2) {
            assert!(w[1].l_value <= w[0].l_value + 1e-10 * (1.0 + w[0].l_value.abs()));
            assert!(w[1].t > w[0].t);
            assert!(w[1].dt_used > 0.0);
        }
        assert!(trace.rows.iter().all(|r| r.degree_drift <= 1e-6));
    }

    #[test]
    fn split_unstable_flow_keeps_deviation_floor() {
        let s = surf(8);
        let e = catalog::<f64>().into_iter().find(|e| e.name == "split-unstable").unwrap();
        let (b, phi) = e.build(s).unwrap();
        let h0 = MetricField::identity(&s, 2);
        let mut cfg = FlowConfig::<f64>::default();
        cfg.deviation_target = 1.0;
        cfg.t_max = 1.0;
        let trace = run_flow(&b, &phi, &h0, &h0, &cfg).unwrap();
        assert_eq!(trace.status, FlowStatus::ReachedTMax);
        let floor = 2.0 * PI * 2.0_f64.sqrt() / s.volume();
        assert!(trace.min_dev_sup() >= 0.5 * floor);
        assert!(trace.final_row().unwrap().dev_sup >= 2.0 * PI);
        let cls = classify(&trace, &cfg).unwrap();
        assert_eq!(cls, Classification::Diverging);
    }

    #[test]
    fn gradient_check_examples() {
        let s = surf(8);
        // At a fixed point both sides vanish.
        let b = build_background(s, 1, &[1]).unwrap();
        let phi = HiggsField::zero(&b);
        let h = MetricField::identity(&s, 1);
        let c = hym_constant(1.0, s.volume(), 1);
        let gc = gradient_check(&b, &phi, &h, &h, c, 1e-5).unwrap();
        assert!(gc.analytic.abs() < 1e-10, "{gc:?}");
        assert!(gc.numeric.abs() < 1e-10, "{gc:?}");

        // Catalog examples at the identity metric.
        for name in ["nilpotent", "split-unstable"] {
            let e = catalog::<f64>().into_iter().find(|e| e.name == name).unwrap();
            let (b, phi) = e.build(s).unwrap();
            let h = MetricField::identity(&s, 2);
            let k = seeded_positive_metric(&s, 2, 19, 0.2).unwrap();
            let gc = gradient_check(&b, &phi, &h, &k, 0.0, 1e-5).unwrap();
            assert!(gc.rel_err <= 1e-3, "{name}: {gc:?}");
        }
    }

    #[test]
    fn determinism_bitwise() {
        let s = surf(6);
        let e = catalog::<f64>().into_iter().find(|e| e.name == "nilpotent").unwrap();
        let (b, phi) = e.build(s).unwrap();
        let h0 = seeded_positive_metric(&s, 2, 8, 0.2).unwrap();
        let mut cfg = FlowConfig::<f64>::default();
        cfg.t_max = 0.05;
        let t1 = run_flow(&b, &phi, &h0, &h0, &cfg).unwrap();
        let t2 = run_flow(&b, &phi, &h0, &h0, &cfg).unwrap();
        assert_eq!(t1.to_csv(), t2.to_csv());
    }

    #[test]
    fn classify_rejects_empty_trace() {
        let cfg = FlowConfig::<f64>::default();
        let trace = FlowTrace::<f64> {
            label: String::new(),
            rows: vec![],
            status: FlowStatus::ReachedTMax,
            deviation_target: 1e-4,
            failure_note: None,
        };
        assert!(classify(&trace, &cfg).is_err());
    }
}
