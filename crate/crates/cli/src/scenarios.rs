//! Scenario execution: turns a resolved config into tables and metrics.

use avcausal::causal::{ci_disparity_sweep, SweepPoint};
use avcausal::fitting::{
    c_from_gains, fit_c_plane, fit_logit_curve, fit_mu_to_oracle, mu_from_pcommon, oracle_params_for, r_squared,
    readout_likelihoods, FitResult, MuLattice,
};
use avcausal::pooling::relatedness_index;
use avcausal::protocols::{aftereffect_time_course, fusion_tracking, repetition_effects, RecalibrationSetup};
use avcausal::readout::profile_peak_and_width;
use avcausal::{ci_single, Network, NetworkParams, StimulusEvent};
use serde_json::json;

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::error::{CliError, Context};
use crate::output::{round6, RunOutput, Table};

pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    match cfg.scenario {
        ScenarioKind::Profiles => profiles(cfg, &mut out)?,
        ScenarioKind::FusionTracking => fusion(cfg, &mut out)?,
        ScenarioKind::Relatedness => relatedness(cfg, &mut out)?,
        ScenarioKind::Reconstruction => reconstruction(cfg, &mut out)?,
        ScenarioKind::CausalFit => causal_fit(cfg, &mut out)?,
        ScenarioKind::MuLaw => mu_law(cfg, &mut out)?,
        ScenarioKind::GainPlane => gain_plane(cfg, &mut out)?,
        ScenarioKind::TimeCourse => time_course(cfg, &mut out)?,
        ScenarioKind::Repetition => repetition(cfg, &mut out)?,
    }
    Ok(out)
}

fn network(cfg: &ScenarioConfig, params: NetworkParams) -> Result<Network, CliError> {
    Network::standard(params).context(|| format!("{}: building network", cfg.name))
}

fn profiles(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let net = network(cfg, cfg.network)?;
    let ctx = || format!("{}: unisensory passes", cfg.name);
    let a = net.forward(&StimulusEvent::auditory_only(cfg.stimulus.s_a)).context(ctx)?;
    let v = net.forward(&StimulusEvent::visual_only(cfg.stimulus.s_v)).context(ctx)?;
    let sa = profile_peak_and_width(&a.pooling.r_a, net.grid()).context(ctx)?;
    let sv = profile_peak_and_width(&v.pooling.r_v, net.grid()).context(ctx)?;
    let max_a = a.pooling.r_a.fold(f64::MIN, |m, &x| m.max(x));
    let max_v = v.pooling.r_v.fold(f64::MIN, |m, &x| m.max(x));
    let gauss = |x: f64, mean: f64, sd: f64| (-(x - mean).powi(2) / (2.0 * sd * sd)).exp();

    let mut t = Table::new("profiles", &["x", "series", "value"]);
    for (i, &x) in net.grid().centers().iter().enumerate() {
        let series: [(&str, f64); 7] = [
            ("input_left", a.input.theta_l[i]),
            ("input_right", a.input.theta_r[i]),
            ("input_visual", v.input.theta_v[i]),
            ("pooling_auditory", a.pooling.r_a[i] / max_a),
            ("gaussian_auditory", gauss(x, sa.xhat, sa.sd)),
            ("pooling_visual", v.pooling.r_v[i] / max_v),
            ("gaussian_visual", gauss(x, sv.xhat, sv.sd)),
        ];
        for (name, value) in series {
            t.push(vec![x.into(), name.into(), value.into()]);
        }
    }
    out.tables.push(t);
    out.metric("xhat_a", round6(sa.xhat));
    out.metric("sd_a", round6(sa.sd));
    out.metric("fit_rmse_a", round6(sa.fit_rmse));
    out.metric("xhat_v", round6(sv.xhat));
    out.metric("sd_v", round6(sv.sd));
    out.metric("fit_rmse_v", round6(sv.fit_rmse));
    Ok(())
}

fn fusion(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let locs = cfg.stimulus.sweep();
    let mut t = Table::new("fusion", &["series", "s_v", "disparity", "multisensory_peak", "fused"]);
    for var in &cfg.variants {
        let params = NetworkParams {
            m: var.m,
            sigma: var.sigma,
            v: var.v,
            ..cfg.network
        };
        let net = network(cfg, params)?;
        let ctx = || format!("{}: variant {}", cfg.name, var.label);
        let (a, v) = readout_likelihoods(&net).context(ctx)?;
        let pts = fusion_tracking(&net, cfg.stimulus.s_a, &locs).context(ctx)?;
        let mut worst = 0.0f64;
        for p in &pts {
            worst = worst.max((p.multisensory_peak - p.fused).abs());
            t.push(vec![
                var.label.as_str().into(),
                p.s_v.into(),
                (p.s_v - p.s_a).into(),
                p.multisensory_peak.into(),
                p.fused.into(),
            ]);
        }
        out.metric(
            var.label.clone(),
            json!({"sd_a": round6(a.sd), "sd_v": round6(v.sd), "max_abs_error": round6(worst)}),
        );
    }
    out.tables.push(t);
    Ok(())
}

fn relatedness(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let locs = cfg.stimulus.sweep();
    let mut t = Table::new(
        "relatedness",
        &["series", "disparity", "p_multisensory", "p_auditory", "post_c1", "post_c2"],
    );
    for cond in &cfg.conditions {
        let net = network(cfg, cfg.network.with_mu(cond.mu))?;
        let ctx = || format!("{}: condition mu={} p={}", cfg.name, cond.mu, cond.p_common);
        let ci = oracle_params_for(&net, cond.p_common).context(ctx)?.with_rule(cfg.oracle.rule);
        let label = format!("mu={}_p={}", cond.mu, cond.p_common);
        let (mut pm_all, mut post_all) = (Vec::new(), Vec::new());
        for &s_v in &locs {
            let event = StimulusEvent::audiovisual(cfg.stimulus.s_a, s_v);
            let input = net
                .input::<rand_chacha::ChaCha8Rng>(&event, &net.fresh_adaptation(), None)
                .context(ctx)?;
            let pooled = net.pool(&input).context(ctx)?;
            let (p_m, p_a) = relatedness_index(&pooled);
            let post = ci_single(cfg.stimulus.s_a, s_v, &ci).context(ctx)?.post_c1;
            pm_all.push(p_m);
            post_all.push(post);
            t.push(vec![
                label.as_str().into(),
                (s_v - cfg.stimulus.s_a).into(),
                p_m.into(),
                p_a.into(),
                post.into(),
                (1.0 - post).into(),
            ]);
        }
        out.metric(label, json!({"correlation": round6(correlation(&pm_all, &post_all))}));
    }
    out.tables.push(t);
    Ok(())
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn reconstruction(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let net = network(cfg, cfg.network)?;
    let event = StimulusEvent::audiovisual(cfg.stimulus.s_a, cfg.stimulus.s_v);
    let res = net.forward(&event).context(|| format!("{}: forward pass", cfg.name))?;
    let r = &res.reconstruction;
    let mut t = Table::new("reconstruction", &["x", "rho_left", "rho_right", "rho_visual", "rho_lr_product"]);
    for (i, &x) in net.grid().centers().iter().enumerate() {
        t.push(vec![
            x.into(),
            r.rho_l[i].into(),
            r.rho_r[i].into(),
            r.rho_v[i].into(),
            (r.rho_l[i] * r.rho_r[i]).into(),
        ]);
    }
    let (a, v) = (res.shat_a.unwrap_or(f64::NAN), res.shat_v.unwrap_or(f64::NAN));
    let mut d = Table::new("decoded", &["s_a", "s_v", "mu", "shat_a", "shat_v"]);
    d.push(vec![cfg.stimulus.s_a.into(), cfg.stimulus.s_v.into(), cfg.network.mu.into(), a.into(), v.into()]);
    out.tables.extend([t, d]);
    out.metric("shat_a", a);
    out.metric("shat_v", v);
    Ok(())
}

/// Oracle sweep and μ fit for one gain set and prior.
struct Fitted {
    fit: FitResult,
    oracle: Vec<SweepPoint>,
    sd_a: f64,
    sd_v: f64,
}

fn fit_condition(cfg: &ScenarioConfig, params: NetworkParams, p: f64) -> Result<Fitted, CliError> {
    let net = network(cfg, params)?;
    let ctx = || format!("{}: fit at g_A={} g_V={} p_common={p}", cfg.name, params.g_a, params.g_v);
    let ci = oracle_params_for(&net, p).context(ctx)?.with_rule(cfg.oracle.rule);
    let locs = cfg.stimulus.sweep();
    let oracle = ci_disparity_sweep(cfg.stimulus.s_a, &locs, &ci, cfg.oracle.n_samples, cfg.oracle.seed).context(ctx)?;
    let lattice = MuLattice::around(c_from_gains(params.g_a, params.g_v), cfg.fit.half_width, cfg.fit.step);
    let fit = fit_mu_to_oracle(&net, &oracle, lattice, p).context(ctx)?;
    Ok(Fitted {
        fit,
        oracle,
        sd_a: ci.sigma_a,
        sd_v: ci.sigma_v,
    })
}

fn flag_negative(out: &mut RunOutput, mu: f64, what: String) {
    if mu < 0.0 {
        out.warnings.push(format!("{what}: best-fit mu {mu:.2} is negative, outside the explored regime"));
    }
}

fn causal_fit(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<(), CliError> {
    for &p in &cfg.oracle.p_common {
        let f = fit_condition(cfg, cfg.network, p)?;
        let mut t = Table::new(format!("fit_p{p}"), &["disparity", "net_A", "net_V", "oracle_A", "oracle_V"]);
        for (o, d) in f.oracle.iter().zip(&f.fit.decodes) {
            t.push(vec![o.disparity.into(), d.0.into(), d.1.into(), o.mean_a.into(), o.mean_v.into()]);
        }
        out.tables.push(t);
        flag_negative(out, f.fit.mu, format!("p_common={p}"));
        out.metric(
            format!("p{p}"),
            json!({
                "mu": round6(f.fit.mu),
                "rmse_a": round6(f.fit.rmse_a),
                "rmse_v": round6(f.fit.rmse_v),
                "sd_a": round6(f.sd_a),
                "sd_v": round6(f.sd_v),
            }),
        );
    }
    Ok(())
}

fn mu_law(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let mut fits_t = Table::new("mu_law", &["g_a", "g_v", "p_common", "mu", "rmse_a", "rmse_v"]);
    let mut logit_t = Table::new("logit_fits", &["g_a", "g_v", "c", "rmse"]);
    let mut agree_t = Table::new(
        "agreement",
        &["g_a", "g_v", "p_common", "disparity", "modality", "oracle", "network"],
    );
    let (mut obs, mut pred, mut rmses) = (Vec::new(), Vec::new(), Vec::new());
    let mut sets = Vec::new();
    for &[g_a, g_v] in &cfg.gains.ladder {
        let params = cfg.network.with_gains(g_a, g_v);
        let mut pts = Vec::new();
        for &p in &cfg.oracle.p_common {
            let f = fit_condition(cfg, params, p)?;
            fits_t.push(vec![g_a.into(), g_v.into(), p.into(), f.fit.mu.into(), f.fit.rmse_a.into(), f.fit.rmse_v.into()]);
            for (o, d) in f.oracle.iter().zip(&f.fit.decodes) {
                for (modality, ov, nv) in [("A", o.mean_a, d.0), ("V", o.mean_v, d.1)] {
                    agree_t.push(vec![g_a.into(), g_v.into(), p.into(), o.disparity.into(), modality.into(), ov.into(), nv.into()]);
                    obs.push(ov);
                    pred.push(nv);
                }
            }
            flag_negative(out, f.fit.mu, format!("g_A={g_a} g_V={g_v} p_common={p}"));
            pts.push((p, f.fit.mu));
        }
        let (c, rmse) = fit_logit_curve(&pts).context(|| format!("{}: logit fit", cfg.name))?;
        logit_t.push(vec![g_a.into(), g_v.into(), c.into(), rmse.into()]);
        rmses.push(rmse);
        sets.push(json!({"g_a": g_a, "g_v": g_v, "c": round6(c), "logit_rmse": round6(rmse)}));
    }
    out.metric("gain_sets", sets);
    out.metric("mean_logit_rmse", round6(rmses.iter().sum::<f64>() / rmses.len() as f64));
    out.metric("aggregate_r2", round6(r_squared(&obs, &pred)));
    out.tables.extend([fits_t, logit_t, agree_t]);
    Ok(())
}

fn gain_plane(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let p = cfg.oracle.p_common.first().copied().unwrap_or(0.5);
    let mut t = Table::new("c_grid", &["g_a", "g_v", "c", "rmse_a", "rmse_v", "c_law"]);
    let mut samples = Vec::new();
    for &g_a in &cfg.gains.grid_a {
        for &g_v in &cfg.gains.grid_v {
            let f = fit_condition(cfg, cfg.network.with_gains(g_a, g_v), p)?;
            // the fitted μ at the given prior, shifted back to p = 0.5
            let c = f.fit.mu - mu_from_pcommon(p, 0.0).context(|| format!("{}: prior", cfg.name))?;
            flag_negative(out, c, format!("g_A={g_a} g_V={g_v}"));
            t.push(vec![g_a.into(), g_v.into(), c.into(), f.fit.rmse_a.into(), f.fit.rmse_v.into(), c_from_gains(g_a, g_v).into()]);
            samples.push((g_a, g_v, c));
        }
    }
    let plane = fit_c_plane(&samples).context(|| format!("{}: plane fit", cfg.name))?;
    out.metric("coef_a", round6(plane.coef_a));
    out.metric("coef_v", round6(plane.coef_v));
    out.metric("intercept", round6(plane.intercept));
    out.metric("r2", round6(plane.r2));
    out.tables.push(t);
    Ok(())
}

fn setup(cfg: &ScenarioConfig) -> RecalibrationSetup {
    let r = &cfg.recalibration;
    RecalibrationSetup {
        eta: r.eta,
        tau: r.tau,
        s_a: r.s_a,
        s_v: r.s_v,
        reps: r.reps,
    }
}

fn time_course(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let net = network(cfg, cfg.network)?;
    let s = setup(cfg);
    let ctx = || format!("{}: recalibration schedule", cfg.name);
    let tc = aftereffect_time_course(&net, &s, &cfg.recalibration.delays, &[s.s_a]).context(ctx)?;
    let mut t = Table::new("time_course", &["row", "phase", "delay", "probe_at", "shat_a"]);
    let mut model = Vec::new();
    for (k, &a) in tc.online.iter().enumerate() {
        t.push(vec![(k + 1).into(), "train".into(), "".into(), s.s_a.into(), a.into()]);
        model.push((format!("train{}", k + 1), a));
    }
    for (k, p) in tc.probes.iter().enumerate() {
        t.push(vec![(tc.online.len() + k + 1).into(), "probe".into(), p.delay.into(), p.probe_at.into(), p.shat_a.into()]);
        model.push((format!("delay{}", p.delay), p.shat_a));
    }
    let gen = aftereffect_time_course(&net, &s, &[1], &cfg.recalibration.generalization).context(ctx)?;
    let mut g = Table::new("generalization", &["probe_at", "shat_a", "shift"]);
    for p in &gen.probes {
        g.push(vec![p.probe_at.into(), p.shat_a.into(), p.shift.into()]);
    }
    let shifts: Vec<f64> = tc.probes.iter().map(|p| p.shift).collect();
    out.metric("online_shat_a", tc.online.clone());
    out.metric("online_mean", round6(tc.online.iter().sum::<f64>() / tc.online.len() as f64));
    out.metric("aftereffect_by_delay", shifts.clone());
    out.metric("aftereffect_strictly_decreasing", shifts.windows(2).all(|w| w[0] > w[1]));
    out.metric("generalization_shift", gen.probes.iter().map(|p| p.shift).collect::<Vec<_>>());
    if let Some(path) = &cfg.recalibration.fixture {
        let rmse = fixture_rmse(path, &model)?;
        out.metric("fixture_rmse", round6(rmse));
    }
    out.tables.extend([t, g]);
    Ok(())
}

/// RMS difference between model values and reference rows with matching
/// labels.
fn fixture_rmse(path: &str, model: &[(String, f64)]) -> Result<f64, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Config(format!("recalibration.fixture: {e}")))?;
    let (mut sse, mut n) = (0.0, 0);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Config(format!("recalibration.fixture: {e}")))?;
        let (label, value) = (rec.get(0).unwrap_or(""), rec.get(1).unwrap_or(""));
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("recalibration.fixture: bad value for {label}")))?;
        if let Some((_, m)) = model.iter().find(|(l, _)| l == label.trim()) {
            sse += (m - value).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        return Err(CliError::Config("recalibration.fixture: no rows match model labels".into()));
    }
    Ok((sse / n as f64).sqrt())
}

fn repetition(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let net = network(cfg, cfg.network)?;
    let delay = cfg.recalibration.delays.first().copied().unwrap_or(1);
    let eff = repetition_effects(&net, &setup(cfg), &cfg.recalibration.repetitions, delay)
        .context(|| format!("{}: repetition schedules", cfg.name))?;
    let mut t = Table::new("repetition", &["reps", "ventriloquism", "aftereffect"]);
    for e in &eff {
        t.push(vec![e.reps.into(), e.ventriloquism.into(), e.aftereffect.into()]);
    }
    out.metric("ventriloquism", eff.iter().map(|e| e.ventriloquism).collect::<Vec<_>>());
    out.metric("aftereffect", eff.iter().map(|e| e.aftereffect).collect::<Vec<_>>());
    out.tables.push(t);
    Ok(())
}
