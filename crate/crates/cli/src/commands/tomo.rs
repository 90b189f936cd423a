//! `tomo`: sixteen-projection state reconstruction and fixture evaluation.

use super::{write_json, CmdResult};
use crate::config::ScenarioConfig;
use crate::{EXIT_CONFIG, EXIT_TOMO_INPUT};
use anyhow::{anyhow, Context};
use biphoton_core::io::DensityMatrixFile;
use biphoton_core::optics::{AnalyzerChain, PbsPort};
use biphoton_core::quantum::{
    bell_state, chsh_canonical, chsh_max, fidelity, BellKind, DensityMatrix, PairState,
};
use biphoton_core::tomography::{
    bootstrap_uncertainty, mle_reconstruct, reference_density_matrix, simulate_counts, MleConfig,
    ProjectionSet, ProjectionSetting, TomographyCounts,
};
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct Diagnostics {
    hermiticity_residual: f64,
    trace_residual: f64,
    min_eigenvalue: f64,
    purity: f64,
    physical: bool,
}

#[derive(Serialize)]
struct BootstrapOut {
    resamples: usize,
    fidelity_prob_ci: [f64; 3],
    chsh_s_ci: [f64; 3],
}

#[derive(Serialize)]
struct TomoReport {
    source: String,
    target: String,
    fidelity_prob: f64,
    fidelity_sqrt: f64,
    s_horodecki: f64,
    s_canonical: f64,
    /// True when the matrix was projected to the physical cone for the
    /// CHSH analysis.
    s_projected: bool,
    purity: f64,
    diagnostics: Diagnostics,
    converged: Option<bool>,
    iterations: Option<usize>,
    intensity: Option<f64>,
    bootstrap: Option<BootstrapOut>,
}

fn parse_bell(name: &str) -> anyhow::Result<BellKind> {
    name.parse::<BellKind>().map_err(|e| anyhow!(e))
}

fn parse_counts_csv(path: &Path) -> anyhow::Result<(ProjectionSet<f64>, TomographyCounts<f64>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading counts {}", path.display()))?;
    let mut settings = Vec::new();
    let mut counts = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("setting_id")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
        if fields.len() != 6 {
            anyhow::bail!(
                "line {}: expected setting_id,qwp_s,hwp_s,qwp_as,hwp_as,counts",
                lineno + 1
            );
        }
        let angles: Vec<f64> = fields[1..5]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("line {}: angle fields", lineno + 1))?;
        let n: f64 = fields[5]
            .parse()
            .with_context(|| format!("line {}: counts field", lineno + 1))?;
        if n < 0.0 {
            anyhow::bail!("line {}: counts must be non-negative", lineno + 1);
        }
        settings.push(ProjectionSetting {
            label: fields[0].to_string(),
            stokes: AnalyzerChain::qwp_hwp(
                angles[0].to_radians(),
                angles[1].to_radians(),
                PbsPort::Transmit,
            ),
            anti_stokes: AnalyzerChain::qwp_hwp(
                angles[2].to_radians(),
                angles[3].to_radians(),
                PbsPort::Transmit,
            ),
        });
        counts.push(n);
    }
    let set = ProjectionSet::new(settings).map_err(anyhow::Error::new)?;
    Ok((set, TomographyCounts::new(counts)))
}

struct Analysis {
    rho: DensityMatrix<f64>,
    source: String,
    converged: Option<bool>,
    iterations: Option<usize>,
    intensity: Option<f64>,
    bootstrap: Option<BootstrapOut>,
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    config: Option<&Path>,
    counts: Option<&Path>,
    fixture: Option<&str>,
    target: Option<&str>,
    bootstrap: Option<usize>,
    out_dir: &Path,
    seed: Option<u64>,
) -> CmdResult {
    let mut target_kind = target
        .map(parse_bell)
        .transpose()
        .map_err(|e| (EXIT_CONFIG, e))?;

    let analysis = if let Some(name) = fixture {
        let kind = parse_bell(name).map_err(|e| (EXIT_CONFIG, e))?;
        target_kind.get_or_insert(kind);
        let (rho, _) = reference_density_matrix(kind);
        Analysis {
            rho,
            source: format!("fixture:{}", kind.name()),
            converged: None,
            iterations: None,
            intensity: None,
            bootstrap: None,
        }
    } else if let Some(path) = counts {
        let (set, tomo_counts) = parse_counts_csv(path).map_err(|e| (EXIT_TOMO_INPUT, e))?;
        let config = MleConfig {
            seed: seed.unwrap_or(0),
            ..MleConfig::default()
        };
        let rec = mle_reconstruct(&tomo_counts, &set, &config)
            .map_err(|e| (EXIT_TOMO_INPUT, anyhow::Error::new(e)))?;
        let kind = *target_kind.get_or_insert(BellKind::PsiPlus);
        let resamples = bootstrap.unwrap_or(250);
        let boot = if resamples > 0 {
            let b = bootstrap_uncertainty(
                &rec,
                &tomo_counts,
                &set,
                &config,
                &bell_state(kind),
                resamples,
                config.seed.wrapping_add(1),
            )
            .map_err(|e| (1, anyhow::Error::new(e)))?;
            Some(BootstrapOut {
                resamples: b.resamples,
                fidelity_prob_ci: [b.fidelity_prob.0, b.fidelity_prob.1, b.fidelity_prob.2],
                chsh_s_ci: [b.chsh_s.0, b.chsh_s.1, b.chsh_s.2],
            })
        } else {
            None
        };
        Analysis {
            rho: rec.rho,
            source: format!("counts:{}", path.display()),
            converged: Some(rec.converged),
            iterations: Some(rec.iterations),
            intensity: Some(rec.intensity),
            bootstrap: boot,
        }
    } else if let Some(path) = config {
        let cfg = ScenarioConfig::load(path).map_err(|e| (EXIT_CONFIG, e))?;
        let tomo_cfg = cfg
            .tomography
            .as_ref()
            .ok_or_else(|| (EXIT_CONFIG, anyhow!("config has no [tomography] section")))?;
        if tomo_cfg.intensity <= 0.0 {
            return Err((
                EXIT_CONFIG,
                anyhow!("tomography.intensity must be positive"),
            ));
        }
        if let Some(t) = &tomo_cfg.target {
            target_kind.get_or_insert(parse_bell(t).map_err(|e| (EXIT_CONFIG, e))?);
        }
        let rho = match cfg.pair_state().map_err(|e| (EXIT_CONFIG, e))? {
            PairState::Pure(s) => DensityMatrix::from_pure(&s),
            PairState::Mixed(r) => r,
        };
        let set = ProjectionSet::standard();
        let background = vec![tomo_cfg.background_per_setting; set.len()];
        let run_seed = seed.unwrap_or(cfg.seed);
        let tomo_counts = simulate_counts(&rho, &set, tomo_cfg.intensity, &background, run_seed);
        let mle = MleConfig {
            seed: run_seed,
            ..MleConfig::default()
        };
        let rec = mle_reconstruct(&tomo_counts, &set, &mle)
            .map_err(|e| (EXIT_TOMO_INPUT, anyhow::Error::new(e)))?;
        let kind = *target_kind.get_or_insert(BellKind::PsiPlus);
        let resamples = bootstrap.unwrap_or(tomo_cfg.bootstrap_resamples);
        let boot = if resamples > 0 {
            let b = bootstrap_uncertainty(
                &rec,
                &tomo_counts,
                &set,
                &mle,
                &bell_state(kind),
                resamples,
                run_seed.wrapping_add(1),
            )
            .map_err(|e| (1, anyhow::Error::new(e)))?;
            Some(BootstrapOut {
                resamples: b.resamples,
                fidelity_prob_ci: [b.fidelity_prob.0, b.fidelity_prob.1, b.fidelity_prob.2],
                chsh_s_ci: [b.chsh_s.0, b.chsh_s.1, b.chsh_s.2],
            })
        } else {
            None
        };
        Analysis {
            rho: rec.rho,
            source: format!("config:{}", path.display()),
            converged: Some(rec.converged),
            iterations: Some(rec.iterations),
            intensity: Some(rec.intensity),
            bootstrap: boot,
        }
    } else {
        return Err((
            EXIT_CONFIG,
            anyhow!("one of --config, --counts, or --fixture is required"),
        ));
    };

    let kind = target_kind.unwrap_or(BellKind::PsiPlus);
    let target_state = bell_state::<f64>(kind);
    let fid = fidelity(&analysis.rho, &target_state)
        .map_err(|e| (EXIT_TOMO_INPUT, anyhow::Error::new(e)))?;
    let chsh = chsh_max(&analysis.rho).map_err(|e| (EXIT_TOMO_INPUT, anyhow::Error::new(e)))?;
    let s_canonical =
        chsh_canonical(&analysis.rho).map_err(|e| (EXIT_TOMO_INPUT, anyhow::Error::new(e)))?;
    let d = analysis.rho.diagnostics();

    let report = TomoReport {
        source: analysis.source,
        target: kind.name().to_string(),
        fidelity_prob: fid.f_prob,
        fidelity_sqrt: fid.f_sqrt,
        s_horodecki: chsh.s,
        s_canonical,
        s_projected: chsh.projected,
        purity: d.purity,
        diagnostics: Diagnostics {
            hermiticity_residual: d.hermiticity_residual,
            trace_residual: d.trace_residual,
            min_eigenvalue: d.min_eigenvalue,
            purity: d.purity,
            physical: d.is_physical(),
        },
        converged: analysis.converged,
        iterations: analysis.iterations,
        intensity: analysis.intensity,
        bootstrap: analysis.bootstrap,
    };

    let file = DensityMatrixFile::from_matrix(analysis.rho.matrix());
    super::write_text(
        out_dir,
        "density_matrix.json",
        &format!("{}\n", file.to_json()),
    )
    .map_err(|e| (1, e))?;
    let path = write_json(out_dir, "tomo_report.json", &report).map_err(|e| (1, e))?;
    println!(
        "wrote {}: fidelity {:.4} (target {}), S = {:.3}",
        path.display(),
        report.fidelity_prob,
        report.target,
        report.s_horodecki
    );
    Ok(())
}
