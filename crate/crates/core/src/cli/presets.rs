//! Built-in experiment definitions.

use crate::channel::RadioConfig;
use crate::geometry::{DeploymentKind, SiteConfig};
use crate::montecarlo::{AlarmSpec, SweepAxis, TrafficKind};
use crate::receiver::CombinerKind;

use super::config::{AlarmValidation, Experiment, ExperimentFile, OutageSweep, SweepSpec};
use super::CliError;

pub const PRESET_NAMES: &[&str] = &["fig5", "fig6", "fig7", "fig4-validation"];

const DEFAULT_SEED: u64 = 20_230_501;

fn sweep(name: &str, description: &str, l: f64, m: usize, k: usize, axis: SweepAxis, values: &[f64]) -> ExperimentFile {
    ExperimentFile {
        name: name.into(),
        description: Some(description.into()),
        output_dir: None,
        master_seed: DEFAULT_SEED,
        site: SiteConfig::factory_hall(l),
        radio: RadioConfig::indoor_factory(),
        experiment: Experiment::OutageSweep(OutageSweep {
            total_antennas: m,
            antennas_per_ap: 4,
            active_devices: k,
            alarm: AlarmSpec::default(),
            combiner: CombinerKind::Mmse,
            network_realizations: 100,
            fading_realizations: 1000,
            sweep: SweepSpec { axis, values: values.to_vec() },
            deployments: DeploymentKind::ALL.to_vec(),
            traffic: TrafficKind::ALL.to_vec(),
        }),
    }
}

pub fn preset(name: &str) -> Result<ExperimentFile, CliError> {
    Ok(match name {
        "fig5" => sweep(
            "fig5",
            "Outage vs active devices, M=64, l=250 m",
            250.0,
            64,
            16,
            SweepAxis::ActiveDevices,
            &[16.0, 32.0, 48.0, 64.0],
        ),
        "fig6" => sweep(
            "fig6",
            "Outage vs total antennas, K=16, l=250 m, S=4",
            250.0,
            64,
            16,
            SweepAxis::TotalAntennas,
            &[16.0, 32.0, 48.0, 64.0, 80.0, 96.0],
        ),
        "fig7" => sweep(
            "fig7",
            "Outage vs hall side length, M=64, K=16",
            250.0,
            64,
            16,
            SweepAxis::SideLength,
            &[250.0, 500.0, 750.0, 1000.0],
        ),
        "fig4-validation" => ExperimentFile {
            name: "fig4-validation".into(),
            description: Some("Alarm sampler vs truncated Gaussian marginals, l=250 m".into()),
            output_dir: None,
            master_seed: DEFAULT_SEED,
            site: SiteConfig::factory_hall(250.0),
            radio: RadioConfig::indoor_factory(),
            experiment: Experiment::AlarmValidation(AlarmValidation {
                alarm: AlarmSpec { epicenter_fraction: [0.25, 0.5], intensity_m: 25.0 },
                devices_per_realization: 1000,
                network_realizations: 1000,
                bins: 50,
            }),
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown preset '{other}', expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}
