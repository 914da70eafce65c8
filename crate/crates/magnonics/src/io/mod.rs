//! File formats and configuration: the self-describing text sweep container,
//! the JSON report bundle with plot-data emission, and the TOML config.

mod config;
mod report;
mod sweep_file;

pub use config::{
    load_config, AxesConfig, BackgroundConfig, CampaignConfig, CavityConfig, Config,
    DispersionConfig, RippleConfig, SimulateConfig, TlsLawConfig,
};
pub use report::{emit_plot_data, load_report, save_report, write_summary};
pub use sweep_file::{load_sweep, save_sweep};
