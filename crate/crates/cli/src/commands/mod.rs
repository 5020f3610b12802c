mod analysis;
mod evolve;
mod gp;
mod lax;
mod rank1;

use hierlab::{HierarchyTable, Kappa};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::OutputDir;
use crate::plot::{line_chart, Series};

pub use analysis::{dump_tables, gradcheck, invariants, involution};
pub use evolve::evolve;
pub use gp::gp_check;
pub use lax::lax;
pub use rank1::rank1;

pub struct Context {
    pub cfg: RunConfig,
    pub out: OutputDir,
    pub plot: bool,
}

impl Context {
    pub fn table(&self, n_max: usize) -> CliResult<HierarchyTable> {
        Ok(HierarchyTable::build(n_max, self.cfg.kappa)?)
    }

    pub fn kappa(&self) -> Kappa {
        self.cfg.kappa
    }

    /// Seed for the `index`-th independent draw of a command.
    pub fn seed(&self, index: u64) -> u64 {
        self.cfg.seed.wrapping_mul(1_000_003).wrapping_add(index)
    }

    /// Writes an SVG chart when plotting is enabled; failures only warn.
    pub fn plot(&self, name: &str, title: &str, x: &str, y: &str, series: &[Series], log_y: bool) {
        if !self.plot {
            return;
        }
        let svg = line_chart(title, x, y, series, log_y);
        if let Err(e) = self.out.write_bytes(name, svg.as_bytes()) {
            eprintln!("warning: plot {name} not written: {e}");
        }
    }
}
