//! Output plumbing: stdout-or-file sink and the JSON document shapes the
//! binary emits.

use std::fs::File;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use qfrob_core::jsonio::SolutionJson;
use qfrob_core::verify::GrowthClass;

pub enum Sink {
    Stdout(io::Stdout),
    File(File),
}

impl Sink {
    pub fn new(path: Option<&str>) -> io::Result<Self> {
        Ok(match path {
            Some(p) => Sink::File(File::create(p)?),
            None => Sink::Stdout(io::stdout()),
        })
    }

    pub fn json<S: Serialize>(&mut self, value: &S) -> qfrob_core::Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        writeln!(self, "{text}").map_err(qfrob_core::Error::from)
    }

    pub fn finish(&mut self) -> io::Result<()> {
        self.flush()
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::Stdout(s) => s.write(buf),
            Sink::File(f) => f.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(s) => s.flush(),
            Sink::File(f) => f.flush(),
        }
    }
}

/// `solve --json` document; also the file format `verify --solutions`
/// accepts.
#[derive(Serialize, Deserialize)]
pub struct SolveDoc {
    pub operator: String,
    #[serde(default)]
    pub order: usize,
    pub solutions: Vec<SolutionJson>,
}

#[derive(Serialize, Deserialize)]
pub struct VerifyRow {
    pub solution_index: usize,
    pub residual_max_abs: f64,
    pub residual_max_rel: f64,
    pub guaranteed_order: Option<String>,
    pub growth: Option<GrowthJson>,
}

#[derive(Serialize, Deserialize)]
pub struct GrowthJson {
    pub class: String,
    pub estimate: Option<f64>,
}

impl GrowthJson {
    pub fn describe(&self) -> String {
        match &self.estimate {
            Some(e) => format!("{} ({:.3})", self.class, e),
            None => self.class.clone(),
        }
    }
}

impl From<GrowthClass> for GrowthJson {
    fn from(g: GrowthClass) -> Self {
        match g {
            GrowthClass::Convergent { radius_estimate } => GrowthJson {
                class: "convergent".into(),
                estimate: Some(radius_estimate),
            },
            GrowthClass::QGevrey { order_estimate } => GrowthJson {
                class: "q-gevrey".into(),
                estimate: Some(order_estimate),
            },
            GrowthClass::Undetermined => GrowthJson {
                class: "undetermined".into(),
                estimate: None,
            },
        }
    }
}
