#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

/// Small forced run on `[-8 pi, 8 pi)`; fast enough for every subcommand.
pub const SMALL: &str = r#"
seed = 3

[grid]
m = 128
half_length_pi = 8

[solver]
dt = 0.02

[imethod]
ell = 0.5
n = 4

[forcing]
amplitude = 1e-3
sigma = 2.0
period = 2.0

[initial]
kind = "gaussian"
amplitude = 0.05
center = 1.0

[simulate]
t_end = 4.0
lwp_windows = [1.0, 2.0]

[picard]
window = 1.0
windows = 4

[stability]
horizon = 6.0
fit_start = 1.0
fit_end = 5.0
epsilons = [1e-3]

[stability.absorbing]
pilot_horizon = 4.0
horizon = 12.0
post_entry_window = 2.0
"#;

/// Verification sweep small enough for tests. `max_xi` is 128, four times
/// the largest `N`.
pub const SMALL_VERIFY: &str = r#"
seed = 11

[grid]
m = 256
half_length_pi = 1

[solver]
dt = 0.05

[imethod]
ell = 0.5
n = 4
n_grid = [4.0, 8.0, 16.0, 32.0]

[verify]
ell_grid = [0.0, 0.5]

[verify.equivalence]
samples = 30
max_xi = 64.0

[verify.bilinear]
pairs = 3
t_grid = [1.0, 2.0, 4.0]

[verify.trilinear]
samples = 8
pilot_samples = 8
"#;

pub struct Run {
    pub dir: TempDir,
}

impl Run {
    pub fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("run.toml"), config).unwrap();
        Self { dir }
    }

    pub fn config(&self) -> PathBuf {
        self.dir.path().join("run.toml")
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Runs `bbm-orbit <command> --config run.toml --out <out> <extra..>` in-process.
    pub fn invoke(&self, command: &str, out: &str, extra: &[&str]) -> i32 {
        let config = self.config();
        let out = self.out(out);
        let mut args = vec![
            "bbm-orbit".to_string(),
            command.to_string(),
            "--config".into(),
            config.display().to_string(),
            "--out".into(),
            out.display().to_string(),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        bbm_cli::run(args)
    }
}

/// Runs the built binary, for tests that need stderr or the environment.
pub fn binary(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bbm-orbit"));
    cmd.args(args).env_remove("BBM_ORBIT_OUT");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

/// Contents of every CSV in `dir`, by file name.
pub fn csvs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

pub fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

/// `base` reparsed, edited and serialized back.
pub fn with(base: &str, edit: impl FnOnce(&mut toml::Table)) -> String {
    let mut table: toml::Table = base.parse().unwrap();
    edit(&mut table);
    toml::to_string(&table).unwrap()
}

pub fn set(table: &mut toml::Table, path: &str, value: impl Into<toml::Value>) {
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().unwrap();
    let mut t = table;
    for k in keys {
        t = t
            .entry(k)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .unwrap();
    }
    t.insert(last.to_string(), value.into());
}
